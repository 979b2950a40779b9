#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skillshift/errors.hpp"
#include "skillshift/ingest.hpp"
#include "support.hpp"

using namespace skillshift;
using testing_support::data_dir;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("skillshift_ingest_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string episode_log(std::uint64_t seed, int tasks) {
  std::mt19937_64 rng(seed);
  std::ostringstream out;
  out << kEpisodeHeader << "\n";
  for (int t = 0; t < tasks; ++t) {
    for (int k = 0; k <= 2; ++k) {
      for (int e = 0; e < 5; ++e) {
        out << "b," << t << "," << (k == 0 ? "ori" : "mod") << "," << k << "," << e << "," << (rng() & 1U)
            << "\n";
      }
    }
  }
  return out.str();
}

}  // namespace

TEST(Logs, SchemaDetection) {
  EXPECT_EQ(parse_eval_log(episode_log(1, 2)).schema, LogSchema::episode);
  EXPECT_EQ(parse_eval_log(std::string(kAggregateHeader) + "\nb,t,ori,0,3,4\n").schema, LogSchema::aggregate);
  EXPECT_EQ(load_eval_log(data_dir() / "fixtures" / "bossc1_table.csv").schema, LogSchema::fixture);
  EXPECT_EQ(load_eval_log(data_dir() / "fixtures" / "bossc2_table.csv").schema, LogSchema::summary);
  EXPECT_THROW(parse_eval_log("what,is,this\n"), SchemaError);
  EXPECT_THROW(parse_eval_log(""), SchemaError);
}

TEST(Logs, EpisodesNormalizeToCounts) {
  const auto log = parse_eval_log(std::string(kEpisodeHeader) +
                                  "\nb,t,ori,0,0,1\nb,t,ori,0,1,0\nb,t,ori,0,2,1\nb,t,mod,1,0,0\n");
  const ConditionKey ori{"b", "t", "ori", 0};
  EXPECT_EQ(log.counts.at(ori), (Counts{2, 3}));
  EXPECT_EQ(log.counts.at({"b", "t", "mod", 1}), (Counts{0, 1}));
}

TEST(Logs, RowErrors) {
  const std::string h(kEpisodeHeader);
  EXPECT_THROW(parse_eval_log(h + "\nb,t,ori,0,0,2\n"), RangeError);
  EXPECT_THROW(parse_eval_log(h + "\nb,t,ori,1,0,1\n"), SchemaError);
  EXPECT_THROW(parse_eval_log(h + "\nb,t,mod,0,0,1\n"), SchemaError);
  EXPECT_THROW(parse_eval_log(h + "\nb,t,weird,0,0,1\n"), SchemaError);
  EXPECT_THROW(parse_eval_log(h + "\nb,t,ori,0,0,1\nb,t,ori,0,0,0\n"), SchemaError);
  EXPECT_THROW(parse_eval_log(h + "\nb,t,ori,0,0\n"), SchemaError);
  EXPECT_THROW(parse_eval_log(h + "\n\"b\",t,ori,0,0,1\n"), SchemaError);
  const std::string a(kAggregateHeader);
  EXPECT_THROW(parse_eval_log(a + "\nb,t,ori,0,5,4\n"), RangeError);
  EXPECT_THROW(parse_eval_log(a + "\nb,t,ori,0,1,0\n"), RangeError);
  const std::string f(kFixtureHeader);
  EXPECT_THROW(parse_eval_log(f + "\nb,t,1.2,0.5,0.1\n"), RangeError);
}

TEST(Logs, MergeIsAssociativeAndCommutative) {
  const auto a = parse_eval_log(episode_log(1, 3)).counts;
  const auto b = parse_eval_log(episode_log(2, 3)).counts;
  const auto c = parse_eval_log(episode_log(3, 4)).counts;
  AggregateLog left = a;
  merge_into(left, b);
  merge_into(left, c);
  AggregateLog bc = b;
  merge_into(bc, c);
  AggregateLog right = a;
  merge_into(right, bc);
  EXPECT_EQ(left, right);
  AggregateLog swapped = c;
  merge_into(swapped, a);
  merge_into(swapped, b);
  EXPECT_EQ(left, swapped);
}

TEST(Logs, SplitIngestEqualsWholeIngest) {
  const auto text = episode_log(5, 4);
  const auto whole = parse_eval_log(text).counts;
  // Split rows by task: tasks 0-1 in one file, 2-3 in another.
  std::istringstream in(text);
  std::string line, first = std::string(kEpisodeHeader) + "\n", second = first;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto task = line.substr(2, 1);
    ((task == "0" || task == "1") ? first : second) += line + "\n";
  }
  AggregateLog merged = parse_eval_log(first).counts;
  merge_into(merged, parse_eval_log(second).counts);
  EXPECT_EQ(merged, whole);
  EXPECT_EQ(parse_eval_log(write_aggregate_log(whole)).counts, whole);
}

TEST(Fixtures, ReserializeByteForByte) {
  for (const auto* name : {"bossc1_table.csv", "bossc2_table.csv"}) {
    const auto path = data_dir() / "fixtures" / name;
    const auto text = read_text_file(path);
    const auto log = parse_eval_log(text);
    const auto again = log.schema == LogSchema::fixture ? write_fixture_table(log.fixture)
                                                        : write_summary_table(log.summary);
    EXPECT_EQ(again, text) << name;
  }
}

TEST(Fixtures, ChecksumsVerify) {
  for (const auto& entry : fs::directory_iterator(data_dir() / "fixtures")) {
    if (entry.path().extension() != ".csv") continue;
    EXPECT_TRUE(verify_checksum(entry.path())) << entry.path();
  }
  const auto dir = temp_dir("checksum");
  write_text_file(dir / "x.csv", "a\n", false);
  EXPECT_THROW(verify_checksum(dir / "x.csv"), Error);
  write_text_file(dir / "x.csv.sha256", checksum_line(dir / "x.csv"), false);
  EXPECT_TRUE(verify_checksum(dir / "x.csv"));
  write_text_file(dir / "x.csv", "b\n", true);
  EXPECT_FALSE(verify_checksum(dir / "x.csv"));
}

TEST(Fixtures, BossC1Shape) {
  const auto log = load_eval_log(data_dir() / "fixtures" / "bossc1_table.csv");
  EXPECT_EQ(log.fixture.size(), 220U);
  std::map<std::string, int> per_baseline;
  for (const auto& row : log.fixture) ++per_baseline[row.baseline];
  EXPECT_EQ(per_baseline.size(), 5U);
  for (const auto& [name, n] : per_baseline) EXPECT_EQ(n, 44) << name;
}

TEST(Files, NoSilentOverwrite) {
  const auto dir = temp_dir("overwrite");
  write_text_file(dir / "a.txt", "one", false);
  EXPECT_THROW(write_text_file(dir / "a.txt", "two", false), Error);
  EXPECT_EQ(read_text_file(dir / "a.txt"), "one");
  write_text_file(dir / "a.txt", "two", true);
  EXPECT_EQ(read_text_file(dir / "a.txt"), "two");
}

TEST(Registry, ProtectedSubset) {
  const auto registry = testing_support::load_skills("kitchen_scene1");
  ASSERT_EQ(registry.protected_ops().size(), 1U);
  EXPECT_EQ(registry.protected_ops()[0].name, "MoveContainer_bowl_cabinet");
  const auto all = skill_registry_from_json(nlohmann::json::parse(R"({"operators": [
      {"name": "A", "pre": [], "eff": [["Open", "d"]]}]})"));
  EXPECT_EQ(all.protected_ops().size(), 1U);
  EXPECT_THROW(skill_registry_from_json(nlohmann::json::parse(R"({"operators": [], "protected": ["Z"]})")),
               UnknownOperator);
  const auto per_task = registry_for_problem(data_dir() / "tasks" / "skills", "task_07");
  EXPECT_FALSE(per_task.operators.empty());
}

TEST(Registry, ProblemFilesSorted) {
  const auto files = problem_files(data_dir() / "tasks");
  ASSERT_EQ(files.size(), 44U);
  EXPECT_TRUE(std::is_sorted(files.begin(), files.end()));
}

TEST(Manifest, TotalsLaw) {
  std::vector<VariantRef> variants{{"v1", "task_a"}, {"v2", "task_a"}, {"v3", "task_b"}};
  std::map<std::string, int> demos{{"task_a", 3}, {"task_b", 2}};
  const auto replay = parse_replay_results("variant_id,demo_id,status\nv1,0,ok\nv1,1,failed\nv3,1,ok\n");
  const auto m = build_augmentation_manifest(variants, demos, &replay);
  EXPECT_EQ(m.attempted, 8U);
  EXPECT_EQ(m.retained, 2U);
  EXPECT_EQ(m.failed, 1U);
  EXPECT_EQ(m.pending, 5U);
  EXPECT_EQ(m.retained + m.failed + m.pending, m.attempted);
  EXPECT_EQ(m.entries.size(), m.attempted);
}

TEST(Manifest, EmptyAndMissingBase) {
  const auto empty = build_augmentation_manifest({}, {});
  EXPECT_EQ(empty.attempted, 0U);
  EXPECT_TRUE(empty.entries.empty());
  std::vector<VariantRef> orphan{{"v", "nowhere"}};
  EXPECT_THROW(build_augmentation_manifest(orphan, {{"task", 1}}), MissingBase);
}

TEST(Manifest, ScalingArithmetic) {
  // T tasks with d demos and v variants each give T * d * v attempts.
  std::vector<VariantRef> variants;
  std::map<std::string, int> demos;
  for (int t = 0; t < 4; ++t) {
    demos["t" + std::to_string(t)] = 5;
    for (int v = 0; v < 3; ++v) variants.push_back({"t" + std::to_string(t) + "_" + std::to_string(v), "t" + std::to_string(t)});
  }
  EXPECT_EQ(build_augmentation_manifest(variants, demos).attempted, 4U * 5U * 3U);
}

TEST(Manifest, ReplayErrors) {
  EXPECT_THROW(parse_replay_results("variant_id,demo_id,status\nv,0,maybe\n"), SchemaError);
  EXPECT_THROW(parse_replay_results("variant_id,demo_id,status\nv,0,ok\nv,0,ok\n"), SchemaError);
  EXPECT_THROW(parse_replay_results("bad\n"), SchemaError);
}

TEST(Manifest, DemosJson) {
  const auto demos = demos_from_json(nlohmann::json::parse(read_text_file(data_dir() / "tasks" / "demos.json")));
  int total = 0;
  for (const auto& [task, n] : demos) total += n;
  EXPECT_EQ(demos.size(), 44U);
  EXPECT_EQ(total, 2000);
  EXPECT_THROW(demos_from_json(nlohmann::json::parse(R"({"a": -1})")), SchemaError);
}
