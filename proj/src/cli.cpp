#include "skillshift/cli.hpp"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "skillshift/chain.hpp"
#include "skillshift/errors.hpp"
#include "skillshift/ingest.hpp"
#include "skillshift/metrics.hpp"
#include "skillshift/ramg.hpp"
#include "skillshift/stats.hpp"

namespace skillshift::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string format = "text";
  bool machine() const { return format == "machine"; }
};

/// Collects files to write, then writes them all at once after checking
/// that nothing would be clobbered.
class OutputTree {
 public:
  OutputTree(std::string root, bool force) : root_(std::move(root)), force_(force) {}

  void add(const std::string& name, std::string content) { files_.emplace(name, std::move(content)); }

  void commit() const {
    if (root_.empty()) return;
    if (!force_) {
      for (const auto& [name, content] : files_) {
        if (fs::exists(fs::path(root_) / name)) {
          throw Error((fs::path(root_) / name).string() + " exists; pass --force to overwrite");
        }
      }
    }
    for (const auto& [name, content] : files_) write_text_file(fs::path(root_) / name, content, true);
  }

  bool enabled() const { return !root_.empty(); }

 private:
  std::string root_;
  bool force_;
  std::map<std::string, std::string> files_;
};

std::string variant_name(std::size_t index) {
  std::ostringstream name;
  name << "variant_" << std::setw(4) << std::setfill('0') << index;
  return name.str();
}

std::string lines_of(const std::vector<json>& rows) {
  std::string out;
  for (const auto& row : rows) out += row.dump() + "\n";
  return out;
}

// ---------------------------------------------------------------------------

int do_validate(const Common& common, const std::string& problem_path, const std::string& skills,
                std::ostream& out) {
  const SceneProblem problem = load_problem_file(problem_path);
  std::vector<std::string> warnings;
  if (!skills.empty()) {
    const SkillRegistry registry = registry_for_problem(skills, problem.problem_name);
    for (const auto& op : registry.operators) {
      for (auto& w : bind_operator(problem, op)) warnings.push_back(op.name + ": " + w);
    }
  }
  if (common.machine()) {
    json doc{{"problem", problem.problem_name},
             {"content_id", content_id(problem)},
             {"entities", problem.entity_count()},
             {"init_atoms", problem.init.size()},
             {"valid", true},
             {"warnings", warnings}};
    out << doc.dump() << "\n";
  } else {
    out << "ok " << problem.problem_name << " (" << problem.entity_count() << " entities, "
        << problem.init.size() << " init atoms)\n";
    out << "content id " << content_id(problem) << "\n";
    for (const auto& w : warnings) out << "warning: " << w << "\n";
  }
  return 0;
}

struct MutateArgs {
  std::string problem, skills, catalog, out;
  std::size_t k = 1, count = 1, jobs = 1;
  std::uint64_t seed = 0;
  bool incremental = false, force = false;
};

int do_mutate(const Common& common, const MutateArgs& args, std::ostream& out) {
  if (args.k < 1) throw Error("--k must be at least 1");
  if (args.count < 1) throw Error("--count must be at least 1");
  const ObjectCatalog catalog = load_catalog(args.catalog);
  std::vector<ProtectedProblem> problems;
  for (const auto& path : problem_files(args.problem)) {
    SceneProblem problem = load_problem_file(path);
    const SkillRegistry registry = registry_for_problem(args.skills, problem.problem_name);
    problems.push_back(ProtectedProblem{std::move(problem), registry.protected_ops()});
  }

  // Each variant depends only on (seed, index), so workers may take any slice.
  std::vector<std::vector<TaskVariant>> results(args.count);
  std::vector<std::exception_ptr> failures(args.count);
  auto work = [&](std::size_t index) {
    try {
      const auto& base = problems[index % problems.size()];
      const std::uint64_t i = index;
      if (args.incremental) {
        results[index] = sample_incremental(base.problem, base.protected_ops, catalog, args.k,
                                            args.seed, {i});
      } else {
        results[index] = {sample_modifications(base.problem, base.protected_ops, catalog, args.k,
                                               args.seed, {i, args.k})};
      }
    } catch (...) {
      failures[index] = std::current_exception();
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(args.jobs, 1, args.count);
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t index = w; index < args.count; index += jobs) work(index);
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  OutputTree tree(args.out, args.force);
  std::vector<json> rows;
  for (std::size_t index = 0; index < args.count; ++index) {
    const auto& base = problems[index % problems.size()];
    for (const auto& variant : results[index]) {
      std::string name = variant_name(index);
      if (args.incremental) name += "_k" + std::to_string(variant.modifications.size());
      const json manifest = variant_manifest(variant, base.problem.problem_name, name + ".problem");
      tree.add(name + ".json", manifest.dump(2) + "\n");
      tree.add(name + ".problem", serialize_problem(variant.result));
      json row{{"variant", name},
               {"base_problem", base.problem.problem_name},
               {"k", variant.modifications.size()},
               {"result_id", manifest["result_id"]}};
      std::vector<std::string> described;
      for (const auto& mod : variant.modifications) described.push_back(describe(mod));
      row["modifications"] = described;
      rows.push_back(std::move(row));
    }
  }
  tree.commit();
  if (common.machine()) {
    out << lines_of(rows);
  } else {
    for (const auto& row : rows) {
      out << row["variant"].get<std::string>() << "  " << row["base_problem"].get<std::string>()
          << "  k=" << row["k"].get<std::size_t>();
      for (const auto& d : row["modifications"]) out << "  " << d.get<std::string>();
      out << "\n";
    }
    out << rows.size() << " variants written to " << args.out << "\n";
  }
  return 0;
}

int do_enumerate(const Common& common, const std::string& problems_dir, const std::string& skills,
                 const std::string& catalog_path, const std::string& out_dir, bool force,
                 std::ostream& out) {
  const ObjectCatalog catalog = load_catalog(catalog_path);
  std::vector<ProtectedProblem> problems;
  for (const auto& path : problem_files(problems_dir)) {
    SceneProblem problem = load_problem_file(path);
    const SkillRegistry registry = registry_for_problem(skills, problem.problem_name);
    problems.push_back(ProtectedProblem{std::move(problem), registry.protected_ops()});
  }
  const VariantCount count = enumerate_variant_count(problems, catalog);
  std::string text;
  if (common.machine()) {
    std::vector<json> rows;
    for (const auto& [name, n] : count.per_problem) rows.push_back({{"problem", name}, {"candidates", n}});
    rows.push_back({{"total", count.total}});
    text = lines_of(rows);
  } else {
    std::size_t width = 5;
    for (const auto& [name, n] : count.per_problem) width = std::max(width, name.size());
    std::ostringstream table;
    for (const auto& [name, n] : count.per_problem) {
      table << name << std::string(width - name.size() + 2, ' ') << n << "\n";
    }
    table << "total" << std::string(width - 3, ' ') << count.total << "\n";
    text = table.str();
  }
  OutputTree tree(out_dir, force);
  tree.add(common.machine() ? "enumerate.jsonl" : "enumerate.txt", text);
  tree.commit();
  out << text;
  return 0;
}

int do_chain(const Common& common, const std::string& spec, const std::string& out_dir, bool force,
             std::ostream& out) {
  const ChallengeChain result = load_chain_spec(spec);
  std::string text;
  if (common.machine()) {
    std::vector<json> rows;
    const json doc = trace_to_json(result);
    for (const auto& step : doc["steps"]) {
      json row = step;
      row["problem"] = doc["problem"];
      rows.push_back(std::move(row));
    }
    rows.push_back({{"problem", doc["problem"]}, {"warnings", doc["warnings"]}});
    text = lines_of(rows);
  } else {
    text = trace_to_text(result);
  }
  OutputTree tree(out_dir, force);
  tree.add(common.machine() ? "chain_trace.jsonl" : "chain_trace.txt", text);
  tree.commit();
  out << text;
  return 0;
}

int do_metrics(const Common& common, const std::vector<std::string>& logs,
               const std::string& challenge_text, const std::vector<std::string>& summary_paths,
               const std::string& out_dir, bool force, std::ostream& out) {
  const auto challenge = challenge_from_string(challenge_text);
  if (!challenge) throw Error("--challenge must be c1, c2 or c3");
  AggregateLog counts;
  std::vector<FixtureRow> fixture;
  std::vector<SummaryCell> summaries;
  bool have_counts = false;
  auto absorb = [&](const EvalLog& log) {
    switch (log.schema) {
      case LogSchema::episode:
      case LogSchema::aggregate:
        merge_into(counts, log.counts);
        have_counts = true;
        break;
      case LogSchema::fixture:
        fixture.insert(fixture.end(), log.fixture.begin(), log.fixture.end());
        break;
      case LogSchema::summary:
        summaries.insert(summaries.end(), log.summary.begin(), log.summary.end());
        break;
    }
  };
  for (const auto& path : logs) absorb(load_eval_log(path));
  for (const auto& path : summary_paths) absorb(load_eval_log(path));

  MetricsReport report;
  report.challenge = *challenge;
  bool first = true;
  auto fold = [&](MetricsReport part) {
    if (first) {
      report = std::move(part);
      first = false;
    } else {
      report.merge(part);
    }
  };
  if (have_counts) {
    const auto rates = condition_rates(counts);
    fold(challenge_report(rates, *challenge, {}));
  }
  if (!fixture.empty()) {
    const auto pairs = fixture_pairs(fixture);
    fold(challenge_report(pairs, {}, *challenge, {}));
  }
  if (!summaries.empty()) {
    if (first) {
      report = MetricsReport{};
      report.challenge = *challenge;
      first = false;
    }
    for (const auto& cell : summaries) report.summaries[{cell.baseline, cell.k_mods}] = cell;
  }
  if (first) throw EmptyInput("no evaluation records");

  const std::string text = common.machine() ? report_to_machine(report) : report_to_text(report);
  OutputTree tree(out_dir, force);
  tree.add(common.machine() ? "report.jsonl" : "report.txt", text);
  for (const auto& [key, cell] : report.cells) {
    tree.add("scatter_" + key.first + "_k" + std::to_string(key.second) + ".csv",
             scatter_csv(report, key.first, key.second));
  }
  tree.commit();
  out << text;
  return 0;
}

int do_correlate(const Common& common, const std::string& data, int hypothesis,
                 const std::string& alternative_text, const std::string& out_dir, bool force,
                 std::ostream& out) {
  Alternative alternative = Alternative::two_sided;
  if (alternative_text == "greater") {
    alternative = Alternative::greater;
  } else if (alternative_text == "less") {
    alternative = Alternative::less;
  }
  const std::string text = read_text_file(data);
  HypothesisReport report =
      is_precomputed_csv(text)
          ? summarize_precomputed(hypothesis, parse_precomputed_csv(text))
          : hypothesis_analysis(hypothesis, parse_sample_csv(text), alternative);
  const std::string rendered = common.machine() ? hypothesis_machine(report) : hypothesis_table(report);
  OutputTree tree(out_dir, force);
  tree.add(common.machine() ? "correlation.jsonl" : "correlation.txt", rendered);
  tree.commit();
  out << rendered;
  return 0;
}

int do_augment(const Common& common, const std::string& variants_dir, const std::string& demos_path,
               const std::string& replay_path, const std::string& out_dir, bool force,
               std::ostream& out) {
  const auto refs = load_variant_refs(variants_dir);
  json demos_doc;
  try {
    demos_doc = json::parse(read_text_file(demos_path));
  } catch (const json::parse_error& e) {
    throw SchemaError(demos_path + ": " + e.what());
  }
  const auto demos = demos_from_json(demos_doc);
  std::optional<ReplayResults> replay;
  if (!replay_path.empty()) replay = parse_replay_results(read_text_file(replay_path));
  const AugmentationManifest manifest =
      build_augmentation_manifest(refs, demos, replay ? &*replay : nullptr);
  const json doc = to_json(manifest);
  std::string text;
  if (common.machine()) {
    std::vector<json> rows(doc["entries"].begin(), doc["entries"].end());
    json totals = doc["totals"];
    totals["type"] = "totals";
    rows.push_back(totals);
    text = lines_of(rows);
  } else {
    std::map<std::string, std::size_t> per_task;
    for (const auto& e : manifest.entries) ++per_task[e.base_task];
    std::ostringstream s;
    for (const auto& [task, n] : per_task) s << task << "  " << n << " attempted\n";
    s << "attempted " << manifest.attempted << "  retained " << manifest.retained << "  failed "
      << manifest.failed << "  pending " << manifest.pending << "\n";
    text = s.str();
  }
  OutputTree tree(out_dir, force);
  tree.add("augmentation_manifest.json", doc.dump(2) + "\n");
  tree.commit();
  out << text;
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Skill-chain robustness toolkit: scene mutation, chain diagnostics, metrics"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file with option defaults; flags take precedence");
  Common common;
  app.add_option("--format", common.format, "Output format")
      ->check(CLI::IsMember({"text", "machine"}))
      ->capture_default_str();

  std::string problem_path, skills, catalog, out_dir, spec, challenge, data, alternative = "two-sided";
  std::string variants_dir, demos, replay;
  std::vector<std::string> logs, summary_paths;
  int hypothesis = 1;
  bool force = false;
  MutateArgs margs;

  auto* validate = app.add_subcommand("validate", "Parse and validate a scene problem");
  validate->add_option("problem", problem_path, "Problem file")->required()->check(CLI::ExistingFile);
  validate->add_option("--skills", skills, "Skill registry file or directory to bind");

  auto* mutate = app.add_subcommand("mutate", "Generate modified task variants");
  mutate->add_option("--problem", margs.problem, "Problem file or directory")->required()->check(CLI::ExistingPath);
  mutate->add_option("--skills", margs.skills, "Skill registry file or directory")->required()->check(CLI::ExistingPath);
  mutate->add_option("--catalog", margs.catalog, "Object catalog")->required()->check(CLI::ExistingFile);
  mutate->add_option("--k", margs.k, "Modifications per variant")->required()->check(CLI::PositiveNumber);
  mutate->add_option("--count", margs.count, "Number of variants")->required()->check(CLI::PositiveNumber);
  mutate->add_option("--seed", margs.seed, "Master seed")->required();
  mutate->add_flag("--incremental", margs.incremental, "Write nested variants with 1..k modifications");
  mutate->add_option("--out", margs.out, "Output directory")->required();
  mutate->add_flag("--force", margs.force, "Overwrite existing files");
  mutate->add_option("--jobs", margs.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  auto* enumerate = app.add_subcommand("enumerate", "Count legal single modifications");
  enumerate->add_option("--problems", problem_path, "Problem directory")->required()->check(CLI::ExistingPath);
  enumerate->add_option("--skills", skills, "Skill registry file or directory")->required()->check(CLI::ExistingPath);
  enumerate->add_option("--catalog", catalog, "Object catalog")->required()->check(CLI::ExistingFile);

  auto* chain = app.add_subcommand("chain", "Trace a skill chain and report observation shifts");
  chain->add_option("--spec", spec, "Chain spec file")->required()->check(CLI::ExistingFile);

  auto* metrics = app.add_subcommand("metrics", "Challenge metrics from evaluation logs");
  metrics->add_option("--log", logs, "Evaluation log CSV (repeatable)")->required()->check(CLI::ExistingFile);
  metrics->add_option("--challenge", challenge, "c1, c2 or c3")->required()->check(CLI::IsMember({"c1", "c2", "c3"}));
  metrics->add_option("--summary", summary_paths, "Published summary cells CSV")->check(CLI::ExistingFile);

  auto* correlate = app.add_subcommand("correlate", "Spearman analysis of a hypothesis");
  correlate->add_option("--data", data, "CSV: set_id,x,y or set_id,rho,p")->required()->check(CLI::ExistingFile);
  correlate->add_option("--hypothesis", hypothesis, "1 or 2")->required()->check(CLI::IsMember({1, 2}));
  correlate->add_option("--alternative", alternative, "two-sided, greater or less")
      ->check(CLI::IsMember({"two-sided", "greater", "less"}))
      ->capture_default_str();

  auto* augment = app.add_subcommand("augment-manifest", "Demonstration replay manifest");
  augment->add_option("--variants", variants_dir, "Directory of variant manifests")->required()->check(CLI::ExistingDirectory);
  augment->add_option("--demos", demos, "JSON map of demos per base task")->required()->check(CLI::ExistingFile);
  augment->add_option("--replay", replay, "Replay results CSV")->check(CLI::ExistingFile);

  for (auto* sub : {enumerate, chain, metrics, correlate, augment}) {
    sub->add_option("--out", out_dir, "Directory for report files");
    sub->add_flag("--force", force, "Overwrite existing files");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  try {
    if (*validate) return do_validate(common, problem_path, skills, out);
    if (*mutate) return do_mutate(common, margs, out);
    if (*enumerate) return do_enumerate(common, problem_path, skills, catalog, out_dir, force, out);
    if (*chain) return do_chain(common, spec, out_dir, force, out);
    if (*metrics) return do_metrics(common, logs, challenge, summary_paths, out_dir, force, out);
    if (*correlate) {
      return do_correlate(common, data, hypothesis, alternative == "two-sided" ? "two_sided" : alternative,
                          out_dir, force, out);
    }
    if (*augment) return do_augment(common, variants_dir, demos, replay, out_dir, force, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace skillshift::cli
