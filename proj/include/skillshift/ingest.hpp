#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "skillshift/metrics.hpp"
#include "skillshift/pddl_model.hpp"
#include "skillshift/ramg.hpp"

namespace skillshift {

std::string read_text_file(const std::filesystem::path& path);
/// Refuses to replace an existing file unless `force`. Throws Error.
void write_text_file(const std::filesystem::path& path, std::string_view content, bool force);

SceneProblem load_problem_file(const std::filesystem::path& path);

/// Skill registry file: {"operators": [...], "protected": [names]}. Without
/// "protected", every operator is protected.
struct SkillRegistry {
  std::vector<OperatorSpec> operators;
  std::vector<std::string> protected_names;

  const OperatorSpec* find(std::string_view name) const;
  std::vector<OperatorSpec> protected_ops() const;
};

SkillRegistry skill_registry_from_json(const nlohmann::json& doc);
SkillRegistry load_skill_registry(const std::filesystem::path& path);

/// `skills` is either a registry file shared by all problems or a directory
/// holding `<problem_name>.json` per problem.
SkillRegistry registry_for_problem(const std::filesystem::path& skills,
                                   const std::string& problem_name);

ObjectCatalog load_catalog(const std::filesystem::path& path);

/// Problem files (*.problem, *.pddl) in a directory sorted by name, or the
/// single file given.
std::vector<std::filesystem::path> problem_files(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Evaluation logs

enum class LogSchema { episode, aggregate, fixture, summary };

std::string_view to_string(LogSchema schema);

inline constexpr std::string_view kEpisodeHeader =
    "baseline,task_id,condition,k_mods,episode_id,success";
inline constexpr std::string_view kAggregateHeader =
    "baseline,task_id,condition,k_mods,successes,episodes";
inline constexpr std::string_view kFixtureHeader = "baseline,task_id,sr_ori,sr_mod,rpd_paper";
inline constexpr std::string_view kSummaryHeader = "baseline,k_mods,avg_sr,avg_rpd";

struct ConditionKey {
  std::string baseline;
  std::string task_id;
  std::string condition;
  int k_mods = 0;

  auto operator<=>(const ConditionKey&) const = default;
  bool operator==(const ConditionKey&) const = default;
};

struct Counts {
  long long successes = 0;
  long long episodes = 0;

  bool operator==(const Counts&) const = default;
};

using AggregateLog = std::map<ConditionKey, Counts>;

/// Per-task published row: SRs and the reported RPD.
struct FixtureRow {
  std::string baseline;
  std::string task_id;
  Rational sr_ori;
  Rational sr_mod;
  Rational rpd_paper;

  bool operator==(const FixtureRow&) const = default;
};

/// Parsed log in whatever grain the header announced.
struct EvalLog {
  LogSchema schema = LogSchema::aggregate;
  AggregateLog counts;              // episode, aggregate
  std::vector<FixtureRow> fixture;  // fixture
  std::vector<SummaryCell> summary; // summary
};

/// Detects the schema from the header. Throws SchemaError or RangeError.
EvalLog parse_eval_log(std::string_view text);
EvalLog load_eval_log(const std::filesystem::path& path);

/// Sums counts; duplicate keys merge.
void merge_into(AggregateLog& into, const AggregateLog& other);

std::vector<ConditionRate> condition_rates(const AggregateLog& log);
std::vector<TaskPairResult> fixture_pairs(std::span<const FixtureRow> rows);

/// Canonical writers; reproduce canonical inputs byte for byte.
std::string write_fixture_table(std::span<const FixtureRow> rows);
std::string write_summary_table(std::span<const SummaryCell> cells);
std::string write_aggregate_log(const AggregateLog& log);

/// "<hex>  <filename>\n", the sha256sum format.
std::string checksum_line(const std::filesystem::path& path);
/// Compares `path` against `path` + ".sha256". Throws Error if the sidecar is
/// missing or malformed.
bool verify_checksum(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Augmentation manifest

enum class ReplayStatus { ok, failed, pending };

std::string_view to_string(ReplayStatus status);

struct VariantRef {
  std::string variant_id;
  std::string base_task;
};

struct ManifestEntry {
  std::string base_task;
  std::string variant_id;
  int demo_id = 0;
  ReplayStatus status = ReplayStatus::pending;
};

struct AugmentationManifest {
  std::vector<ManifestEntry> entries;
  std::size_t attempted = 0;
  std::size_t retained = 0;
  std::size_t failed = 0;
  std::size_t pending = 0;
};

using ReplayResults = std::map<std::pair<std::string, int>, ReplayStatus>;

/// One entry per (variant, demo of its base task). Entries without a replay
/// result stay pending. Throws MissingBase when a variant's base task has no
/// demonstrations listed.
AugmentationManifest build_augmentation_manifest(std::span<const VariantRef> variants,
                                                 const std::map<std::string, int>& demos,
                                                 const ReplayResults* replay = nullptr);

/// `variant_id,demo_id,status` rows.
ReplayResults parse_replay_results(std::string_view text);
/// {"<task>": <demo count>}.
std::map<std::string, int> demos_from_json(const nlohmann::json& doc);
/// Reads variant manifests (*.json) written by `mutate`.
std::vector<VariantRef> load_variant_refs(const std::filesystem::path& dir);

nlohmann::json to_json(const AugmentationManifest& manifest);

}  // namespace skillshift
