#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skillshift/rational.hpp"

namespace skillshift {

struct SuccessRate {
  std::optional<long long> successes;
  std::optional<long long> episodes;
  Rational rate;

  /// Throws RangeError unless 0 <= successes <= episodes and episodes > 0.
  static SuccessRate from_counts(long long successes, long long episodes);
  /// Throws RangeError unless 0 <= rate <= 1.
  static SuccessRate from_rate(Rational rate);

  bool operator==(const SuccessRate&) const = default;
};

struct TaskPairResult {
  std::string baseline;
  std::string task_id;
  SuccessRate sr_ori;
  SuccessRate sr_mod;
  int k_mods = 1;
};

/// (ori - mod) / ori, and exactly 0 when ori is 0.
Rational rpd(const Rational& sr_ori, const Rational& sr_mod);
Rational rpd(const SuccessRate& sr_ori, const SuccessRate& sr_mod);
Rational rpd(const TaskPairResult& pair);

/// Fraction of pairs with RPD > 0. Throws EmptyInput.
Rational occurrence_ratio(std::span<const TaskPairResult> results);

/// Mean RPD over pairs with RPD > 0; nullopt when there are none. Throws
/// EmptyInput.
std::optional<Rational> avg_positive_rpd(std::span<const TaskPairResult> results);

/// Product of per-skill success rates. Throws EmptyInput.
Rational chain_upper_bound(std::span<const SuccessRate> srs);

/// (ub - actual) / ub, positive when the chain underperforms its bound;
/// exactly 0 when ub is 0.
Rational dubr(const Rational& ub, const SuccessRate& sr_chain);

// ---------------------------------------------------------------------------
// Aggregation

enum class Challenge { C1, C2, C3 };

std::string_view to_string(Challenge challenge);
std::optional<Challenge> challenge_from_string(std::string_view text);

/// Success rate observed for one (baseline, task, condition, k) cell of an
/// evaluation log.
struct ConditionRate {
  std::string baseline;
  std::string task_id;
  std::string condition;  // ori | mod | chain
  int k_mods = 0;
  SuccessRate rate;
};

/// Pairs every mod cell with its ori cell. Throws MissingCondition.
std::vector<TaskPairResult> pair_conditions(std::span<const ConditionRate> rates);

struct ChainRecord {
  std::string baseline;
  std::string chain_id;
  std::vector<SuccessRate> skill_srs;
  SuccessRate chain_sr;
};

/// Chain rows carry task_id = chain id; the skills of chain c are the ori
/// rows with task_id "c:0", "c:1", ... Throws MissingCondition.
std::vector<ChainRecord> collect_chains(std::span<const ConditionRate> rates);

/// Mergeable per-(baseline, k) aggregate.
struct CellAggregate {
  std::size_t n_tasks = 0;
  std::size_t n_positive = 0;
  Rational sum_sr_ori;
  Rational sum_sr_mod;
  Rational sum_positive_rpd;

  void add(const TaskPairResult& pair);
  void merge(const CellAggregate& other);

  Rational avg_sr_ori() const;
  Rational avg_sr_mod() const;
  Rational occurrence_ratio() const;
  std::optional<Rational> avg_positive_rpd() const;

  bool operator==(const CellAggregate&) const = default;
};

struct ChainMetrics {
  std::string baseline;
  std::string chain_id;
  Rational upper_bound;
  Rational actual;
  Rational dubr;

  bool operator==(const ChainMetrics&) const = default;
};

struct ScatterPoint {
  std::string baseline;
  int k_mods = 1;
  std::string task_id;
  Rational sr_ori;
  Rational sr_mod;
  Rational rpd;

  bool operator==(const ScatterPoint&) const = default;
};

/// A published aggregate cell (mean SR and mean positive RPD) for which no
/// per-task rows exist. k_mods = 0 is the unmodified row.
struct SummaryCell {
  std::string baseline;
  int k_mods = 0;
  Rational avg_sr;
  std::optional<Rational> avg_rpd;

  bool operator==(const SummaryCell&) const = default;
};

using CellKey = std::pair<std::string, int>;  // (baseline, k)

struct MetricsReport {
  Challenge challenge = Challenge::C1;
  std::vector<ScatterPoint> per_task;
  std::map<CellKey, CellAggregate> cells;
  std::vector<ChainMetrics> chains;
  std::map<CellKey, SummaryCell> summaries;

  /// Union of two reports over disjoint records; cells merge additively.
  void merge(const MetricsReport& other);

  bool operator==(const MetricsReport&) const = default;
};

/// C1 keeps k = 1 pairs, C2 keeps every k >= 1, C3 uses only chains.
MetricsReport challenge_report(std::span<const TaskPairResult> pairs,
                               std::span<const ChainRecord> chains, Challenge challenge,
                               std::span<const SummaryCell> summaries = {});

/// Log-driven variant: pairs and chains are derived from condition rates.
MetricsReport challenge_report(std::span<const ConditionRate> rates, Challenge challenge,
                               std::span<const SummaryCell> summaries = {});

/// Mean over baselines of the avg positive RPD at k, using computed cells
/// where present and summary cells otherwise. nullopt when nothing exists.
std::optional<Rational> cross_baseline_mean_rpd(const MetricsReport& report, int k);

/// Aligned-column table, two decimals.
std::string report_to_text(const MetricsReport& report);
/// One JSON object per line, sorted keys and rows; exact and rounded values.
std::string report_to_machine(const MetricsReport& report);
/// `task_id,sr_ori,sr_mod,rpd` rows for one (baseline, k).
std::string scatter_csv(const MetricsReport& report, const std::string& baseline, int k);

}  // namespace skillshift
