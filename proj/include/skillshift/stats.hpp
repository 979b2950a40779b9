#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace skillshift {

enum class PMethod { exact_permutation, t_approximation };
enum class Alternative { two_sided, greater, less };

std::string_view to_string(PMethod method);
std::string_view to_string(Alternative alternative);

/// Samples up to this size get an exact permutation p-value.
inline constexpr std::size_t kExactLimit = 8;

struct CorrelationResult {
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  PMethod method = PMethod::exact_permutation;
  Alternative alternative = Alternative::two_sided;
};

/// 1-based ranks, ties get the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation. Throws LengthMismatch when sizes differ and
/// DegenerateInput when n < 3 or either side is constant.
CorrelationResult spearman(std::span<const double> x, std::span<const double> y,
                           Alternative alternative = Alternative::two_sided);

/// p-value of rho under the t approximation with n - 2 degrees of freedom,
/// floored at the smallest p an exact test of size n could report.
double t_approximation_p(double rho, std::size_t n, Alternative alternative);

struct SampleSet {
  std::string id;
  std::vector<double> x;
  std::vector<double> y;
};

struct HypothesisRow {
  std::string set_id;
  CorrelationResult result;
  bool supported = false;
};

struct HypothesisReport {
  int hypothesis = 1;
  std::vector<HypothesisRow> rows;
  double mean_rho = 0.0;
  double mean_p = 0.0;
  bool any_supported = false;
};

/// Hypothesis I: pretraining effort vs. performance drop; supported by
/// rho < 0 at p < alpha. Hypothesis II: modification magnitude vs.
/// severity; supported by rho > 0 at p < alpha.
bool supports(int hypothesis, const CorrelationResult& result, double alpha = 0.05);

HypothesisReport hypothesis_analysis(int hypothesis, std::span<const SampleSet> sets,
                                     Alternative alternative = Alternative::two_sided);
HypothesisReport hypothesis_I_analysis(std::span<const SampleSet> sets);
HypothesisReport hypothesis_II_analysis(std::span<const SampleSet> sets);

/// Single-series form: modification counts against the matching RPDs.
HypothesisRow hypothesis_II_analysis(std::span<const double> magnitudes,
                                     std::span<const double> severities,
                                     Alternative alternative = Alternative::two_sided);

/// Aggregates already computed (rho, p) pairs without recomputation.
HypothesisReport summarize_precomputed(int hypothesis, std::vector<HypothesisRow> rows);

/// `set_id,x,y` rows grouped by set_id in first-seen order. Throws
/// SchemaError.
std::vector<SampleSet> parse_sample_csv(std::string_view text);

/// `set_id,rho,p` rows. Throws SchemaError.
std::vector<HypothesisRow> parse_precomputed_csv(std::string_view text);

/// Detects which of the two layouts a CSV uses.
bool is_precomputed_csv(std::string_view text);

/// One line per set, "Set <id>  rho: <r>  p: <p>", then the average row.
std::string hypothesis_table(const HypothesisReport& report);
std::string hypothesis_machine(const HypothesisReport& report);

}  // namespace skillshift
