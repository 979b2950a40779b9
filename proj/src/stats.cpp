#include "skillshift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "skillshift/errors.hpp"
#include "skillshift/rational.hpp"

namespace skillshift {

std::string_view to_string(PMethod method) {
  return method == PMethod::exact_permutation ? "exact_permutation" : "t_approximation";
}

std::string_view to_string(Alternative alternative) {
  switch (alternative) {
    case Alternative::two_sided: return "two_sided";
    case Alternative::greater: return "greater";
    case Alternative::less: return "less";
  }
  return "?";
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = rank;
    i = j + 1;
  }
  return ranks;
}

namespace {

using Wide = __int128;

// Doubled ranks are integers, so every sum below is exact.
std::vector<long long> doubled_ranks(std::span<const double> values) {
  std::vector<long long> out;
  for (double r : average_ranks(values)) out.push_back(std::llround(2.0 * r));
  return out;
}

double min_exact_p(std::size_t n, Alternative alternative) {
  const double tails = alternative == Alternative::two_sided ? 2.0 : 1.0;
  const double p = std::exp(std::log(tails) - std::lgamma(static_cast<double>(n) + 1.0));
  return std::max(p, std::numeric_limits<double>::denorm_min());
}

}  // namespace

double t_approximation_p(double rho, std::size_t n, Alternative alternative) {
  if (n < 3) throw DegenerateInput("t approximation needs n >= 3");
  double p = 0.0;
  if (std::abs(rho) < 1.0) {
    const double df = static_cast<double>(n - 2);
    const double t = rho * std::sqrt(df / (1.0 - rho * rho));
    boost::math::students_t dist(df);
    switch (alternative) {
      case Alternative::two_sided: p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))); break;
      case Alternative::greater: p = boost::math::cdf(boost::math::complement(dist, t)); break;
      case Alternative::less: p = boost::math::cdf(dist, t); break;
    }
  } else {
    const bool agrees = alternative == Alternative::two_sided ||
                        (alternative == Alternative::greater) == (rho > 0);
    p = agrees ? 0.0 : 1.0;
  }
  return std::clamp(p, min_exact_p(n, alternative), 1.0);
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y,
                           Alternative alternative) {
  if (x.size() != y.size()) {
    throw LengthMismatch("x has " + std::to_string(x.size()) + " values, y has " +
                         std::to_string(y.size()));
  }
  const std::size_t n = x.size();
  if (n < 3) throw DegenerateInput("spearman needs at least 3 pairs");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DegenerateInput("non-finite sample");
  }

  const auto a = doubled_ranks(x);
  const auto b = doubled_ranks(y);
  const Wide wn = static_cast<Wide>(n);
  Wide sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sa += a[i];
    sb += b[i];
    saa += static_cast<Wide>(a[i]) * a[i];
    sbb += static_cast<Wide>(b[i]) * b[i];
    sab += static_cast<Wide>(a[i]) * b[i];
  }
  const Wide sxx = wn * saa - sa * sa;
  const Wide syy = wn * sbb - sb * sb;
  const Wide sxy = wn * sab - sa * sb;
  if (sxx == 0 || syy == 0) throw DegenerateInput("a constant sample has no rank correlation");

  CorrelationResult result;
  result.n = n;
  result.alternative = alternative;
  if (sxx == syy) {
    result.rho = static_cast<double>(static_cast<long double>(sxy) / static_cast<long double>(sxx));
  } else {
    result.rho = static_cast<double>(static_cast<long double>(sxy) /
                                     std::sqrt(static_cast<long double>(sxx) *
                                               static_cast<long double>(syy)));
  }
  result.rho = std::clamp(result.rho, -1.0, 1.0);

  if (n > kExactLimit) {
    result.method = PMethod::t_approximation;
    result.p_value = t_approximation_p(result.rho, n, alternative);
    return result;
  }

  result.method = PMethod::exact_permutation;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  const Wide observed = sxy;
  std::uint64_t hits = 0, total = 0;
  do {
    Wide s = 0;
    for (std::size_t i = 0; i < n; ++i) s += static_cast<Wide>(a[i]) * b[perm[i]];
    const Wide c = wn * s - sa * sb;
    bool hit = false;
    switch (alternative) {
      case Alternative::two_sided: hit = (c < 0 ? -c : c) >= (observed < 0 ? -observed : observed); break;
      case Alternative::greater: hit = c >= observed; break;
      case Alternative::less: hit = c <= observed; break;
    }
    hits += hit ? 1 : 0;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  result.p_value = static_cast<double>(hits) / static_cast<double>(total);
  return result;
}

bool supports(int hypothesis, const CorrelationResult& result, double alpha) {
  if (result.p_value >= alpha) return false;
  return hypothesis == 1 ? result.rho < 0 : result.rho > 0;
}

namespace {

void check_hypothesis(int hypothesis) {
  if (hypothesis != 1 && hypothesis != 2) {
    throw Error("hypothesis must be 1 or 2, got " + std::to_string(hypothesis));
  }
}

}  // namespace

HypothesisReport summarize_precomputed(int hypothesis, std::vector<HypothesisRow> rows) {
  check_hypothesis(hypothesis);
  if (rows.empty()) throw EmptyInput("no correlation sets");
  HypothesisReport report;
  report.hypothesis = hypothesis;
  double sum_rho = 0.0, sum_p = 0.0;
  for (auto& row : rows) {
    row.supported = supports(hypothesis, row.result);
    report.any_supported = report.any_supported || row.supported;
    sum_rho += row.result.rho;
    sum_p += row.result.p_value;
  }
  report.mean_rho = sum_rho / static_cast<double>(rows.size());
  report.mean_p = sum_p / static_cast<double>(rows.size());
  report.rows = std::move(rows);
  return report;
}

HypothesisReport hypothesis_analysis(int hypothesis, std::span<const SampleSet> sets,
                                     Alternative alternative) {
  check_hypothesis(hypothesis);
  std::vector<HypothesisRow> rows;
  for (const auto& set : sets) {
    rows.push_back(HypothesisRow{set.id, spearman(set.x, set.y, alternative), false});
  }
  return summarize_precomputed(hypothesis, std::move(rows));
}

HypothesisReport hypothesis_I_analysis(std::span<const SampleSet> sets) {
  return hypothesis_analysis(1, sets);
}

HypothesisReport hypothesis_II_analysis(std::span<const SampleSet> sets) {
  return hypothesis_analysis(2, sets);
}

HypothesisRow hypothesis_II_analysis(std::span<const double> magnitudes,
                                     std::span<const double> severities, Alternative alternative) {
  HypothesisRow row{"", spearman(magnitudes, severities, alternative), false};
  row.supported = supports(2, row.result);
  return row;
}

namespace {

std::vector<std::vector<std::string>> csv_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.emplace_back();
    rows.push_back(std::move(fields));
  }
  return rows;
}

double number(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw SchemaError("line " + std::to_string(line) + ": '" + text + "' is not a number");
  }
}

std::string header_of(std::string_view text) {
  const auto rows = csv_rows(text);
  if (rows.empty()) return {};
  std::string out;
  for (const auto& f : rows.front()) out += (out.empty() ? "" : ",") + f;
  return out;
}

}  // namespace

bool is_precomputed_csv(std::string_view text) { return header_of(text) == "set_id,rho,p"; }

std::vector<SampleSet> parse_sample_csv(std::string_view text) {
  const auto rows = csv_rows(text);
  if (rows.empty() || header_of(text) != "set_id,x,y") {
    throw SchemaError("expected header 'set_id,x,y'");
  }
  std::vector<SampleSet> sets;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 3) throw SchemaError("line " + std::to_string(i + 1) + ": expected 3 fields");
    auto [it, fresh] = index.try_emplace(row[0], sets.size());
    if (fresh) sets.push_back(SampleSet{row[0], {}, {}});
    sets[it->second].x.push_back(number(row[1], i + 1));
    sets[it->second].y.push_back(number(row[2], i + 1));
  }
  if (sets.empty()) throw EmptyInput("no samples");
  return sets;
}

std::vector<HypothesisRow> parse_precomputed_csv(std::string_view text) {
  const auto rows = csv_rows(text);
  if (rows.empty() || !is_precomputed_csv(text)) throw SchemaError("expected header 'set_id,rho,p'");
  std::vector<HypothesisRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 3) throw SchemaError("line " + std::to_string(i + 1) + ": expected 3 fields");
    HypothesisRow entry;
    entry.set_id = row[0];
    entry.result.rho = number(row[1], i + 1);
    entry.result.p_value = number(row[2], i + 1);
    if (entry.result.rho < -1 || entry.result.rho > 1 || entry.result.p_value < 0 ||
        entry.result.p_value > 1) {
      throw RangeError("line " + std::to_string(i + 1) + ": rho or p out of range");
    }
    out.push_back(std::move(entry));
  }
  if (out.empty()) throw EmptyInput("no correlation sets");
  return out;
}

namespace {

std::string fixed2(double value) {
  std::string out = format_fixed(Rational(value), 2);
  return out == "-0.00" ? "0.00" : out;
}

}  // namespace

std::string hypothesis_table(const HypothesisReport& report) {
  std::ostringstream out;
  out << "hypothesis " << (report.hypothesis == 1 ? "I" : "II") << "\n";
  std::size_t width = 3;
  for (const auto& row : report.rows) width = std::max(width, row.set_id.size());
  auto line = [&](const std::string& label, double rho, double p, const std::string& tail) {
    out << "Set " << label << std::string(width - label.size(), ' ') << "  rho: "
        << (rho < 0 ? "" : " ") << fixed2(rho) << "  p: " << fixed2(p) << tail << "\n";
  };
  for (const auto& row : report.rows) {
    line(row.set_id, row.result.rho, row.result.p_value, row.supported ? "  supported" : "");
  }
  out << "Avg" << std::string(width + 1, ' ') << "  rho: " << (report.mean_rho < 0 ? "" : " ")
      << fixed2(report.mean_rho) << "  p: " << fixed2(report.mean_p) << "\n";
  out << (report.any_supported ? "supported by at least one set\n" : "not supported\n");
  return out.str();
}

std::string hypothesis_machine(const HypothesisReport& report) {
  std::ostringstream out;
  for (const auto& row : report.rows) {
    nlohmann::json doc{{"type", "set"},
                       {"hypothesis", report.hypothesis},
                       {"set_id", row.set_id},
                       {"rho", row.result.rho},
                       {"p", row.result.p_value},
                       {"n", row.result.n},
                       {"method", to_string(row.result.method)},
                       {"supported", row.supported}};
    out << doc.dump() << "\n";
  }
  nlohmann::json avg{{"type", "average"},
                     {"hypothesis", report.hypothesis},
                     {"rho", report.mean_rho},
                     {"p", report.mean_p},
                     {"supported", report.any_supported}};
  out << avg.dump() << "\n";
  return out.str();
}

}  // namespace skillshift
