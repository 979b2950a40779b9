#include "skillshift/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skillshift/errors.hpp"

namespace skillshift {

using nlohmann::json;

SuccessRate SuccessRate::from_counts(long long successes, long long episodes) {
  if (episodes <= 0) throw RangeError("episode count must be positive");
  if (successes < 0 || successes > episodes) {
    throw RangeError("successes " + std::to_string(successes) + " outside 0.." +
                     std::to_string(episodes));
  }
  return SuccessRate{successes, episodes, Rational(successes, episodes)};
}

SuccessRate SuccessRate::from_rate(Rational rate) {
  if (rate < 0 || rate > 1) throw RangeError("success rate " + format_exact(rate) + " outside [0, 1]");
  return SuccessRate{std::nullopt, std::nullopt, std::move(rate)};
}

Rational rpd(const Rational& sr_ori, const Rational& sr_mod) {
  if (sr_ori == 0) return Rational(0);
  return (sr_ori - sr_mod) / sr_ori;
}

Rational rpd(const SuccessRate& sr_ori, const SuccessRate& sr_mod) {
  return rpd(sr_ori.rate, sr_mod.rate);
}

Rational rpd(const TaskPairResult& pair) { return rpd(pair.sr_ori, pair.sr_mod); }

Rational occurrence_ratio(std::span<const TaskPairResult> results) {
  if (results.empty()) throw EmptyInput("occurrence ratio of no results");
  CellAggregate cell;
  for (const auto& r : results) cell.add(r);
  return cell.occurrence_ratio();
}

std::optional<Rational> avg_positive_rpd(std::span<const TaskPairResult> results) {
  if (results.empty()) throw EmptyInput("average RPD of no results");
  CellAggregate cell;
  for (const auto& r : results) cell.add(r);
  return cell.avg_positive_rpd();
}

Rational chain_upper_bound(std::span<const SuccessRate> srs) {
  if (srs.empty()) throw EmptyInput("upper bound of an empty chain");
  Rational product(1);
  for (const auto& sr : srs) product *= sr.rate;
  return product;
}

Rational dubr(const Rational& ub, const SuccessRate& sr_chain) {
  if (ub == 0) return Rational(0);
  return (ub - sr_chain.rate) / ub;
}

std::string_view to_string(Challenge challenge) {
  switch (challenge) {
    case Challenge::C1: return "c1";
    case Challenge::C2: return "c2";
    case Challenge::C3: return "c3";
  }
  return "?";
}

std::optional<Challenge> challenge_from_string(std::string_view text) {
  if (text == "c1" || text == "C1") return Challenge::C1;
  if (text == "c2" || text == "C2") return Challenge::C2;
  if (text == "c3" || text == "C3") return Challenge::C3;
  return std::nullopt;
}

std::vector<TaskPairResult> pair_conditions(std::span<const ConditionRate> rates) {
  std::map<std::pair<std::string, std::string>, const ConditionRate*> ori;
  for (const auto& r : rates) {
    if (r.condition == "ori") ori[{r.baseline, r.task_id}] = &r;
  }
  std::vector<TaskPairResult> out;
  for (const auto& r : rates) {
    if (r.condition != "mod") continue;
    auto it = ori.find({r.baseline, r.task_id});
    if (it == ori.end()) {
      throw MissingCondition("task " + r.task_id + " of " + r.baseline + " (k=" +
                             std::to_string(r.k_mods) + ") has no original run");
    }
    out.push_back(TaskPairResult{r.baseline, r.task_id, it->second->rate, r.rate, r.k_mods});
  }
  return out;
}

std::vector<ChainRecord> collect_chains(std::span<const ConditionRate> rates) {
  std::map<std::pair<std::string, std::string>, const ConditionRate*> ori;
  for (const auto& r : rates) {
    if (r.condition == "ori") ori[{r.baseline, r.task_id}] = &r;
  }
  std::vector<ChainRecord> out;
  for (const auto& r : rates) {
    if (r.condition != "chain") continue;
    ChainRecord record{r.baseline, r.task_id, {}, r.rate};
    for (std::size_t step = 0;; ++step) {
      auto it = ori.find({r.baseline, r.task_id + ":" + std::to_string(step)});
      if (it == ori.end()) break;
      record.skill_srs.push_back(it->second->rate);
    }
    if (record.skill_srs.empty()) {
      throw MissingCondition("chain " + r.task_id + " of " + r.baseline +
                             " has no per-skill original runs (" + r.task_id + ":0, ...)");
    }
    out.push_back(std::move(record));
  }
  return out;
}

void CellAggregate::add(const TaskPairResult& pair) {
  ++n_tasks;
  sum_sr_ori += pair.sr_ori.rate;
  sum_sr_mod += pair.sr_mod.rate;
  const Rational value = rpd(pair);
  if (value > 0) {
    ++n_positive;
    sum_positive_rpd += value;
  }
}

void CellAggregate::merge(const CellAggregate& other) {
  n_tasks += other.n_tasks;
  n_positive += other.n_positive;
  sum_sr_ori += other.sum_sr_ori;
  sum_sr_mod += other.sum_sr_mod;
  sum_positive_rpd += other.sum_positive_rpd;
}

Rational CellAggregate::avg_sr_ori() const {
  if (n_tasks == 0) throw EmptyInput("empty cell");
  return sum_sr_ori / Rational(n_tasks);
}

Rational CellAggregate::avg_sr_mod() const {
  if (n_tasks == 0) throw EmptyInput("empty cell");
  return sum_sr_mod / Rational(n_tasks);
}

Rational CellAggregate::occurrence_ratio() const {
  if (n_tasks == 0) throw EmptyInput("empty cell");
  return Rational(n_positive, n_tasks);
}

std::optional<Rational> CellAggregate::avg_positive_rpd() const {
  if (n_positive == 0) return std::nullopt;
  return sum_positive_rpd / Rational(n_positive);
}

namespace {

// Numeric task ids order numerically, everything else lexically.
bool task_id_less(const std::string& a, const std::string& b) {
  auto numeric = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (numeric(a) && numeric(b) && a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

bool point_less(const ScatterPoint& a, const ScatterPoint& b) {
  if (a.baseline != b.baseline) return a.baseline < b.baseline;
  if (a.k_mods != b.k_mods) return a.k_mods < b.k_mods;
  return task_id_less(a.task_id, b.task_id);
}

}  // namespace

void MetricsReport::merge(const MetricsReport& other) {
  per_task.insert(per_task.end(), other.per_task.begin(), other.per_task.end());
  std::sort(per_task.begin(), per_task.end(), point_less);
  for (const auto& [key, cell] : other.cells) cells[key].merge(cell);
  chains.insert(chains.end(), other.chains.begin(), other.chains.end());
  std::sort(chains.begin(), chains.end(), [](const auto& a, const auto& b) {
    return std::tie(a.baseline, a.chain_id) < std::tie(b.baseline, b.chain_id);
  });
  for (const auto& [key, cell] : other.summaries) summaries.insert_or_assign(key, cell);
}

MetricsReport challenge_report(std::span<const TaskPairResult> pairs,
                               std::span<const ChainRecord> chains, Challenge challenge,
                               std::span<const SummaryCell> summaries) {
  MetricsReport report;
  report.challenge = challenge;
  if (challenge != Challenge::C3) {
    for (const auto& pair : pairs) {
      if (challenge == Challenge::C1 && pair.k_mods != 1) continue;
      if (pair.k_mods < 1) continue;
      report.per_task.push_back(ScatterPoint{pair.baseline, pair.k_mods, pair.task_id,
                                             pair.sr_ori.rate, pair.sr_mod.rate, rpd(pair)});
      report.cells[{pair.baseline, pair.k_mods}].add(pair);
    }
    std::sort(report.per_task.begin(), report.per_task.end(), point_less);
    for (const auto& cell : summaries) report.summaries[{cell.baseline, cell.k_mods}] = cell;
  } else {
    for (const auto& chain : chains) {
      const Rational ub = chain_upper_bound(chain.skill_srs);
      report.chains.push_back(
          ChainMetrics{chain.baseline, chain.chain_id, ub, chain.chain_sr.rate, dubr(ub, chain.chain_sr)});
    }
    std::sort(report.chains.begin(), report.chains.end(), [](const auto& a, const auto& b) {
      return std::tie(a.baseline, a.chain_id) < std::tie(b.baseline, b.chain_id);
    });
  }
  if (report.per_task.empty() && report.chains.empty() && report.summaries.empty()) {
    throw EmptyInput("no records for challenge " + std::string(to_string(challenge)));
  }
  return report;
}

MetricsReport challenge_report(std::span<const ConditionRate> rates, Challenge challenge,
                               std::span<const SummaryCell> summaries) {
  if (challenge == Challenge::C3) {
    const auto chains = collect_chains(rates);
    return challenge_report({}, chains, challenge, summaries);
  }
  const auto pairs = pair_conditions(rates);
  return challenge_report(pairs, {}, challenge, summaries);
}

std::optional<Rational> cross_baseline_mean_rpd(const MetricsReport& report, int k) {
  std::map<std::string, Rational> per_baseline;
  for (const auto& [key, cell] : report.summaries) {
    if (key.second == k && cell.avg_rpd) per_baseline[key.first] = *cell.avg_rpd;
  }
  for (const auto& [key, cell] : report.cells) {
    if (key.second != k) continue;
    if (auto value = cell.avg_positive_rpd()) per_baseline[key.first] = *value;
  }
  if (per_baseline.empty()) return std::nullopt;
  Rational sum;
  for (const auto& [name, value] : per_baseline) sum += value;
  return sum / Rational(per_baseline.size());
}

namespace {

std::string fixed2(const std::optional<Rational>& value) {
  return value ? format_fixed(*value, 2) : "-";
}

std::string aligned(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()));
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) line += "  ";
      line += row[i];
      if (i + 1 < row.size()) line.append(width[i] - row[i].size(), ' ');
    }
    out << line << "\n";
  }
  return out.str();
}

json exact_and_rounded(const std::optional<Rational>& value) {
  if (!value) return nullptr;
  return json{{"exact", format_exact(*value)}, {"value", format_fixed(*value, 2)}};
}

}  // namespace

std::string report_to_text(const MetricsReport& report) {
  std::ostringstream out;
  out << "challenge " << to_string(report.challenge) << "\n";
  if (!report.cells.empty() || !report.summaries.empty()) {
    std::vector<std::vector<std::string>> rows{
        {"baseline", "k", "tasks", "sr_ori", "sr_mod", "occurrence", "avg_rpd", "source"}};
    std::set<CellKey> keys;
    for (const auto& [key, cell] : report.cells) keys.insert(key);
    for (const auto& [key, cell] : report.summaries) keys.insert(key);
    for (const auto& key : keys) {
      if (auto it = report.cells.find(key); it != report.cells.end()) {
        const auto& cell = it->second;
        rows.push_back({key.first, std::to_string(key.second), std::to_string(cell.n_tasks),
                        fixed2(cell.avg_sr_ori()), fixed2(cell.avg_sr_mod()),
                        fixed2(cell.occurrence_ratio()), fixed2(cell.avg_positive_rpd()),
                        "computed"});
      } else {
        const auto& cell = report.summaries.at(key);
        const bool original = key.second == 0;
        rows.push_back({key.first, std::to_string(key.second), "-",
                        original ? fixed2(cell.avg_sr) : "-", original ? "-" : fixed2(cell.avg_sr),
                        "-", fixed2(cell.avg_rpd), "summary"});
      }
    }
    out << aligned(rows);
  }
  if (!report.chains.empty()) {
    std::vector<std::vector<std::string>> rows{{"baseline", "chain", "upper_bound", "actual", "dubr"}};
    for (const auto& c : report.chains) {
      rows.push_back({c.baseline, c.chain_id, fixed2(c.upper_bound), fixed2(c.actual), fixed2(c.dubr)});
    }
    out << aligned(rows);
  }
  return out.str();
}

std::string report_to_machine(const MetricsReport& report) {
  std::ostringstream out;
  const std::string challenge(to_string(report.challenge));
  for (const auto& [key, cell] : report.cells) {
    json row{{"type", "cell"},
             {"challenge", challenge},
             {"baseline", key.first},
             {"k", key.second},
             {"tasks", cell.n_tasks},
             {"positive", cell.n_positive},
             {"avg_sr_ori", exact_and_rounded(cell.avg_sr_ori())},
             {"avg_sr_mod", exact_and_rounded(cell.avg_sr_mod())},
             {"occurrence_ratio", exact_and_rounded(cell.occurrence_ratio())},
             {"avg_positive_rpd", exact_and_rounded(cell.avg_positive_rpd())}};
    out << row.dump() << "\n";
  }
  for (const auto& [key, cell] : report.summaries) {
    json row{{"type", "summary"},
             {"challenge", challenge},
             {"baseline", key.first},
             {"k", key.second},
             {"avg_sr", exact_and_rounded(cell.avg_sr)},
             {"avg_rpd", exact_and_rounded(cell.avg_rpd)}};
    out << row.dump() << "\n";
  }
  for (const auto& p : report.per_task) {
    json row{{"type", "task"},
             {"challenge", challenge},
             {"baseline", p.baseline},
             {"k", p.k_mods},
             {"task_id", p.task_id},
             {"sr_ori", exact_and_rounded(p.sr_ori)},
             {"sr_mod", exact_and_rounded(p.sr_mod)},
             {"rpd", exact_and_rounded(p.rpd)}};
    out << row.dump() << "\n";
  }
  for (const auto& c : report.chains) {
    json row{{"type", "chain"},
             {"challenge", challenge},
             {"baseline", c.baseline},
             {"chain_id", c.chain_id},
             {"upper_bound", exact_and_rounded(c.upper_bound)},
             {"actual", exact_and_rounded(c.actual)},
             {"dubr", exact_and_rounded(c.dubr)}};
    out << row.dump() << "\n";
  }
  return out.str();
}

std::string scatter_csv(const MetricsReport& report, const std::string& baseline, int k) {
  std::string out = "task_id,sr_ori,sr_mod,rpd\n";
  for (const auto& p : report.per_task) {
    if (p.baseline != baseline || p.k_mods != k) continue;
    out += p.task_id + "," + format_fixed(p.sr_ori, 2) + "," + format_fixed(p.sr_mod, 2) + "," +
           format_fixed(p.rpd, 2) + "\n";
  }
  return out;
}

}  // namespace skillshift
