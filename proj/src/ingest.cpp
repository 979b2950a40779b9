#include "skillshift/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skillshift/errors.hpp"
#include "skillshift/hashing.hpp"

namespace skillshift {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const fs::path& path, std::string_view content, bool force) {
  if (!force && fs::exists(path)) {
    throw Error(path.string() + " exists; pass --force to overwrite");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

SceneProblem load_problem_file(const fs::path& path) {
  return parse_problem(read_text_file(path));
}

const OperatorSpec* SkillRegistry::find(std::string_view name) const {
  for (const auto& op : operators) {
    if (op.name == name) return &op;
  }
  return nullptr;
}

std::vector<OperatorSpec> SkillRegistry::protected_ops() const {
  std::vector<OperatorSpec> out;
  for (const auto& name : protected_names) out.push_back(*find(name));
  return out;
}

namespace {

json parse_json(std::string_view text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& err) {
    throw SchemaError(origin + ": " + err.what());
  }
}

}  // namespace

SkillRegistry skill_registry_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("operators") || !doc["operators"].is_array()) {
    throw SchemaError("skill registry needs an \"operators\" list");
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != "operators" && key != "protected") {
      throw SchemaError("unknown skill registry key '" + key + "'");
    }
  }
  SkillRegistry registry;
  std::set<std::string> names;
  for (const auto& entry : doc["operators"]) {
    OperatorSpec op = operator_from_json(entry);
    if (!names.insert(op.name).second) throw SchemaError("duplicate operator '" + op.name + "'");
    registry.operators.push_back(std::move(op));
  }
  if (doc.contains("protected")) {
    for (const auto& name : doc["protected"].get<std::vector<std::string>>()) {
      if (!registry.find(name)) throw UnknownOperator("protected operator '" + name + "' not defined");
      registry.protected_names.push_back(name);
    }
  } else {
    for (const auto& op : registry.operators) registry.protected_names.push_back(op.name);
  }
  return registry;
}

SkillRegistry load_skill_registry(const fs::path& path) {
  try {
    return skill_registry_from_json(parse_json(read_text_file(path), path.string()));
  } catch (const json::exception& err) {
    throw SchemaError(path.string() + ": " + err.what());
  }
}

SkillRegistry registry_for_problem(const fs::path& skills, const std::string& problem_name) {
  if (fs::is_directory(skills)) {
    const fs::path file = skills / (problem_name + ".json");
    if (!fs::exists(file)) throw Error("no skill registry " + file.string());
    return load_skill_registry(file);
  }
  return load_skill_registry(skills);
}

ObjectCatalog load_catalog(const fs::path& path) {
  try {
    return ObjectCatalog::from_json(parse_json(read_text_file(path), path.string()));
  } catch (const json::exception& err) {
    throw SchemaError(path.string() + ": " + err.what());
  }
}

std::vector<fs::path> problem_files(const fs::path& path) {
  if (!fs::is_directory(path)) {
    if (!fs::exists(path)) throw Error("no such problem file " + path.string());
    return {path};
  }
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(path)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".problem" || ext == ".pddl")) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw EmptyInput("no problem files in " + path.string());
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(LogSchema schema) {
  switch (schema) {
    case LogSchema::episode: return "episode";
    case LogSchema::aggregate: return "aggregate";
    case LogSchema::fixture: return "fixture";
    case LogSchema::summary: return "summary";
  }
  return "?";
}

namespace {

struct CsvLine {
  std::size_t number;
  std::vector<std::string> fields;
};

std::vector<CsvLine> split_csv(std::string_view text) {
  std::vector<CsvLine> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    start = end + 1;
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.find('"') != std::string::npos) {
      throw SchemaError("line " + std::to_string(number) + ": quoted fields are not supported");
    }
    CsvLine row{number, {}};
    std::size_t from = 0;
    while (true) {
      const std::size_t comma = line.find(',', from);
      row.fields.push_back(line.substr(from, comma - from));
      if (comma == std::string::npos) break;
      from = comma + 1;
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string where(const CsvLine& line) { return "line " + std::to_string(line.number) + ": "; }

long long integer(const CsvLine& line, const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const long long value = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw SchemaError(where(line) + what + " '" + text + "' is not an integer");
  }
}

Rational rational(const CsvLine& line, const std::string& text, const char* what) {
  try {
    return parse_rational(text);
  } catch (const std::invalid_argument&) {
    throw SchemaError(where(line) + what + " '" + text + "' is not a number");
  }
}

Rational unit_rate(const CsvLine& line, const std::string& text, const char* what) {
  Rational value = rational(line, text, what);
  if (value < 0 || value > 1) throw RangeError(where(line) + what + " " + text + " outside [0, 1]");
  return value;
}

ConditionKey condition_key(const CsvLine& line) {
  ConditionKey key{line.fields[0], line.fields[1], line.fields[2],
                   static_cast<int>(integer(line, line.fields[3], "k_mods"))};
  if (key.baseline.empty() || key.task_id.empty()) throw SchemaError(where(line) + "empty id");
  if (key.condition == "ori") {
    if (key.k_mods != 0) throw SchemaError(where(line) + "ori rows must have k_mods 0");
  } else if (key.condition == "mod") {
    if (key.k_mods < 1) throw SchemaError(where(line) + "mod rows need k_mods >= 1");
  } else if (key.condition == "chain") {
    if (key.k_mods != 0) throw SchemaError(where(line) + "chain rows must have k_mods 0");
  } else {
    throw SchemaError(where(line) + "unknown condition '" + key.condition + "'");
  }
  return key;
}

}  // namespace

EvalLog parse_eval_log(std::string_view text) {
  const auto lines = split_csv(text);
  if (lines.empty()) throw SchemaError("empty evaluation log");
  std::string header;
  for (const auto& f : lines.front().fields) header += (header.empty() ? "" : ",") + f;

  EvalLog log;
  std::size_t width = 0;
  if (header == kEpisodeHeader) {
    log.schema = LogSchema::episode;
    width = 6;
  } else if (header == kAggregateHeader) {
    log.schema = LogSchema::aggregate;
    width = 6;
  } else if (header == kFixtureHeader) {
    log.schema = LogSchema::fixture;
    width = 5;
  } else if (header == kSummaryHeader) {
    log.schema = LogSchema::summary;
    width = 4;
  } else {
    throw SchemaError("unrecognized log header '" + header + "'");
  }

  std::set<std::pair<ConditionKey, long long>> episodes_seen;
  std::set<std::pair<std::string, std::string>> fixture_seen;
  std::set<std::pair<std::string, int>> summary_seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const CsvLine& line = lines[i];
    if (line.fields.size() != width) {
      throw SchemaError(where(line) + "expected " + std::to_string(width) + " fields, found " +
                        std::to_string(line.fields.size()));
    }
    switch (log.schema) {
      case LogSchema::episode: {
        const ConditionKey key = condition_key(line);
        const long long episode = integer(line, line.fields[4], "episode_id");
        if (!episodes_seen.insert({key, episode}).second) {
          throw SchemaError(where(line) + "duplicate episode " + std::to_string(episode) +
                            " for task " + key.task_id);
        }
        const std::string& s = line.fields[5];
        bool success = false;
        if (s == "1" || s == "true") {
          success = true;
        } else if (s != "0" && s != "false") {
          throw RangeError(where(line) + "success must be 0 or 1, found '" + s + "'");
        }
        Counts& counts = log.counts[key];
        counts.episodes += 1;
        counts.successes += success ? 1 : 0;
        break;
      }
      case LogSchema::aggregate: {
        const ConditionKey key = condition_key(line);
        const long long successes = integer(line, line.fields[4], "successes");
        const long long episodes = integer(line, line.fields[5], "episodes");
        if (episodes <= 0 || successes < 0 || successes > episodes) {
          throw RangeError(where(line) + "need 0 <= successes <= episodes and episodes > 0");
        }
        if (log.counts.contains(key)) {
          throw SchemaError(where(line) + "duplicate row for task " + key.task_id);
        }
        log.counts[key] = Counts{successes, episodes};
        break;
      }
      case LogSchema::fixture: {
        FixtureRow row{line.fields[0], line.fields[1], unit_rate(line, line.fields[2], "sr_ori"),
                       unit_rate(line, line.fields[3], "sr_mod"),
                       rational(line, line.fields[4], "rpd_paper")};
        if (!fixture_seen.insert({row.baseline, row.task_id}).second) {
          throw SchemaError(where(line) + "duplicate row for task " + row.task_id);
        }
        log.fixture.push_back(std::move(row));
        break;
      }
      case LogSchema::summary: {
        SummaryCell cell;
        cell.baseline = line.fields[0];
        cell.k_mods = static_cast<int>(integer(line, line.fields[1], "k_mods"));
        if (cell.k_mods < 0) throw RangeError(where(line) + "negative k_mods");
        cell.avg_sr = unit_rate(line, line.fields[2], "avg_sr");
        if (!line.fields[3].empty()) cell.avg_rpd = rational(line, line.fields[3], "avg_rpd");
        if (!summary_seen.insert({cell.baseline, cell.k_mods}).second) {
          throw SchemaError(where(line) + "duplicate summary cell");
        }
        log.summary.push_back(std::move(cell));
        break;
      }
    }
  }
  return log;
}

EvalLog load_eval_log(const fs::path& path) {
  try {
    return parse_eval_log(read_text_file(path));
  } catch (const SchemaError& err) {
    throw SchemaError(path.string() + ": " + err.what());
  } catch (const RangeError& err) {
    throw RangeError(path.string() + ": " + err.what());
  }
}

void merge_into(AggregateLog& into, const AggregateLog& other) {
  for (const auto& [key, counts] : other) {
    Counts& target = into[key];
    target.successes += counts.successes;
    target.episodes += counts.episodes;
  }
}

std::vector<ConditionRate> condition_rates(const AggregateLog& log) {
  std::vector<ConditionRate> out;
  for (const auto& [key, counts] : log) {
    out.push_back(ConditionRate{key.baseline, key.task_id, key.condition, key.k_mods,
                                SuccessRate::from_counts(counts.successes, counts.episodes)});
  }
  return out;
}

std::vector<TaskPairResult> fixture_pairs(std::span<const FixtureRow> rows) {
  std::vector<TaskPairResult> out;
  for (const auto& row : rows) {
    out.push_back(TaskPairResult{row.baseline, row.task_id, SuccessRate::from_rate(row.sr_ori),
                                 SuccessRate::from_rate(row.sr_mod), 1});
  }
  return out;
}

std::string write_fixture_table(std::span<const FixtureRow> rows) {
  std::string out = std::string(kFixtureHeader) + "\n";
  for (const auto& r : rows) {
    out += r.baseline + "," + r.task_id + "," + format_fixed(r.sr_ori, 2) + "," +
           format_fixed(r.sr_mod, 2) + "," + format_fixed(r.rpd_paper, 2) + "\n";
  }
  return out;
}

std::string write_summary_table(std::span<const SummaryCell> cells) {
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const auto& c : cells) {
    out += c.baseline + "," + std::to_string(c.k_mods) + "," + format_fixed(c.avg_sr, 2) + "," +
           (c.avg_rpd ? format_fixed(*c.avg_rpd, 2) : std::string()) + "\n";
  }
  return out;
}

std::string write_aggregate_log(const AggregateLog& log) {
  std::string out = std::string(kAggregateHeader) + "\n";
  for (const auto& [key, counts] : log) {
    out += key.baseline + "," + key.task_id + "," + key.condition + "," +
           std::to_string(key.k_mods) + "," + std::to_string(counts.successes) + "," +
           std::to_string(counts.episodes) + "\n";
  }
  return out;
}

std::string checksum_line(const fs::path& path) {
  return sha256_hex(read_text_file(path)) + "  " + path.filename().string() + "\n";
}

bool verify_checksum(const fs::path& path) {
  fs::path sidecar = path;
  sidecar += ".sha256";
  if (!fs::exists(sidecar)) throw Error("missing checksum file " + sidecar.string());
  const std::string recorded = read_text_file(sidecar);
  const auto space = recorded.find(' ');
  if (space != 64) throw Error("malformed checksum file " + sidecar.string());
  return recorded.substr(0, 64) == sha256_hex(read_text_file(path));
}

// ---------------------------------------------------------------------------

std::string_view to_string(ReplayStatus status) {
  switch (status) {
    case ReplayStatus::ok: return "ok";
    case ReplayStatus::failed: return "failed";
    case ReplayStatus::pending: return "pending";
  }
  return "?";
}

AugmentationManifest build_augmentation_manifest(std::span<const VariantRef> variants,
                                                 const std::map<std::string, int>& demos,
                                                 const ReplayResults* replay) {
  AugmentationManifest manifest;
  std::vector<VariantRef> ordered(variants.begin(), variants.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return std::tie(a.base_task, a.variant_id) < std::tie(b.base_task, b.variant_id);
  });
  for (const auto& variant : ordered) {
    auto it = demos.find(variant.base_task);
    if (it == demos.end()) {
      throw MissingBase("variant " + variant.variant_id + ": base task '" + variant.base_task +
                        "' has no demonstrations");
    }
    for (int demo = 0; demo < it->second; ++demo) {
      ReplayStatus status = ReplayStatus::pending;
      if (replay) {
        if (auto r = replay->find({variant.variant_id, demo}); r != replay->end()) status = r->second;
      }
      manifest.entries.push_back(ManifestEntry{variant.base_task, variant.variant_id, demo, status});
      ++manifest.attempted;
      switch (status) {
        case ReplayStatus::ok: ++manifest.retained; break;
        case ReplayStatus::failed: ++manifest.failed; break;
        case ReplayStatus::pending: ++manifest.pending; break;
      }
    }
  }
  return manifest;
}

ReplayResults parse_replay_results(std::string_view text) {
  const auto lines = split_csv(text);
  if (lines.empty()) throw SchemaError("empty replay results");
  std::string header;
  for (const auto& f : lines.front().fields) header += (header.empty() ? "" : ",") + f;
  if (header != "variant_id,demo_id,status") {
    throw SchemaError("expected header 'variant_id,demo_id,status', found '" + header + "'");
  }
  ReplayResults out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const CsvLine& line = lines[i];
    if (line.fields.size() != 3) throw SchemaError(where(line) + "expected 3 fields");
    const int demo = static_cast<int>(integer(line, line.fields[1], "demo_id"));
    ReplayStatus status;
    if (line.fields[2] == "ok") {
      status = ReplayStatus::ok;
    } else if (line.fields[2] == "failed") {
      status = ReplayStatus::failed;
    } else if (line.fields[2] == "pending") {
      status = ReplayStatus::pending;
    } else {
      throw SchemaError(where(line) + "unknown status '" + line.fields[2] + "'");
    }
    if (!out.emplace(std::make_pair(line.fields[0], demo), status).second) {
      throw SchemaError(where(line) + "duplicate replay result");
    }
  }
  return out;
}

std::map<std::string, int> demos_from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("demos map must be an object");
  std::map<std::string, int> out;
  for (const auto& [task, count] : doc.items()) {
    if (!count.is_number_integer() || count.get<int>() < 0) {
      throw SchemaError("demo count for '" + task + "' must be a non-negative integer");
    }
    out[task] = count.get<int>();
  }
  return out;
}

std::vector<VariantRef> load_variant_refs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<VariantRef> out;
  for (const auto& file : files) {
    const json doc = parse_json(read_text_file(file), file.string());
    if (!doc.is_object() || !doc.contains("base_problem")) {
      throw SchemaError(file.string() + ": not a variant manifest");
    }
    out.push_back(VariantRef{file.stem().string(), doc["base_problem"].get<std::string>()});
  }
  return out;
}

json to_json(const AugmentationManifest& manifest) {
  json out;
  out["entries"] = json::array();
  for (const auto& e : manifest.entries) {
    out["entries"].push_back({{"base_task", e.base_task},
                              {"variant_id", e.variant_id},
                              {"demo_id", e.demo_id},
                              {"status", to_string(e.status)}});
  }
  out["totals"] = {{"attempted", manifest.attempted},
                   {"retained", manifest.retained},
                   {"failed", manifest.failed},
                   {"pending", manifest.pending}};
  return out;
}

}  // namespace skillshift
