#include "skillshift/ramg.hpp"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "skillshift/errors.hpp"
#include "skillshift/hashing.hpp"

namespace skillshift {

using nlohmann::json;

std::string_view to_string(ModificationKind kind) {
  switch (kind) {
    case ModificationKind::AddObject: return "AddObject";
    case ModificationKind::MoveObject: return "MoveObject";
    case ModificationKind::ToggleFixture: return "ToggleFixture";
    case ModificationKind::PutIn: return "PutIn";
    case ModificationKind::TakeOut: return "TakeOut";
  }
  return "?";
}

std::optional<ModificationKind> modification_kind_from_string(std::string_view text) {
  for (auto kind : {ModificationKind::AddObject, ModificationKind::MoveObject,
                    ModificationKind::ToggleFixture, ModificationKind::PutIn,
                    ModificationKind::TakeOut}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::string Modification::params_key() const {
  std::string key = "target=" + target;
  if (!object_type.empty()) key += ";type=" + object_type;
  return key;
}

bool canonical_less(const Modification& lhs, const Modification& rhs) {
  if (lhs.kind != rhs.kind) return lhs.kind < rhs.kind;
  if (lhs.subject != rhs.subject) return lhs.subject < rhs.subject;
  return lhs.params_key() < rhs.params_key();
}

std::string describe(const Modification& mod) {
  std::string out = std::string(to_string(mod.kind)) + "(" + mod.subject;
  if (!mod.target.empty()) out += ", " + mod.target;
  if (!mod.object_type.empty()) out += ", type=" + mod.object_type;
  return out + ")";
}

// ---------------------------------------------------------------------------

ObjectCatalog::ObjectCatalog(std::vector<CatalogEntry> entries) : entries_(std::move(entries)) {
  std::set<std::string> types;
  for (const auto& entry : entries_) {
    if (!is_identifier(entry.type) || !is_identifier(entry.stem)) {
      throw ValidationError("catalog entry has invalid type or stem '" + entry.type + "'");
    }
    if (!types.insert(entry.type).second) {
      throw ValidationError("duplicate catalog type '" + entry.type + "'");
    }
    if (entry.allowed_region_kinds.empty()) {
      throw ValidationError("catalog type '" + entry.type + "' allows no region kinds");
    }
  }
}

ObjectCatalog ObjectCatalog::from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
    throw SchemaError("catalog must be an object with an 'entries' list");
  }
  std::vector<CatalogEntry> entries;
  for (const auto& item : doc["entries"]) {
    CatalogEntry entry;
    entry.type = item.at("type").get<std::string>();
    entry.stem = item.value("stem", entry.type);
    for (const auto& kind : item.at("allowed_region_kinds")) {
      const auto parsed = region_kind_from_string(kind.get<std::string>());
      if (!parsed) throw SchemaError("unknown region kind " + kind.dump());
      entry.allowed_region_kinds.push_back(*parsed);
    }
    entries.push_back(std::move(entry));
  }
  return ObjectCatalog(std::move(entries));
}

json ObjectCatalog::to_json() const {
  json out;
  out["entries"] = json::array();
  for (const auto& entry : entries_) {
    json kinds = json::array();
    for (auto kind : entry.allowed_region_kinds) kinds.push_back(std::string(to_string(kind)));
    out["entries"].push_back(
        {{"type", entry.type}, {"stem", entry.stem}, {"allowed_region_kinds", kinds}});
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Guard {
  AtomSet protected_atoms;
  std::set<std::string> protected_types;
  // Positive placement effects of protected operators, by destination region.
  std::map<std::string, AtomSet> pending;
  std::set<std::string> locked_groups;
};

Guard make_guard(const SceneProblem& problem, std::span<const OperatorSpec> protected_ops) {
  Guard guard;
  for (const OperatorSpec& op : protected_ops) {
    try {
      bind_operator(problem, op);
    } catch (const BindError& err) {
      throw UnboundOperator(err.what());
    }
    for (const Atom& atom : op.relevant_atoms()) {
      guard.protected_atoms.insert(atom);
      for (const auto& arg : atom.args) {
        if (const auto it = problem.objects.find(arg); it != problem.objects.end()) {
          guard.protected_types.insert(it->second);
        }
      }
    }
    for (const Literal& lit : op.eff) {
      if (!lit.positive || !is_placement(lit.atom)) continue;
      const Region* region = problem.occupied_region(lit.atom);
      if (region != nullptr && region->capacity) guard.pending[region->name].insert(lit.atom);
    }
  }
  return guard;
}

std::string fresh_name(const SceneProblem& problem, const std::string& stem) {
  for (int n = 1;; ++n) {
    std::string name = stem + "_" + std::to_string(n);
    if (!problem.is_entity(name) && !problem.regions.contains(name)) return name;
  }
}

struct Outcome {
  std::optional<IllegalModification> error;
  SceneProblem next;
};

Outcome check(const SceneProblem& problem, const Modification& mod, const Guard& guard) {
  auto fail = [](char rule, const std::string& detail) {
    return Outcome{IllegalModification(rule, detail), {}};
  };

  if (mod.introduced.empty() && mod.removed.empty()) return fail('b', "modification changes nothing");
  std::set<std::string> groups;
  for (const Atom& atom : mod.introduced) groups.insert(group_key(atom));
  for (const Atom& atom : mod.removed) groups.insert(group_key(atom));
  if (groups.size() != 1) return fail('b', "modification must change exactly one atom group");
  if (guard.locked_groups.contains(*groups.begin())) {
    return fail('b', "contradicts an earlier modification of the same atom group");
  }

  for (const AtomSet* atoms : {&mod.introduced, &mod.removed}) {
    for (const Atom& atom : *atoms) {
      if (guard.protected_atoms.contains(atom)) {
        return fail('a', to_string(atom) + " appears in a protected operator's Pre/Eff");
      }
    }
  }
  if (mod.kind == ModificationKind::AddObject && guard.protected_types.contains(mod.object_type)) {
    return fail('a', "type '" + mod.object_type + "' is used by a protected operator");
  }

  for (const Atom& atom : mod.introduced) {
    if (mod.removed.contains(atom)) return fail('b', to_string(atom) + " both introduced and removed");
  }

  SceneProblem next = problem;
  if (mod.kind == ModificationKind::AddObject) {
    if (!is_identifier(mod.subject) || problem.is_entity(mod.subject) ||
        problem.regions.contains(mod.subject) || !is_identifier(mod.object_type)) {
      return fail('b', "'" + mod.subject + "' is not a fresh object name");
    }
    next.objects.emplace(mod.subject, mod.object_type);
  }

  AtomSet atoms = problem.init.atoms();
  for (const Atom& atom : mod.removed) {
    if (atoms.erase(atom) == 0) return fail('b', to_string(atom) + " does not hold");
  }
  for (const Atom& atom : mod.introduced) {
    if (!atoms.insert(atom).second) return fail('b', to_string(atom) + " already holds");
  }
  next.init = SymbolicState(std::move(atoms));

  const auto violations = state_violations(next, next.init);
  for (const auto& violation : violations) {
    if (violation.kind == Violation::Kind::capacity) return fail('c', violation.message);
  }
  if (!violations.empty()) return fail('b', violations.front().message);

  for (const Atom& atom : mod.introduced) {
    if (!is_placement(atom)) continue;
    const Region* region = next.occupied_region(atom);
    const auto pending = region ? guard.pending.find(region->name) : guard.pending.end();
    if (pending == guard.pending.end()) continue;
    int occupants = 0;
    for (const Atom& held : next.init.atoms()) {
      const Region* occupied = is_placement(held) ? next.occupied_region(held) : nullptr;
      if (occupied != nullptr && occupied->name == region->name) ++occupants;
    }
    int outstanding = 0;
    for (const Atom& effect : pending->second) {
      if (!next.init.holds(effect)) ++outstanding;
    }
    if (occupants + outstanding > *region->capacity) {
      return fail('c', "region '" + region->name + "' must keep room for a protected effect");
    }
  }
  return Outcome{std::nullopt, std::move(next)};
}

std::vector<Modification> raw_candidates(const SceneProblem& problem,
                                         const ObjectCatalog& catalog) {
  std::vector<std::string> surfaces;
  std::vector<std::string> containers;
  for (const auto& [name, region] : problem.regions) {
    if (region.kind == RegionKind::container_interior) {
      containers.push_back(region.target);
    } else {
      surfaces.push_back(name);
    }
  }

  std::vector<Modification> out;
  for (const auto& entry : catalog.entries()) {
    const std::string name = fresh_name(problem, entry.stem);
    for (const auto& [region_name, region] : problem.regions) {
      if (std::find(entry.allowed_region_kinds.begin(), entry.allowed_region_kinds.end(),
                    region.kind) == entry.allowed_region_kinds.end()) {
        continue;
      }
      Modification mod{ModificationKind::AddObject, name, {}, entry.type, {}, {}};
      if (region.kind == RegionKind::container_interior) {
        mod.target = region.target;
        mod.introduced.insert(make_atom("In", {name, region.target}));
      } else {
        mod.target = region_name;
        mod.introduced.insert(make_atom("On", {name, region_name}));
      }
      out.push_back(std::move(mod));
    }
  }

  for (const Atom& placement : problem.init.atoms()) {
    if (!is_placement(placement)) continue;
    const std::string& movable = placement.args[0];
    if (placement.predicate == "On") {
      for (const auto& surface : surfaces) {
        if (surface == placement.args[1]) continue;
        out.push_back({ModificationKind::MoveObject, movable, surface, {},
                       {make_atom("On", {movable, surface})}, {placement}});
      }
      for (const auto& container : containers) {
        if (container == movable) continue;
        out.push_back({ModificationKind::PutIn, movable, container, {},
                       {make_atom("In", {movable, container})}, {placement}});
      }
    } else {
      for (const auto& surface : surfaces) {
        out.push_back({ModificationKind::TakeOut, movable, surface, {},
                       {make_atom("On", {movable, surface})}, {placement}});
      }
    }
  }

  auto toggle = [&](const std::string& subject, const char* predicate) {
    const Atom atom = make_atom(predicate, {subject});
    Modification mod{ModificationKind::ToggleFixture, subject, {}, {}, {}, {}};
    (problem.init.holds(atom) ? mod.removed : mod.introduced).insert(atom);
    out.push_back(std::move(mod));
  };
  for (const auto& [part, owner] : problem.fixture_parts) toggle(part, "Open");
  for (const auto& [name, fixture] : problem.fixtures) {
    if (fixture.switchable) toggle(name, "TurnedOn");
  }
  return out;
}

std::vector<Modification> legal_candidates(const SceneProblem& problem, const Guard& guard,
                                           const ObjectCatalog& catalog) {
  std::vector<Modification> out;
  for (Modification& mod : raw_candidates(problem, catalog)) {
    if (!check(problem, mod, guard).error) out.push_back(std::move(mod));
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

}  // namespace

std::vector<Modification> enumerate_candidates(const SceneProblem& problem,
                                               std::span<const OperatorSpec> protected_ops,
                                               const ObjectCatalog& catalog) {
  return legal_candidates(problem, make_guard(problem, protected_ops), catalog);
}

SceneProblem apply_modification(const SceneProblem& problem, const Modification& mod,
                                std::span<const OperatorSpec> protected_ops) {
  Outcome outcome = check(problem, mod, make_guard(problem, protected_ops));
  if (outcome.error) throw *outcome.error;
  return std::move(outcome.next);
}

std::vector<TaskVariant> sample_incremental(const SceneProblem& problem,
                                            std::span<const OperatorSpec> protected_ops,
                                            const ObjectCatalog& catalog, std::size_t k_max,
                                            std::uint64_t seed,
                                            const std::vector<std::uint64_t>& path) {
  if (k_max == 0) throw std::invalid_argument("modification count must be at least 1");
  const std::string base_id = content_id(problem);
  std::vector<TaskVariant> out;
  SceneProblem current = problem;
  std::vector<Modification> mods;
  std::set<std::string> locked;
  for (std::size_t round = 0; round < k_max; ++round) {
    Guard guard = make_guard(current, protected_ops);
    guard.locked_groups = locked;
    std::vector<Modification> candidates = legal_candidates(current, guard, catalog);
    if (candidates.empty()) throw NoCandidates(round);

    std::vector<std::uint64_t> round_path = path;
    round_path.push_back(round);
    const auto index = uniform_index(derive_seed(seed, round_path), candidates.size());
    Modification chosen = std::move(candidates[index]);

    Outcome outcome = check(current, chosen, guard);
    if (outcome.error) throw *outcome.error;
    current = std::move(outcome.next);
    locked.insert(group_key(chosen.introduced.empty() ? *chosen.removed.begin()
                                                      : *chosen.introduced.begin()));
    mods.push_back(std::move(chosen));
    out.push_back(TaskVariant{base_id, mods, current, SeedTrace{seed, path}});
  }
  return out;
}

TaskVariant sample_modifications(const SceneProblem& problem,
                                 std::span<const OperatorSpec> protected_ops,
                                 const ObjectCatalog& catalog, std::size_t k, std::uint64_t seed,
                                 const std::vector<std::uint64_t>& path) {
  return std::move(sample_incremental(problem, protected_ops, catalog, k, seed, path).back());
}

VariantCount enumerate_variant_count(std::span<const ProtectedProblem> problems,
                                     const ObjectCatalog& catalog) {
  VariantCount count;
  for (const auto& entry : problems) {
    const std::size_t n = enumerate_candidates(entry.problem, entry.protected_ops, catalog).size();
    count.per_problem.emplace_back(entry.problem.problem_name, n);
    count.total += n;
  }
  return count;
}

// ---------------------------------------------------------------------------

json to_json(const Modification& mod) {
  json out;
  out["kind"] = std::string(to_string(mod.kind));
  out["subject"] = mod.subject;
  out["target"] = mod.target;
  out["object_type"] = mod.object_type;
  out["introduced"] = json::array();
  for (const Atom& atom : mod.introduced) out["introduced"].push_back(to_json(atom));
  out["removed"] = json::array();
  for (const Atom& atom : mod.removed) out["removed"].push_back(to_json(atom));
  return out;
}

Modification modification_from_json(const json& doc) {
  Modification mod;
  const auto kind = modification_kind_from_string(doc.at("kind").get<std::string>());
  if (!kind) throw SchemaError("unknown modification kind " + doc.at("kind").dump());
  mod.kind = *kind;
  mod.subject = doc.at("subject").get<std::string>();
  mod.target = doc.value("target", "");
  mod.object_type = doc.value("object_type", "");
  auto read_atoms = [&](const char* key, AtomSet& into) {
    for (const auto& entry : doc.at(key)) {
      const Literal lit = literal_from_json(entry);
      if (!lit.positive) throw SchemaError("modification atoms must be positive");
      into.insert(lit.atom);
    }
  };
  read_atoms("introduced", mod.introduced);
  read_atoms("removed", mod.removed);
  return mod;
}

json variant_manifest(const TaskVariant& variant, const std::string& base_problem,
                      const std::string& result_path) {
  json out;
  out["base_id"] = variant.base_id;
  out["base_problem"] = base_problem;
  out["k"] = variant.modifications.size();
  out["seed"] = variant.seed_trace.master;
  out["seed_path"] = variant.seed_trace.path;
  out["modifications"] = json::array();
  for (const auto& mod : variant.modifications) out["modifications"].push_back(to_json(mod));
  out["result_problem"] = result_path;
  out["result_id"] = content_id(variant.result);
  return out;
}

}  // namespace skillshift
