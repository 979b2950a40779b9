#include "skillshift/pddl_model.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "skillshift/errors.hpp"

namespace skillshift {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::movable: return "movable";
    case Role::container: return "container";
    case Role::region: return "region";
    case Role::fixture_part: return "fixture_part";
    case Role::fixture: return "fixture";
  }
  return "?";
}

const std::vector<PredicateSymbol>& builtin_predicates() {
  static const std::vector<PredicateSymbol> kPredicates = {
      {"In", {Role::movable, Role::container}},
      {"On", {Role::movable, Role::region}},
      {"Open", {Role::fixture_part}},
      {"TurnedOn", {Role::fixture}},
  };
  return kPredicates;
}

const PredicateSymbol* find_predicate(std::string_view name) {
  for (const auto& symbol : builtin_predicates()) {
    if (symbol.name == name) return &symbol;
  }
  return nullptr;
}

bool is_identifier(std::string_view text) {
  if (text.empty() || !std::isalpha(static_cast<unsigned char>(text.front()))) return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

Atom make_atom(std::string predicate, std::vector<std::string> args) {
  return Atom{std::move(predicate), std::move(args)};
}

Literal pos(Atom atom) { return Literal{std::move(atom), true}; }
Literal neg(Atom atom) { return Literal{std::move(atom), false}; }

Literal negate(Literal lit) {
  lit.positive = !lit.positive;
  return lit;
}

std::string to_string(const Atom& atom) {
  std::string out = "(" + atom.predicate;
  for (const auto& arg : atom.args) out += " " + arg;
  return out + ")";
}

std::string to_string(const Literal& lit) {
  return lit.positive ? to_string(lit.atom) : "(not " + to_string(lit.atom) + ")";
}

bool is_placement(const Atom& atom) {
  return (atom.predicate == "On" || atom.predicate == "In") && !atom.args.empty();
}

std::string group_key(const Atom& atom) {
  if (is_placement(atom)) return "place:" + atom.args.front();
  return "atom:" + to_string(atom);
}

SymbolicState SymbolicState::with(const Atom& atom) const {
  AtomSet next = asserted_;
  next.insert(atom);
  return SymbolicState(std::move(next));
}

SymbolicState SymbolicState::without(const Atom& atom) const {
  AtomSet next = asserted_;
  next.erase(atom);
  return SymbolicState(std::move(next));
}

// ---------------------------------------------------------------------------

std::string_view to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::surface: return "surface";
    case RegionKind::slot: return "slot";
    case RegionKind::container_interior: return "container_interior";
  }
  return "?";
}

std::optional<RegionKind> region_kind_from_string(std::string_view text) {
  if (text == "surface") return RegionKind::surface;
  if (text == "slot") return RegionKind::slot;
  if (text == "container_interior") return RegionKind::container_interior;
  return std::nullopt;
}

std::optional<int> default_capacity(RegionKind kind) {
  if (kind == RegionKind::surface) return std::nullopt;
  return 1;
}

bool SceneProblem::is_entity(const std::string& name) const {
  return objects.contains(name) || fixtures.contains(name) || fixture_parts.contains(name);
}

bool SceneProblem::has_role(const std::string& name, Role role) const {
  switch (role) {
    case Role::movable: return objects.contains(name);
    case Role::container: return interior_of(name) != nullptr;
    case Role::region: {
      const auto it = regions.find(name);
      return it != regions.end() && it->second.kind != RegionKind::container_interior;
    }
    case Role::fixture_part: return fixture_parts.contains(name);
    case Role::fixture: return fixtures.contains(name);
  }
  return false;
}

const Region* SceneProblem::interior_of(const std::string& container) const {
  for (const auto& [name, region] : regions) {
    if (region.kind == RegionKind::container_interior && region.target == container) {
      return &region;
    }
  }
  return nullptr;
}

const Region* SceneProblem::occupied_region(const Atom& placement) const {
  if (placement.args.size() != 2) return nullptr;
  if (placement.predicate == "On") {
    const auto it = regions.find(placement.args[1]);
    return it == regions.end() ? nullptr : &it->second;
  }
  if (placement.predicate == "In") return interior_of(placement.args[1]);
  return nullptr;
}

std::size_t SceneProblem::entity_count() const {
  return objects.size() + fixtures.size() + fixture_parts.size();
}

// ---------------------------------------------------------------------------

void check_atom(const SceneProblem& problem, const Atom& atom) {
  const PredicateSymbol* symbol = find_predicate(atom.predicate);
  if (symbol == nullptr) {
    throw ValidationError("unknown predicate '" + atom.predicate + "'");
  }
  if (atom.args.size() != symbol->arity()) {
    throw ValidationError("arity mismatch in " + to_string(atom) + ": " + symbol->name +
                          " takes " + std::to_string(symbol->arity()) + " argument(s)");
  }
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    const std::string& arg = atom.args[i];
    const Role role = symbol->arg_roles[i];
    const bool known = role == Role::region ? problem.regions.contains(arg) || problem.is_entity(arg)
                                            : problem.is_entity(arg);
    if (!known) throw UnknownEntity(arg);
    if (!problem.has_role(arg, role)) {
      throw ValidationError("argument '" + arg + "' of " + to_string(atom) + " is not a " +
                            std::string(to_string(role)));
    }
  }
  if (atom.predicate == "TurnedOn" && !problem.fixtures.at(atom.args[0]).switchable) {
    throw ValidationError("fixture '" + atom.args[0] + "' is not switchable");
  }
  if (atom.predicate == "In" && atom.args[0] == atom.args[1]) {
    throw ValidationError("entity cannot contain itself: " + to_string(atom));
  }
}

std::vector<Violation> state_violations(const SceneProblem& problem,
                                        const SymbolicState& state) {
  std::vector<Violation> out;
  std::map<std::string, std::vector<const Atom*>> placements;
  std::map<std::string, int> occupancy;
  std::map<std::string, std::string> inside;  // movable -> container

  for (const Atom& atom : state.atoms()) {
    try {
      check_atom(problem, atom);
    } catch (const ValidationError& err) {
      out.push_back({Violation::Kind::typing, err.what()});
      continue;
    }
    if (!is_placement(atom)) continue;
    placements[atom.args[0]].push_back(&atom);
    if (const Region* region = problem.occupied_region(atom)) ++occupancy[region->name];
    if (atom.predicate == "In") inside[atom.args[0]] = atom.args[1];
  }

  for (const auto& [movable, type] : problem.objects) {
    const auto it = placements.find(movable);
    const std::size_t count = it == placements.end() ? 0 : it->second.size();
    if (count != 1) {
      out.push_back({Violation::Kind::exclusivity,
                     "placement exclusivity: '" + movable + "' has " + std::to_string(count) +
                         " placements"});
    }
  }

  for (const auto& [name, count] : occupancy) {
    const Region& region = problem.regions.at(name);
    if (region.capacity && count > *region.capacity) {
      out.push_back({Violation::Kind::capacity,
                     "capacity: region '" + name + "' holds " + std::to_string(count) +
                         " items, capacity " + std::to_string(*region.capacity)});
    }
  }

  for (const auto& [start, first] : inside) {
    std::string current = first;
    std::size_t steps = 0;
    while (steps <= inside.size()) {
      if (current == start) {
        out.push_back({Violation::Kind::containment, "containment cycle through '" + start + "'"});
        break;
      }
      const auto next = inside.find(current);
      if (next == inside.end()) break;
      current = next->second;
      ++steps;
    }
  }
  return out;
}

void validate_problem(const SceneProblem& problem) {
  if (!is_identifier(problem.problem_name)) {
    throw ValidationError("invalid problem name '" + problem.problem_name + "'");
  }
  if (!is_identifier(problem.domain_name)) {
    throw ValidationError("invalid domain name '" + problem.domain_name + "'");
  }

  std::set<std::string> names;
  auto declare = [&](const std::string& name, const std::string& type) {
    if (!is_identifier(name)) throw ValidationError("invalid entity name '" + name + "'");
    if (!is_identifier(type)) throw ValidationError("invalid type name '" + type + "'");
    if (!names.insert(name).second) throw ValidationError("duplicate name '" + name + "'");
  };
  for (const auto& [name, type] : problem.objects) declare(name, type);
  for (const auto& [name, fixture] : problem.fixtures) declare(name, fixture.type);
  for (const auto& [part, owner] : problem.fixture_parts) {
    declare(part, owner);
    if (!problem.fixtures.contains(owner)) {
      throw ValidationError("fixture part '" + part + "' names unknown fixture '" + owner + "'");
    }
  }

  std::set<std::string> interior_owners;
  for (const auto& [name, region] : problem.regions) {
    if (name != region.name) throw ValidationError("region key mismatch for '" + name + "'");
    if (!is_identifier(name)) throw ValidationError("invalid region name '" + name + "'");
    if (!names.insert(name).second) throw ValidationError("duplicate name '" + name + "'");
    if (region.capacity && *region.capacity < 1) {
      throw ValidationError("region '" + name + "' must have positive capacity");
    }
    if (!problem.is_entity(region.target)) throw UnknownEntity(region.target);
    if (region.kind == RegionKind::container_interior) {
      if (!interior_owners.insert(region.target).second) {
        throw ValidationError("container '" + region.target + "' owns more than one interior");
      }
    } else if (!problem.fixtures.contains(region.target) &&
               !problem.fixture_parts.contains(region.target)) {
      throw ValidationError("region '" + name + "' must target a fixture or fixture part");
    }
  }

  const auto violations = state_violations(problem, problem.init);
  if (!violations.empty()) throw ValidationError(":init " + violations.front().message);

  for (const Literal& lit : problem.goal) check_atom(problem, lit.atom);
}

std::vector<Atom> ground_vocabulary(const SceneProblem& problem) {
  std::vector<Atom> out;
  for (const auto& [movable, type] : problem.objects) {
    for (const auto& [name, region] : problem.regions) {
      if (region.kind == RegionKind::container_interior) {
        if (region.target != movable) out.push_back(make_atom("In", {movable, region.target}));
      } else {
        out.push_back(make_atom("On", {movable, name}));
      }
    }
  }
  for (const auto& [part, owner] : problem.fixture_parts) out.push_back(make_atom("Open", {part}));
  for (const auto& [name, fixture] : problem.fixtures) {
    if (fixture.switchable) out.push_back(make_atom("TurnedOn", {name}));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool eval_literal(const SceneProblem& problem, const SymbolicState& state, const Literal& lit) {
  check_atom(problem, lit.atom);
  return lit.positive == state.holds(lit.atom);
}

SymbolicState apply_effects(const SceneProblem& problem, const SymbolicState& state,
                            const LiteralSet& effects) {
  std::map<std::string, const Atom*> new_placement;
  for (const Literal& lit : effects) {
    check_atom(problem, lit.atom);
    if (effects.contains(negate(lit))) {
      throw InconsistentEffects("effects assert and retract " + to_string(lit.atom));
    }
    if (lit.positive && is_placement(lit.atom)) {
      auto [it, fresh] = new_placement.emplace(lit.atom.args[0], &lit.atom);
      if (!fresh) {
        throw InconsistentEffects("two placements for '" + lit.atom.args[0] + "' in one effect set");
      }
    }
  }

  AtomSet next = state.atoms();
  for (const Literal& lit : effects) {
    if (!lit.positive) next.erase(lit.atom);
  }
  for (const auto& [movable, atom] : new_placement) {
    std::erase_if(next, [&](const Atom& a) { return is_placement(a) && a.args[0] == movable; });
  }
  for (const Literal& lit : effects) {
    if (lit.positive) next.insert(lit.atom);
  }

  SymbolicState result(std::move(next));
  const auto violations = state_violations(problem, result);
  for (const auto& violation : violations) {
    if (violation.kind == Violation::Kind::capacity) throw CapacityError(violation.message);
  }
  if (!violations.empty()) throw InconsistentEffects(violations.front().message);
  return result;
}

// ---------------------------------------------------------------------------

AtomSet OperatorSpec::relevant_atoms() const {
  AtomSet out;
  for (const Literal& lit : pre) out.insert(lit.atom);
  for (const Literal& lit : eff) out.insert(lit.atom);
  return out;
}

std::vector<std::string> bind_operator(const SceneProblem& problem, const OperatorSpec& op) {
  auto bind = [&](const Literal& lit, const char* where) {
    try {
      check_atom(problem, lit.atom);
    } catch (const ValidationError& err) {
      throw BindError("operator '" + op.name + "' " + where + " " + to_string(lit) +
                      " does not bind to problem '" + problem.problem_name + "': " + err.what());
    }
  };
  for (const Literal& lit : op.pre) bind(lit, "precondition");
  for (const Literal& lit : op.eff) bind(lit, "effect");

  std::vector<std::string> warnings;
  for (const Literal& lit : op.eff) {
    if (op.pre.contains(lit)) {
      warnings.push_back("operator '" + op.name + "' effect " + to_string(lit) +
                         " is already required by its precondition");
    }
  }
  return warnings;
}

LiteralSet irrelevant_predicates(const OperatorSpec& op, std::span<const Literal> vocabulary) {
  const AtomSet relevant = op.relevant_atoms();
  LiteralSet out;
  for (const Literal& lit : vocabulary) {
    if (!relevant.contains(lit.atom)) out.insert(lit);
  }
  return out;
}

}  // namespace skillshift
