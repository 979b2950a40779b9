#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "skillshift/rational.hpp"

namespace skillshift {

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

enum class Role { movable, container, region, fixture_part, fixture };

std::string_view to_string(Role role);

struct PredicateSymbol {
  std::string name;
  std::vector<Role> arg_roles;

  std::size_t arity() const { return arg_roles.size(); }
};

/// On(movable, region), In(movable, container), Open(fixture_part),
/// TurnedOn(fixture).
const std::vector<PredicateSymbol>& builtin_predicates();
const PredicateSymbol* find_predicate(std::string_view name);

bool is_identifier(std::string_view text);

/// A ground predicate instance without truth value.
struct Atom {
  std::string predicate;
  std::vector<std::string> args;

  auto operator<=>(const Atom&) const = default;
  bool operator==(const Atom&) const = default;
};

/// A ground atom with a claimed truth value.
struct Literal {
  Atom atom;
  bool positive = true;

  auto operator<=>(const Literal&) const = default;
  bool operator==(const Literal&) const = default;
};

using AtomSet = std::set<Atom>;
using LiteralSet = std::set<Literal>;

Atom make_atom(std::string predicate, std::vector<std::string> args);
Literal pos(Atom atom);
Literal neg(Atom atom);
Literal negate(Literal lit);

/// "(In potato bowl)" / "(not (Open cabinet_top))"
std::string to_string(const Atom& atom);
std::string to_string(const Literal& lit);

/// Placement atoms (On/In) of the same movable share one group; every other
/// atom is its own group. A modification or an OSS shift touches one group.
std::string group_key(const Atom& atom);
bool is_placement(const Atom& atom);

/// Closed-world state: the set of atoms that hold.
class SymbolicState {
 public:
  SymbolicState() = default;
  explicit SymbolicState(AtomSet asserted) : asserted_(std::move(asserted)) {}

  bool holds(const Atom& atom) const { return asserted_.contains(atom); }
  const AtomSet& atoms() const { return asserted_; }
  std::size_t size() const { return asserted_.size(); }

  SymbolicState with(const Atom& atom) const;
  SymbolicState without(const Atom& atom) const;

  bool operator==(const SymbolicState&) const = default;

 private:
  AtomSet asserted_;
};

// ---------------------------------------------------------------------------
// Scene problems
// ---------------------------------------------------------------------------

enum class RegionKind { surface, slot, container_interior };

std::string_view to_string(RegionKind kind);
std::optional<RegionKind> region_kind_from_string(std::string_view text);

struct Region {
  std::string name;
  std::string target;
  RegionKind kind = RegionKind::surface;
  std::optional<int> capacity;  // nullopt: unbounded

  bool operator==(const Region&) const = default;
};

/// Slot and container interiors hold one item unless stated otherwise;
/// surfaces are unbounded.
std::optional<int> default_capacity(RegionKind kind);

struct Fixture {
  std::string type;
  bool switchable = false;  // admits TurnedOn

  bool operator==(const Fixture&) const = default;
};

struct SceneProblem {
  std::string problem_name;
  std::string domain_name;
  std::string instruction;
  std::map<std::string, std::string> objects;  // movable -> type
  std::map<std::string, Fixture> fixtures;
  std::map<std::string, std::string> fixture_parts;  // part -> owning fixture
  std::map<std::string, Region> regions;
  SymbolicState init;
  LiteralSet goal;

  bool operator==(const SceneProblem&) const = default;

  bool is_entity(const std::string& name) const;
  bool has_role(const std::string& name, Role role) const;
  /// The container_interior region owned by `container`, if any.
  const Region* interior_of(const std::string& container) const;
  /// The region a placement atom occupies (On: the region; In: the interior).
  const Region* occupied_region(const Atom& placement) const;
  std::size_t entity_count() const;
};

/// Parses the scene-problem s-expression dialect and validates the result.
/// Throws SyntaxError or ValidationError.
SceneProblem parse_problem(std::string_view text);

/// Canonical text: fixed section order, sorted entries, one literal per line.
std::string serialize_problem(const SceneProblem& problem);

/// SHA-256 of the canonical serialization.
std::string content_id(const SceneProblem& problem);

/// Checks arity, entity existence and argument roles. Throws UnknownEntity
/// or ValidationError.
void check_atom(const SceneProblem& problem, const Atom& atom);

struct Violation {
  enum class Kind { typing, exclusivity, capacity, containment };
  Kind kind;
  std::string message;
};

/// All violated state axioms. Empty when the state is valid for the problem.
std::vector<Violation> state_violations(const SceneProblem& problem,
                                        const SymbolicState& state);

/// Full problem validation; throws ValidationError with the first problem.
void validate_problem(const SceneProblem& problem);

/// Every well-typed ground atom of the scene.
std::vector<Atom> ground_vocabulary(const SceneProblem& problem);

bool eval_literal(const SceneProblem& problem, const SymbolicState& state,
                  const Literal& lit);

/// Negative literals are removed first, then positives are added. Adding a
/// placement for a movable drops its previous placement. Throws
/// InconsistentEffects or CapacityError.
SymbolicState apply_effects(const SceneProblem& problem, const SymbolicState& state,
                            const LiteralSet& effects);

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

struct OperatorSpec {
  std::string name;
  std::string instruction;
  std::vector<std::string> params;
  LiteralSet pre;
  LiteralSet eff;
  Rational cost{1};

  bool operator==(const OperatorSpec&) const = default;

  /// Atoms of Pre ∪ Eff, polarity dropped.
  AtomSet relevant_atoms() const;
};

OperatorSpec operator_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const OperatorSpec& op);
Literal literal_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Literal& lit);
nlohmann::json to_json(const Atom& atom);

/// Validates every Pre/Eff literal against the problem; throws BindError.
/// Returns warnings (effects already required by Pre).
std::vector<std::string> bind_operator(const SceneProblem& problem, const OperatorSpec& op);

/// Vocabulary literals whose atom is absent from Pre ∪ Eff.
LiteralSet irrelevant_predicates(const OperatorSpec& op, std::span<const Literal> vocabulary);

}  // namespace skillshift
