#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "skillshift/pddl_model.hpp"

namespace skillshift {

/// Rule-based scene modification: enumerate, sample and apply edits that
/// leave every protected operator's Pre/Eff atoms untouched.

enum class ModificationKind { AddObject, MoveObject, ToggleFixture, PutIn, TakeOut };

std::string_view to_string(ModificationKind kind);
std::optional<ModificationKind> modification_kind_from_string(std::string_view text);

struct Modification {
  ModificationKind kind = ModificationKind::MoveObject;
  std::string subject;      // moved/toggled entity, or the fresh name for AddObject
  std::string target;       // region (On) or container (In); empty for ToggleFixture
  std::string object_type;  // AddObject only
  AtomSet introduced;
  AtomSet removed;

  /// Canonical "target=...;type=..." string used for ordering.
  std::string params_key() const;

  bool operator==(const Modification&) const = default;
};

/// Canonical order: kind, then subject, then params_key.
bool canonical_less(const Modification& lhs, const Modification& rhs);

std::string describe(const Modification& mod);

struct CatalogEntry {
  std::string type;
  std::string stem;
  std::vector<RegionKind> allowed_region_kinds;

  bool operator==(const CatalogEntry&) const = default;
};

class ObjectCatalog {
 public:
  ObjectCatalog() = default;
  /// Throws ValidationError on duplicate types or empty allowed kinds.
  explicit ObjectCatalog(std::vector<CatalogEntry> entries);

  static ObjectCatalog from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  const std::vector<CatalogEntry>& entries() const { return entries_; }

 private:
  std::vector<CatalogEntry> entries_;
};

struct SeedTrace {
  std::uint64_t master = 0;
  std::vector<std::uint64_t> path;

  bool operator==(const SeedTrace&) const = default;
};

struct TaskVariant {
  std::string base_id;
  std::vector<Modification> modifications;
  SceneProblem result;
  SeedTrace seed_trace;

  bool operator==(const TaskVariant&) const = default;
};

/// Every legal single modification of `problem`, in canonical order.
/// Throws UnboundOperator when a protected operator does not bind.
std::vector<Modification> enumerate_candidates(const SceneProblem& problem,
                                               std::span<const OperatorSpec> protected_ops,
                                               const ObjectCatalog& catalog);

/// k rounds of enumerate-then-pick. Round i draws with a seed derived from
/// (seed, path..., i), so a k-variant extends the (k-1)-variant drawn with the
/// same seed and path. Candidates touching an atom group changed by an
/// earlier round are excluded. Throws NoCandidates.
TaskVariant sample_modifications(const SceneProblem& problem,
                                 std::span<const OperatorSpec> protected_ops,
                                 const ObjectCatalog& catalog, std::size_t k, std::uint64_t seed,
                                 const std::vector<std::uint64_t>& path = {});

/// Variants with 1..k_max modifications, each extending the previous one.
std::vector<TaskVariant> sample_incremental(const SceneProblem& problem,
                                            std::span<const OperatorSpec> protected_ops,
                                            const ObjectCatalog& catalog, std::size_t k_max,
                                            std::uint64_t seed,
                                            const std::vector<std::uint64_t>& path = {});

/// Applies one modification, re-checking rules (a)-(c). Throws
/// IllegalModification.
SceneProblem apply_modification(const SceneProblem& problem, const Modification& mod,
                                std::span<const OperatorSpec> protected_ops = {});

struct ProtectedProblem {
  SceneProblem problem;
  std::vector<OperatorSpec> protected_ops;
};

struct VariantCount {
  std::vector<std::pair<std::string, std::size_t>> per_problem;
  std::size_t total = 0;
};

VariantCount enumerate_variant_count(std::span<const ProtectedProblem> problems,
                                     const ObjectCatalog& catalog);

nlohmann::json to_json(const Modification& mod);
Modification modification_from_json(const nlohmann::json& doc);

/// Manifest describing one generated variant. `result_path` is the file the
/// canonical result problem is written to.
nlohmann::json variant_manifest(const TaskVariant& variant, const std::string& base_problem,
                                const std::string& result_path);

}  // namespace skillshift
