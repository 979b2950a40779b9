#pragma once

// Reference implementations used only by tests. They deliberately avoid the
// library's own checking code: legality, capacity and containment are
// recomputed from the raw problem fields.

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "skillshift/pddl_model.hpp"
#include "skillshift/ramg.hpp"
#include "skillshift/rational.hpp"

namespace oracle {

// (kind, subject, target, object_type, introduced, removed)
using CandidateKey = std::tuple<std::string, std::string, std::string, std::string,
                                skillshift::AtomSet, skillshift::AtomSet>;

/// Tries every (kind, subject, parameter) tuple and keeps the legal ones.
std::set<CandidateKey> brute_force_candidates(const skillshift::SceneProblem& problem,
                                              std::span<const skillshift::OperatorSpec> protected_ops,
                                              const skillshift::ObjectCatalog& catalog);

CandidateKey key_of(const skillshift::Modification& mod);

/// True when every placement bound holds and no movable sits inside itself,
/// directly or through a chain of containers.
bool state_ok(const skillshift::SceneProblem& problem, const skillshift::AtomSet& atoms);

/// Spearman rho of two tie-free rank permutations via 1 - 6*sum(d^2)/(n(n^2-1)).
skillshift::Rational rho_by_differences(const std::vector<int>& rx, const std::vector<int>& ry);

/// Two-sided exact p: share of all n! reorderings of ry whose |rho| reaches
/// the observed |rho|.
skillshift::Rational exact_p_by_enumeration(const std::vector<int>& rx, const std::vector<int>& ry);

}  // namespace oracle
