#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "skillshift/pddl_model.hpp"

namespace skillshift {

struct SkillChain {
  SceneProblem problem;
  std::vector<OperatorSpec> ops;
  /// State each skill's policy was trained from; one per op.
  std::vector<SymbolicState> nominal_inits;
  /// Robot pose reset between skills. Pose is not symbolic, so this never
  /// changes a trace.
  bool reset_between = true;
};

/// Chain whose nominal init for every op is the problem's init state.
SkillChain make_chain(SceneProblem problem, std::vector<OperatorSpec> ops);

struct ChainTrace {
  std::vector<SymbolicState> entry_states;
  std::vector<bool> feasible;
  /// Irrelevant atom groups whose truth differs between the entry state and
  /// the op's nominal init, one literal per group as it holds at entry.
  std::vector<LiteralSet> oss_atoms;
  /// Union of Eff_1..Eff_i after op i.
  std::vector<LiteralSet> accumulated_effects;
  /// Non-empty when the op's effects could not be applied at its entry state.
  std::vector<std::string> conflicts;

  bool operator==(const ChainTrace&) const = default;
};

/// Raw union of Eff_1..Eff_t (1-based t). Throws IndexOutOfRange.
LiteralSet accumulate_effects(std::span<const OperatorSpec> ops, std::size_t t);

/// Observation shift seen by `op` when started from `entry` instead of
/// `nominal`.
LiteralSet observation_shift(const OperatorSpec& op, const SymbolicState& entry,
                             const SymbolicState& nominal);

/// Walks the chain, flagging infeasible steps without stopping. Throws
/// BindError when an op does not bind to the problem.
ChainTrace execute_chain(const SkillChain& chain);

struct ChallengeChain {
  SkillChain chain;
  ChainTrace trace;
  std::vector<std::string> warnings;
};

/// Resolves op names against the registry, executes, and reports steps
/// without OSS or with unmet preconditions as warnings. Throws
/// UnknownOperator or ConflictError.
ChallengeChain build_challenge_chain(const SceneProblem& problem,
                                     std::span<const std::string> op_names,
                                     std::span<const OperatorSpec> registry);

/// Chain spec file: {"problem": path, "skills": path, "operators": [names],
/// "nominal_inits": {"<step>": [literals]}, "reset_between": bool}, steps
/// counted from 1.
/// Relative paths resolve against the spec file's directory.
ChallengeChain load_chain_spec(const std::filesystem::path& path);

nlohmann::json trace_to_json(const ChallengeChain& result);
std::string trace_to_text(const ChallengeChain& result);

}  // namespace skillshift
