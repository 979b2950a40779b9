#include "skillshift/chain.hpp"

#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skillshift/errors.hpp"
#include "skillshift/ingest.hpp"

namespace skillshift {

using nlohmann::json;

SkillChain make_chain(SceneProblem problem, std::vector<OperatorSpec> ops) {
  SkillChain chain;
  chain.nominal_inits.assign(ops.size(), problem.init);
  chain.problem = std::move(problem);
  chain.ops = std::move(ops);
  return chain;
}

LiteralSet accumulate_effects(std::span<const OperatorSpec> ops, std::size_t t) {
  if (t < 1 || t > ops.size()) {
    throw IndexOutOfRange("step " + std::to_string(t) + " outside 1.." +
                          std::to_string(ops.size()));
  }
  LiteralSet out;
  for (std::size_t i = 0; i < t; ++i) out.insert(ops[i].eff.begin(), ops[i].eff.end());
  return out;
}

LiteralSet observation_shift(const OperatorSpec& op, const SymbolicState& entry,
                             const SymbolicState& nominal) {
  struct Group {
    AtomSet at_entry;    // holds at entry, not at nominal
    AtomSet at_nominal;  // holds at nominal, not at entry
  };
  std::map<std::string, Group> groups;
  for (const auto& atom : entry.atoms()) {
    if (!nominal.holds(atom)) groups[group_key(atom)].at_entry.insert(atom);
  }
  for (const auto& atom : nominal.atoms()) {
    if (!entry.holds(atom)) groups[group_key(atom)].at_nominal.insert(atom);
  }
  const AtomSet relevant = op.relevant_atoms();
  LiteralSet out;
  for (const auto& [key, group] : groups) {
    bool touches = false;
    for (const auto* side : {&group.at_entry, &group.at_nominal}) {
      for (const auto& atom : *side) touches = touches || relevant.contains(atom);
    }
    if (touches) continue;
    if (!group.at_entry.empty()) {
      for (const auto& atom : group.at_entry) out.insert(pos(atom));
    } else {
      for (const auto& atom : group.at_nominal) out.insert(neg(atom));
    }
  }
  return out;
}

ChainTrace execute_chain(const SkillChain& chain) {
  if (chain.nominal_inits.size() != chain.ops.size()) {
    throw ValidationError("chain has " + std::to_string(chain.ops.size()) + " ops but " +
                          std::to_string(chain.nominal_inits.size()) + " nominal inits");
  }
  for (const auto& op : chain.ops) bind_operator(chain.problem, op);

  ChainTrace trace;
  SymbolicState state = chain.problem.init;
  LiteralSet accumulated;
  for (std::size_t i = 0; i < chain.ops.size(); ++i) {
    const OperatorSpec& op = chain.ops[i];
    trace.entry_states.push_back(state);
    bool feasible = true;
    for (const auto& lit : op.pre) feasible = feasible && eval_literal(chain.problem, state, lit);
    trace.feasible.push_back(feasible);
    trace.oss_atoms.push_back(observation_shift(op, state, chain.nominal_inits[i]));
    std::string conflict;
    try {
      state = apply_effects(chain.problem, state, op.eff);
    } catch (const InconsistentEffects& err) {
      conflict = err.what();
    } catch (const CapacityError& err) {
      conflict = err.what();
    }
    trace.conflicts.push_back(conflict);
    accumulated.insert(op.eff.begin(), op.eff.end());
    trace.accumulated_effects.push_back(accumulated);
  }
  return trace;
}

namespace {

ChallengeChain finish(SkillChain chain) {
  ChallengeChain result;
  for (const auto& op : chain.ops) {
    for (auto& warning : bind_operator(chain.problem, op)) {
      result.warnings.push_back(op.name + ": " + warning);
    }
  }
  result.trace = execute_chain(chain);
  for (std::size_t i = 0; i < chain.ops.size(); ++i) {
    const std::string step = "step " + std::to_string(i + 1) + " (" + chain.ops[i].name + ")";
    if (!result.trace.conflicts[i].empty()) {
      throw ConflictError(step + ": " + result.trace.conflicts[i]);
    }
    if (!result.trace.feasible[i]) result.warnings.push_back(step + ": preconditions unmet");
    if (result.trace.oss_atoms[i].empty()) {
      result.warnings.push_back(step + ": no observation shift");
    }
  }
  result.chain = std::move(chain);
  return result;
}

std::vector<OperatorSpec> resolve(std::span<const std::string> op_names,
                                  std::span<const OperatorSpec> registry) {
  if (op_names.empty()) throw UnknownOperator("chain names no operators");
  std::vector<OperatorSpec> ops;
  for (const auto& name : op_names) {
    const OperatorSpec* found = nullptr;
    for (const auto& op : registry) {
      if (op.name == name) found = &op;
    }
    if (!found) throw UnknownOperator("unknown operator '" + name + "'");
    ops.push_back(*found);
  }
  return ops;
}

}  // namespace

ChallengeChain build_challenge_chain(const SceneProblem& problem,
                                     std::span<const std::string> op_names,
                                     std::span<const OperatorSpec> registry) {
  return finish(make_chain(problem, resolve(op_names, registry)));
}

ChallengeChain load_chain_spec(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& err) {
    throw SchemaError(path.string() + ": " + err.what());
  }
  if (!doc.is_object()) throw SchemaError(path.string() + ": chain spec must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "problem" && key != "skills" && key != "operators" && key != "nominal_inits" &&
        key != "reset_between") {
      throw SchemaError("unknown chain spec key '" + key + "'");
    }
  }
  for (const char* key : {"problem", "skills", "operators"}) {
    if (!doc.contains(key)) throw SchemaError(std::string("chain spec needs '") + key + "'");
  }
  const auto base = path.parent_path();
  const SceneProblem problem = load_problem_file(base / doc["problem"].get<std::string>());
  const SkillRegistry registry = load_skill_registry(base / doc["skills"].get<std::string>());
  const auto names = doc["operators"].get<std::vector<std::string>>();

  SkillChain chain = make_chain(problem, resolve(names, registry.operators));
  chain.reset_between = doc.value("reset_between", true);
  if (doc.contains("nominal_inits")) {
    for (const auto& [key, lits] : doc["nominal_inits"].items()) {
      std::size_t step = 0;
      try {
        step = std::stoul(key);
      } catch (const std::exception&) {
        throw SchemaError("nominal_inits key '" + key + "' is not a step number");
      }
      if (step < 1 || step > chain.ops.size()) {
        throw IndexOutOfRange("nominal_inits step " + key + " outside 1.." +
                              std::to_string(chain.ops.size()));
      }
      AtomSet atoms;
      for (const auto& entry : lits) {
        Literal lit = literal_from_json(entry);
        if (!lit.positive) throw SchemaError("nominal init lists only atoms that hold");
        check_atom(problem, lit.atom);
        atoms.insert(lit.atom);
      }
      SymbolicState state(std::move(atoms));
      const auto violations = state_violations(problem, state);
      if (!violations.empty()) {
        throw ValidationError("nominal init for step " + key + ": " + violations.front().message);
      }
      chain.nominal_inits[step - 1] = std::move(state);
    }
  }
  return finish(std::move(chain));
}

namespace {

json literals_json(const LiteralSet& lits) {
  json out = json::array();
  for (const auto& lit : lits) out.push_back(to_json(lit));
  return out;
}

std::string literals_text(const LiteralSet& lits) {
  std::string out;
  for (const auto& lit : lits) {
    if (!out.empty()) out += ' ';
    out += to_string(lit);
  }
  return out;
}

}  // namespace

json trace_to_json(const ChallengeChain& result) {
  json out;
  out["problem"] = result.chain.problem.problem_name;
  out["reset_between"] = result.chain.reset_between;
  out["steps"] = json::array();
  for (std::size_t i = 0; i < result.chain.ops.size(); ++i) {
    json step;
    step["step"] = i + 1;
    step["operator"] = result.chain.ops[i].name;
    step["feasible"] = static_cast<bool>(result.trace.feasible[i]);
    step["oss_count"] = result.trace.oss_atoms[i].size();
    step["oss"] = literals_json(result.trace.oss_atoms[i]);
    step["accumulated_effects"] = literals_json(result.trace.accumulated_effects[i]);
    json entry = json::array();
    for (const auto& atom : result.trace.entry_states[i].atoms()) entry.push_back(to_json(atom));
    step["entry_state"] = std::move(entry);
    out["steps"].push_back(std::move(step));
  }
  out["warnings"] = result.warnings;
  return out;
}

std::string trace_to_text(const ChallengeChain& result) {
  std::ostringstream out;
  out << "chain on " << result.chain.problem.problem_name << ", " << result.chain.ops.size()
      << " skills\n";
  for (std::size_t i = 0; i < result.chain.ops.size(); ++i) {
    const auto& oss = result.trace.oss_atoms[i];
    out << "step " << i + 1 << "  " << result.chain.ops[i].name << "  "
        << (result.trace.feasible[i] ? "feasible" : "infeasible") << "  oss=" << oss.size();
    if (!oss.empty()) out << "  " << literals_text(oss);
    out << "\n";
  }
  out << "accumulated effects: " << literals_text(result.trace.accumulated_effects.back())
      << "\n";
  for (const auto& warning : result.warnings) out << "warning: " << warning << "\n";
  return out.str();
}

}  // namespace skillshift
