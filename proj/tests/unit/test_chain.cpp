#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "skillshift/chain.hpp"
#include "skillshift/errors.hpp"
#include "support.hpp"

using namespace skillshift;
using testing_support::data_dir;
using testing_support::load_scene;
using testing_support::load_skills;
using testing_support::op_named;

namespace {

std::vector<OperatorSpec> fig3_ops() {
  const auto registry = load_skills("kitchen_scene1");
  return {op_named(registry, "OpenDrawer_cabinet_top"), op_named(registry, "PlaceObject_potato_bowl"),
          op_named(registry, "MoveContainer_bowl_cabinet")};
}

// Chain of ops whose effects touch pairwise distinct groups and never undo
// each other. Pre is empty so every op is feasible.
SkillChain random_disjoint_chain(std::uint64_t seed) {
  auto scene = testing_support::random_scene(seed).problem;
  std::mt19937_64 rng(seed + 1000);
  std::vector<Literal> options;
  for (const auto& [name, region] : scene.regions) {
    if (region.kind != RegionKind::surface) continue;
    for (const auto& [movable, type] : scene.objects) {
      const auto atom = make_atom("On", {movable, name});
      if (!scene.init.holds(atom)) options.push_back(pos(atom));
    }
  }
  for (const auto& atom : ground_vocabulary(scene)) {
    if (is_placement(atom)) continue;
    options.push_back(scene.init.holds(atom) ? neg(atom) : pos(atom));
  }
  std::shuffle(options.begin(), options.end(), rng);
  std::vector<OperatorSpec> ops;
  std::set<std::string> used;
  for (const auto& lit : options) {
    if (ops.size() == 4) break;
    if (!used.insert(group_key(lit.atom)).second) continue;
    OperatorSpec op;
    op.name = "op_" + std::to_string(ops.size());
    op.eff.insert(lit);
    ops.push_back(op);
  }
  return make_chain(std::move(scene), std::move(ops));
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("skillshift_chain_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Chain, Fig3ObservationShiftCounts) {
  const auto chain = make_chain(load_scene("kitchen_scene1"), fig3_ops());
  const auto trace = execute_chain(chain);
  ASSERT_EQ(trace.oss_atoms.size(), 3U);
  EXPECT_EQ(trace.oss_atoms[0].size(), 0U);
  EXPECT_EQ(trace.oss_atoms[1].size(), 1U);
  EXPECT_EQ(trace.oss_atoms[2].size(), 2U);
  EXPECT_TRUE(trace.oss_atoms[2].contains(pos(make_atom("In", {"potato", "bowl"}))));
  EXPECT_TRUE(trace.oss_atoms[2].contains(pos(make_atom("Open", {"cabinet_top"}))));
  EXPECT_EQ(trace.feasible, (std::vector<bool>{true, true, true}));
}

TEST(Chain, AccumulatedEffectsAreUnion) {
  const auto ops = fig3_ops();
  LiteralSet expected;
  for (const auto& op : ops) expected.insert(op.eff.begin(), op.eff.end());
  EXPECT_EQ(accumulate_effects(ops, 3), expected);
  EXPECT_EQ(accumulate_effects(ops, 1), ops[0].eff);
  EXPECT_THROW(accumulate_effects(ops, 0), IndexOutOfRange);
  EXPECT_THROW(accumulate_effects(ops, 4), IndexOutOfRange);
}

TEST(Chain, UnmetPreconditionFlagged) {
  const auto registry = load_skills("kitchen_scene1");
  OperatorSpec needs_open;
  needs_open.name = "TakeFromBottomDrawer";
  needs_open.pre.insert(pos(make_atom("Open", {"cabinet_bottom"})));
  needs_open.eff.insert(pos(make_atom("On", {"plate", "table_right_region"})));
  std::vector<OperatorSpec> ops{op_named(registry, "OpenDrawer_cabinet_top"), needs_open};
  const auto trace = execute_chain(make_chain(load_scene("kitchen_scene1"), ops));
  EXPECT_TRUE(trace.feasible[0]);
  EXPECT_FALSE(trace.feasible[1]);
  // Traversal continues past the infeasible step.
  EXPECT_EQ(trace.accumulated_effects.size(), 2U);
}

TEST(Chain, ChallengeChainWarnsAndResolves) {
  const auto registry = load_skills("kitchen_scene1");
  std::vector<std::string> names{"OpenDrawer_cabinet_top", "PlaceObject_potato_bowl",
                                 "MoveContainer_bowl_cabinet"};
  const auto result = build_challenge_chain(load_scene("kitchen_scene1"), names, registry.operators);
  EXPECT_EQ(result.chain.ops.size(), 3U);
  ASSERT_EQ(result.warnings.size(), 1U);
  EXPECT_NE(result.warnings[0].find("no observation shift"), std::string::npos);
}

TEST(Chain, EmptyAndUnknownNames) {
  const auto registry = load_skills("kitchen_scene1");
  EXPECT_THROW(build_challenge_chain(load_scene("kitchen_scene1"), {}, registry.operators), UnknownOperator);
  std::vector<std::string> names{"FlyAway"};
  EXPECT_THROW(build_challenge_chain(load_scene("kitchen_scene1"), names, registry.operators), UnknownOperator);
}

TEST(Chain, ConflictingPlacementsRaise) {
  EXPECT_THROW(load_chain_spec(data_dir() / "chains" / "conflict_chain.json"), ConflictError);
}

TEST(Chain, NominalInitsLengthChecked) {
  auto chain = make_chain(load_scene("kitchen_scene1"), fig3_ops());
  chain.nominal_inits.pop_back();
  EXPECT_THROW(execute_chain(chain), ValidationError);
}

TEST(Chain, ObservationShiftDirect) {
  const auto scene = load_scene("kitchen_scene1");
  const auto ops = fig3_ops();
  const auto& op = ops[2];
  const auto entry = apply_effects(scene, scene.init, {pos(make_atom("In", {"potato", "bowl"}))});
  const auto shift = observation_shift(op, entry, scene.init);
  EXPECT_EQ(shift, (LiteralSet{pos(make_atom("In", {"potato", "bowl"}))}));
  // An atom missing at entry shows as its negation.
  const auto opened = apply_effects(scene, scene.init, {pos(make_atom("Open", {"cabinet_top"}))});
  EXPECT_EQ(observation_shift(op, scene.init, opened),
            (LiteralSet{neg(make_atom("Open", {"cabinet_top"}))}));
  EXPECT_TRUE(observation_shift(op, scene.init, scene.init).empty());
}

TEST(ChainSpec, Fig3File) {
  const auto result = load_chain_spec(data_dir() / "chains" / "fig3_chain.json");
  EXPECT_EQ(result.trace.oss_atoms[2].size(), 2U);
  const auto doc = trace_to_json(result);
  EXPECT_EQ(doc["steps"].size(), 3U);
  EXPECT_EQ(doc["steps"][2]["oss_count"], 2);
  EXPECT_NE(trace_to_text(result).find("oss=2"), std::string::npos);
}

TEST(ChainSpec, NominalInitOverride) {
  const auto dir = temp_dir("override");
  const auto scenes = (data_dir() / "scenes" / "kitchen_scene1.problem").string();
  const auto skills = (data_dir() / "skills" / "kitchen_scene1.json").string();
  nlohmann::json spec = {
      {"problem", scenes},
      {"skills", skills},
      {"operators", {"OpenDrawer_cabinet_top", "PlaceObject_potato_bowl"}},
      {"nominal_inits",
       {{"2",
         {{"On", "potato", "table_left_region"}, {"On", "bowl", "table_right_region"},
          {"On", "plate", "table_left_region"}, {"Open", "cabinet_top"}}}}}};
  std::ofstream(dir / "spec.json") << spec.dump();
  const auto result = load_chain_spec(dir / "spec.json");
  // Skill 2 was trained with the drawer open, so nothing shifts.
  EXPECT_TRUE(result.trace.oss_atoms[1].empty());
}

TEST(ChainSpec, UnknownKeyRejected) {
  const auto dir = temp_dir("badkey");
  nlohmann::json spec = {{"problem", "x"}, {"skills", "y"}, {"operators", {"a"}}, {"extra", 1}};
  std::ofstream(dir / "spec.json") << spec.dump();
  EXPECT_THROW(load_chain_spec(dir / "spec.json"), SchemaError);
}

TEST(ChainProperty, OssAtomsAreIrrelevant) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto chain = random_disjoint_chain(seed);
    const auto trace = execute_chain(chain);
    for (std::size_t i = 0; i < chain.ops.size(); ++i) {
      std::vector<Literal> shifted(trace.oss_atoms[i].begin(), trace.oss_atoms[i].end());
      EXPECT_EQ(irrelevant_predicates(chain.ops[i], shifted).size(), shifted.size()) << seed;
    }
  }
}

TEST(ChainProperty, EntryStatesFoldEffects) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto chain = random_disjoint_chain(seed);
    const auto trace = execute_chain(chain);
    SymbolicState state = chain.problem.init;
    for (std::size_t i = 0; i < chain.ops.size(); ++i) {
      EXPECT_EQ(trace.entry_states[i], state) << seed << " step " << i;
      state = apply_effects(chain.problem, state, chain.ops[i].eff);
    }
  }
}

TEST(ChainProperty, OssMonotoneWithoutReversals) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto chain = random_disjoint_chain(seed);
    const auto trace = execute_chain(chain);
    for (std::size_t i = 1; i < trace.oss_atoms.size(); ++i) {
      EXPECT_LE(trace.oss_atoms[i - 1].size(), trace.oss_atoms[i].size()) << seed;
    }
  }
}

TEST(ChainProperty, ResetBetweenDoesNotChangeTrace) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto chain = random_disjoint_chain(seed);
    chain.reset_between = true;
    const auto on = execute_chain(chain);
    chain.reset_between = false;
    EXPECT_EQ(execute_chain(chain), on);
  }
}
