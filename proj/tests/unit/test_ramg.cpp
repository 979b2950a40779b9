#include <gtest/gtest.h>

#include <algorithm>

#include <nlohmann/json.hpp>

#include "skillshift/errors.hpp"
#include "skillshift/ramg.hpp"
#include "support.hpp"

using namespace skillshift;
using testing_support::load_catalog;
using testing_support::load_scene;
using testing_support::load_skills;
using testing_support::op_named;

namespace {

std::set<std::string> changed_groups(const SymbolicState& a, const SymbolicState& b) {
  std::set<std::string> out;
  for (const auto& atom : a.atoms()) {
    if (!b.holds(atom)) out.insert(group_key(atom));
  }
  for (const auto& atom : b.atoms()) {
    if (!a.holds(atom)) out.insert(group_key(atom));
  }
  return out;
}

void expect_protected_unchanged(const SceneProblem& base, const SceneProblem& result,
                                std::span<const OperatorSpec> ops) {
  for (const auto& op : ops) {
    for (const auto* side : {&op.pre, &op.eff}) {
      for (const auto& lit : *side) {
        EXPECT_EQ(eval_literal(base, base.init, lit), eval_literal(result, result.init, lit))
            << op.name << " " << to_string(lit);
      }
    }
  }
}

}  // namespace

TEST(Enumerate, KitchenScene1Count) {
  const auto ops = load_skills("kitchen_scene1").protected_ops();
  const auto mods = enumerate_candidates(load_scene("kitchen_scene1"), ops, load_catalog());
  EXPECT_EQ(mods.size(), 20U);
}

TEST(Enumerate, CanonicalOrder) {
  for (const auto& name : testing_support::scene_names()) {
    const auto ops = load_skills(name).protected_ops();
    const auto mods = enumerate_candidates(load_scene(name), ops, load_catalog());
    EXPECT_TRUE(std::is_sorted(mods.begin(), mods.end(), canonical_less)) << name;
    for (std::size_t i = 1; i < mods.size(); ++i) EXPECT_NE(mods[i - 1], mods[i]);
  }
}

TEST(Enumerate, NeverTouchesProtectedAtoms) {
  for (const auto& name : testing_support::scene_names()) {
    const auto ops = load_skills(name).protected_ops();
    AtomSet guarded;
    for (const auto& op : ops) {
      for (const auto& atom : op.relevant_atoms()) guarded.insert(atom);
    }
    for (const auto& mod : enumerate_candidates(load_scene(name), ops, load_catalog())) {
      for (const auto& atom : mod.introduced) EXPECT_FALSE(guarded.contains(atom)) << describe(mod);
      for (const auto& atom : mod.removed) EXPECT_FALSE(guarded.contains(atom)) << describe(mod);
    }
  }
}

TEST(Enumerate, BowlProtectedExcludesItsPlacements) {
  const auto ops = load_skills("kitchen_scene1").protected_ops();
  for (const auto& mod : enumerate_candidates(load_scene("kitchen_scene1"), ops, load_catalog())) {
    EXPECT_NE(mod.subject, "bowl");
    if (mod.kind == ModificationKind::AddObject) {
      EXPECT_NE(mod.object_type, "bowl");
    }
  }
}

TEST(Enumerate, UnboundOperator) {
  OperatorSpec op;
  op.name = "Ghost";
  op.pre.insert(pos(make_atom("Open", {"ghost_drawer"})));
  std::vector<OperatorSpec> ops{op};
  EXPECT_THROW(enumerate_candidates(load_scene("kitchen_scene1"), ops, load_catalog()), UnboundOperator);
}

TEST(Enumerate, EmptyLibraryCountsZero) {
  EXPECT_EQ(enumerate_variant_count({}, load_catalog()).total, 0U);
}

TEST(Enumerate, DuplicatedSceneDoublesCount) {
  std::vector<ProtectedProblem> one{{load_scene("kitchen_scene2"), load_skills("kitchen_scene2").protected_ops()}};
  std::vector<ProtectedProblem> two{one[0], one[0]};
  const auto catalog = load_catalog();
  EXPECT_EQ(enumerate_variant_count(two, catalog).total, 2 * enumerate_variant_count(one, catalog).total);
}

TEST(Enumerate, MonotoneSaturation) {
  // Adding literals to a protected operator can only remove candidates.
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto scene = testing_support::random_scene(seed);
    const auto catalog = load_catalog();
    const auto before = enumerate_candidates(scene.problem, scene.protected_ops, catalog).size();
    const auto vocab = ground_vocabulary(scene.problem);
    auto grown = scene.protected_ops;
    const auto& atom = vocab[seed % vocab.size()];
    grown[0].pre.insert(scene.problem.init.holds(atom) ? pos(atom) : neg(atom));
    const auto after = enumerate_candidates(scene.problem, grown, catalog).size();
    EXPECT_LE(after, before) << seed;
  }
}

TEST(Apply, RejectsProtectedAtom) {
  const auto scene = load_scene("kitchen_scene1");
  const auto ops = load_skills("kitchen_scene1").protected_ops();
  Modification mod{ModificationKind::MoveObject, "bowl", "table_left_region", {},
                   {make_atom("On", {"bowl", "table_left_region"})},
                   {make_atom("On", {"bowl", "table_right_region"})}};
  try {
    apply_modification(scene, mod, ops);
    FAIL();
  } catch (const IllegalModification& e) {
    EXPECT_EQ(e.rule(), 'a');
  }
}

TEST(Apply, RejectsOverfullSlot) {
  const auto scene = load_scene("kitchen_scene2");
  const auto mid = apply_modification(
      scene, {ModificationKind::MoveObject, "apple", "stove_burner", {},
              {make_atom("On", {"apple", "stove_burner"})}, {make_atom("On", {"apple", "table_front_region"})}});
  Modification second{ModificationKind::MoveObject, "potato", "stove_burner", {},
                      {make_atom("On", {"potato", "stove_burner"})},
                      {make_atom("On", {"potato", "table_back_region"})}};
  try {
    apply_modification(mid, second);
    FAIL();
  } catch (const IllegalModification& e) {
    EXPECT_EQ(e.rule(), 'c');
  }
}

TEST(Apply, AppleBlockedFromBowlReservedForPotato) {
  const auto scene = load_scene("kitchen_scene2");
  const auto registry = load_skills("kitchen_scene2");
  std::vector<OperatorSpec> ops{op_named(registry, "PlacePotato_small_bowl")};
  Modification put_apple{ModificationKind::PutIn, "apple", "small_bowl", {},
                         {make_atom("In", {"apple", "small_bowl"})},
                         {make_atom("On", {"apple", "table_front_region"})}};
  try {
    apply_modification(scene, put_apple, ops);
    FAIL();
  } catch (const IllegalModification& e) {
    EXPECT_EQ(e.rule(), 'c');
  }
  // Without the protected placement the same edit is fine.
  EXPECT_NO_THROW(apply_modification(scene, put_apple));
  for (const auto& mod : enumerate_candidates(scene, ops, load_catalog())) {
    EXPECT_NE(mod.target, "small_bowl") << describe(mod);
  }
}

TEST(Apply, SelfContainmentRejected) {
  const auto scene = load_scene("kitchen_scene1");
  Modification mod{ModificationKind::PutIn, "bowl", "bowl", {},
                   {make_atom("In", {"bowl", "bowl"})}, {make_atom("On", {"bowl", "table_right_region"})}};
  EXPECT_THROW(apply_modification(scene, mod), IllegalModification);
}

TEST(Sample, ExactlyKFeasibleConsistent) {
  const auto catalog = load_catalog();
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto scene = testing_support::random_scene(seed);
    for (std::size_t k = 1; k <= 3; ++k) {
      TaskVariant v;
      try {
        v = sample_modifications(scene.problem, scene.protected_ops, catalog, k, seed);
      } catch (const NoCandidates&) {
        continue;
      }
      ASSERT_EQ(v.modifications.size(), k);
      EXPECT_EQ(changed_groups(scene.problem.init, v.result.init).size(), k) << seed;
      EXPECT_TRUE(state_violations(v.result, v.result.init).empty()) << seed;
      EXPECT_NO_THROW(validate_problem(v.result));
      expect_protected_unchanged(scene.problem, v.result, scene.protected_ops);
    }
  }
}

TEST(Sample, Deterministic) {
  const auto scene = load_scene("kitchen_scene1");
  const auto ops = load_skills("kitchen_scene1").protected_ops();
  const auto a = sample_modifications(scene, ops, load_catalog(), 3, 42);
  const auto b = sample_modifications(scene, ops, load_catalog(), 3, 42);
  EXPECT_EQ(a, b);
  EXPECT_EQ(serialize_problem(a.result), serialize_problem(b.result));
}

TEST(Sample, DifferentSeedsDiffer) {
  const auto scene = load_scene("kitchen_scene2");
  const auto ops = load_skills("kitchen_scene2").protected_ops();
  std::set<std::string> outcomes;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    outcomes.insert(serialize_problem(sample_modifications(scene, ops, load_catalog(), 1, seed).result));
  }
  EXPECT_GT(outcomes.size(), 3U);
}

TEST(Sample, IncrementalExtendsPrefix) {
  const auto scene = load_scene("living_room_scene1");
  const auto ops = load_skills("living_room_scene1").protected_ops();
  const auto chain = sample_incremental(scene, ops, load_catalog(), 3, 9, {4});
  ASSERT_EQ(chain.size(), 3U);
  for (std::size_t k = 1; k <= 3; ++k) {
    const auto fresh = sample_modifications(scene, ops, load_catalog(), k, 9, {4});
    EXPECT_EQ(fresh, chain[k - 1]);
  }
  EXPECT_EQ(chain[1].modifications[0], chain[0].modifications[0]);
}

TEST(Sample, NoCandidatesIsAnError) {
  SceneProblem p = parse_problem(R"((define (problem bare)
  (:domain d)
  (:objects (cup - cup))
  (:fixtures (table - table))
  (:regions (spot :target table :kind slot))
  (:init (On cup spot))
  (:goal (and (On cup spot))))
)");
  EXPECT_THROW(sample_modifications(p, {}, ObjectCatalog{}, 1, 0), NoCandidates);
}

TEST(Sample, ZeroKRejected) {
  EXPECT_THROW(sample_modifications(load_scene("kitchen_scene1"), {}, load_catalog(), 0, 0),
               std::invalid_argument);
}

TEST(Json, ModificationRoundTrip) {
  const auto scene = load_scene("kitchen_scene3");
  for (const auto& mod : enumerate_candidates(scene, {}, load_catalog())) {
    EXPECT_EQ(modification_from_json(to_json(mod)), mod);
  }
}

TEST(Catalog, Validation) {
  EXPECT_THROW(ObjectCatalog({{"apple", "apple", {RegionKind::surface}}, {"apple", "a", {RegionKind::slot}}}),
               ValidationError);
  EXPECT_THROW(ObjectCatalog(std::vector<CatalogEntry>{{"apple", "apple", {}}}), ValidationError);
  const auto catalog = load_catalog();
  EXPECT_EQ(ObjectCatalog::from_json(catalog.to_json()).entries(), catalog.entries());
}
