#pragma once

#include <filesystem>
#include <ostream>
#include <map>
#include <stdexcept>
#include <random>
#include <string>
#include <vector>

#include "skillshift/ingest.hpp"
#include "skillshift/pddl_model.hpp"
#include "skillshift/ramg.hpp"

namespace skillshift {
inline void PrintTo(const Atom& atom, std::ostream* os) { *os << to_string(atom); }
inline void PrintTo(const Literal& lit, std::ostream* os) { *os << to_string(lit); }
}  // namespace skillshift

namespace testing_support {

inline std::filesystem::path data_dir() { return SKILLSHIFT_TEST_DATA_DIR; }

inline const std::vector<std::string>& scene_names() {
  static const std::vector<std::string> names{"kitchen_scene1", "kitchen_scene2",
                                              "kitchen_scene3", "kitchen_scene4",
                                              "living_room_scene1", "study_scene1"};
  return names;
}

inline skillshift::SceneProblem load_scene(const std::string& name) {
  return skillshift::load_problem_file(data_dir() / "scenes" / (name + ".problem"));
}

inline skillshift::SkillRegistry load_skills(const std::string& name) {
  return skillshift::load_skill_registry(data_dir() / "skills" / (name + ".json"));
}

inline skillshift::ObjectCatalog load_catalog() {
  return skillshift::load_catalog(data_dir() / "catalog.json");
}

inline const skillshift::OperatorSpec& op_named(const skillshift::SkillRegistry& registry,
                                                const std::string& name) {
  const auto* op = registry.find(name);
  if (!op) throw std::runtime_error("no operator " + name);
  return *op;
}

struct RandomScene {
  skillshift::SceneProblem problem;
  std::vector<skillshift::OperatorSpec> protected_ops;
};

/// Small valid scene (at most 8 entities) with one or two protected
/// operators that bind to it.
inline RandomScene random_scene(std::uint64_t seed) {
  using namespace skillshift;
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto coin = [&] { return (rng() & 1U) == 1U; };

  SceneProblem p;
  p.problem_name = "random_" + std::to_string(seed);
  p.domain_name = "random";
  p.fixtures["table"] = Fixture{"table", false};
  const std::size_t surfaces = 1 + pick(2);
  for (std::size_t i = 0; i < surfaces; ++i) {
    const std::string name = "table_r" + std::to_string(i);
    p.regions[name] = Region{name, "table", RegionKind::surface, std::nullopt};
  }
  if (coin()) {
    p.fixtures["cabinet"] = Fixture{"cabinet", coin()};
    p.regions["cabinet_slot"] = Region{"cabinet_slot", "cabinet", RegionKind::slot,
                                       std::optional<int>(coin() ? 2 : 1)};
    const std::size_t parts = pick(3);
    for (std::size_t i = 0; i < parts; ++i) p.fixture_parts["drawer_" + std::to_string(i)] = "cabinet";
    if (parts > 0 && coin()) {
      p.regions["drawer_0_interior"] =
          Region{"drawer_0_interior", "drawer_0", RegionKind::container_interior, 1};
    }
  }
  if (coin()) p.fixtures["stove"] = Fixture{"stove", true};

  const std::size_t budget = 8 - p.entity_count();
  const std::size_t movables = std::min<std::size_t>(budget, 2 + pick(3));
  for (std::size_t i = 0; i < movables; ++i) {
    const std::string name = "obj_" + std::to_string(i);
    const bool container = i < 2 && coin();
    p.objects[name] = container ? "bowl" : (coin() ? "fruit" : "cup");
    if (container) {
      p.regions[name + "_interior"] = Region{name + "_interior", name, RegionKind::container_interior,
                                            std::optional<int>(coin() ? 2 : 1)};
    }
  }

  // Place everything: containers on surfaces, the rest anywhere with room.
  AtomSet atoms;
  std::map<std::string, int> load;
  auto room = [&](const Region& r) {
    const int cap = r.capacity ? *r.capacity : 1 << 20;
    return load[r.name] < cap;
  };
  for (const auto& [name, type] : p.objects) {
    std::vector<const Region*> options;
    for (const auto& [rname, region] : p.regions) {
      if (!room(region)) continue;
      if (region.kind == RegionKind::container_interior && type == "bowl") continue;
      options.push_back(&region);
    }
    const Region* chosen = options[pick(options.size())];
    ++load[chosen->name];
    if (chosen->kind == RegionKind::container_interior) {
      atoms.insert(make_atom("In", {name, chosen->target}));
    } else {
      atoms.insert(make_atom("On", {name, chosen->name}));
    }
  }
  for (const auto& [part, owner] : p.fixture_parts) {
    if (coin()) atoms.insert(make_atom("Open", {part}));
  }
  for (const auto& [name, fixture] : p.fixtures) {
    if (fixture.switchable && coin()) atoms.insert(make_atom("TurnedOn", {name}));
  }
  p.init = SymbolicState(atoms);
  p.goal.insert(pos(*atoms.begin()));
  validate_problem(p);

  RandomScene out{p, {}};
  const std::size_t ops = 1 + pick(2);
  for (std::size_t i = 0; i < ops; ++i) {
    OperatorSpec op;
    op.name = "op_" + std::to_string(i);
    std::vector<Atom> placed;
    for (const auto& atom : atoms) {
      if (is_placement(atom)) placed.push_back(atom);
    }
    const Atom& from = placed[pick(placed.size())];
    op.pre.insert(pos(from));
    std::vector<std::string> surfaces_now;
    for (const auto& [rname, region] : p.regions) {
      if (region.kind != RegionKind::container_interior && rname != from.args[1]) surfaces_now.push_back(rname);
    }
    if (!surfaces_now.empty() && coin()) {
      op.eff.insert(pos(make_atom("On", {from.args[0], surfaces_now[pick(surfaces_now.size())]})));
    } else if (!p.fixture_parts.empty()) {
      const auto part = std::next(p.fixture_parts.begin(), static_cast<long>(pick(p.fixture_parts.size())))->first;
      const Atom open = make_atom("Open", {part});
      op.eff.insert(p.init.holds(open) ? neg(open) : pos(open));
    }
    out.protected_ops.push_back(std::move(op));
  }
  return out;
}

}  // namespace testing_support
