#!/usr/bin/env python3
"""Regenerates the derived sample data under data/.

  data/tasks/          44 task problems built from the six bundled scenes,
                       with one skill registry per task in data/tasks/skills/
  data/tasks/demos.json  demonstrations per task (uniform)
  data/logs/synthetic_episodes.csv  per-episode log for two synthetic
                       baselines over six tasks and k = 0..3

Output is deterministic; rerunning leaves the tree unchanged.
"""

import json
import random
import re
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
SCENES = [
    "kitchen_scene1",
    "kitchen_scene2",
    "kitchen_scene3",
    "kitchen_scene4",
    "living_room_scene1",
    "study_scene1",
]
TASKS = 44
DEMOS_TOTAL = 2000


def write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def make_tasks() -> None:
    demos = {}
    for i in range(TASKS):
        scene = SCENES[i % len(SCENES)]
        name = f"task_{i:02d}"
        text = (DATA / "scenes" / f"{scene}.problem").read_text()
        text = re.sub(r"\(problem \w+\)", f"(problem {name})", text, count=1)
        write(DATA / "tasks" / f"{name}.problem", text)

        registry = json.loads((DATA / "skills" / f"{scene}.json").read_text())
        ops = [op["name"] for op in registry["operators"]]
        registry["protected"] = [ops[(i // len(SCENES)) % len(ops)]]
        write(DATA / "tasks" / "skills" / f"{name}.json", json.dumps(registry, indent=2) + "\n")
        demos[name] = DEMOS_TOTAL // TASKS + (1 if i < DEMOS_TOTAL % TASKS else 0)
    write(DATA / "tasks" / "demos.json", json.dumps(demos, indent=2, sort_keys=True) + "\n")


def make_episode_log() -> None:
    rng = random.Random(20250101)
    rows = ["baseline,task_id,condition,k_mods,episode_id,success"]
    for baseline, skill in (("alpha_policy", 0.85), ("beta_policy", 0.6)):
        for task in range(6):
            base = max(0.1, skill - 0.05 * task)
            for k in range(4):
                condition = "ori" if k == 0 else "mod"
                rate = base * (1.0 - 0.15 * k)
                for episode in range(10):
                    success = 1 if rng.random() < rate else 0
                    rows.append(f"{baseline},{task},{condition},{k},{episode},{success}")
    write(DATA / "logs" / "synthetic_episodes.csv", "\n".join(rows) + "\n")


if __name__ == "__main__":
    make_tasks()
    make_episode_log()
