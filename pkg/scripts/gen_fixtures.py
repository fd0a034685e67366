#!/usr/bin/env python3
"""Generate the shipped fixture data.

Writes, after verifying every entry by simulation + predicate evaluation:

* src/skillbench/data/benchmark.jsonl   -- 80 tasks with predicates
* src/skillbench/data/seed_actions.jsonl -- 24 seed skills with programs
* fixtures/scripted/*.txt               -- scripted provider responses that
                                           solve each benchmark task

Run from the repo root: python scripts/gen_fixtures.py
"""

from __future__ import annotations

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from skillbench.authoring import derive_program
from skillbench.entities import load_all_entities
from skillbench.evaluator import evaluate_trace
from skillbench.predicates import predicate_from_obj
from skillbench.programs import serialize_program
from skillbench.simulator import SimConfig, simulate
from skillbench.store import _program_to_obj, slugify

ROOT = os.path.join(os.path.dirname(__file__), "..")
DATA = os.path.join(ROOT, "src", "skillbench", "data")
SCRIPTED = os.path.join(ROOT, "fixtures", "scripted")


def reaches(dof, value, tol=0.1):
    return {"op": "reaches", "dof": dof, "value": value, "tol": tol}


def final_at(dof, value, tol=0.05):
    return {"op": "final_at", "dof": dof, "value": value, "tol": tol}


def inc(dof, d=0.5):
    return {"op": "increases", "dof": dof, "min_delta": d}


def dec(dof, d=0.5):
    return {"op": "decreases", "dof": dof, "min_delta": d}


def osc(dof, amp, cycles=1):
    return {"op": "oscillates", "dof": dof, "min_amplitude": amp, "min_cycles": cycles}


def all_of(*children):
    return {"op": "all", "children": list(children)}


def seq(*children):
    return {"op": "seq", "children": list(children)}


# --- Benchmark tasks -------------------------------------------------------
# Human DOF map: 0 abdomen_z 1 abdomen_y 2 abdomen_x 3 right_hip_x
# 4 right_hip_z 5 right_hip_y 6 right_knee 7 right_ankle_y 8 right_ankle_x
# 9 left_hip_x 10 left_hip_z 11 left_hip_y 12 left_knee 13 left_ankle_y
# 14 left_ankle_x 15 right_shoulder1 16 right_shoulder2 17 right_elbow
# 18 left_shoulder1 19 left_shoulder2 20 left_elbow

HUMAN_TASKS = [
    ("raise your left arm", reaches(18, 1.0, 0.2)),
    ("raise both your arms", all_of(reaches(15, 1.0, 0.2), reaches(18, 1.0, 0.2))),
    ("put your left hand on left hip", all_of(reaches(18, 0.6, 0.2), reaches(20, -1.2, 0.25))),
    ("place your left feet on right feet", reaches(9, -0.6, 0.15)),
    ("place your right feet on left feet", reaches(3, -0.6, 0.15)),
    ("put your left hand on left shoulder", all_of(reaches(18, 0.9, 0.2), reaches(20, -1.5, 0.2))),
    ("put your left hand on left waist", all_of(reaches(18, 0.4, 0.2), reaches(20, -1.0, 0.25))),
    (
        "put your left hand on right knee",
        all_of(reaches(18, -0.8, 0.2), reaches(20, -0.9, 0.25), reaches(1, 0.4, 0.2)),
    ),
    ("rotate the right elbow", osc(17, 1.0)),
    ("rotate the right knee", osc(6, 1.0)),
    ("rotate the left ankle", osc(13, 0.8)),
    ("rotate the left hip", osc(11, 1.0)),
    ("rotate the right hip", osc(5, 1.0)),
    ("stretch right arm forward", all_of(reaches(15, -1.2, 0.2), reaches(17, 0.6, 0.25))),
    ("stretch left arm forward", all_of(reaches(18, -1.2, 0.2), reaches(20, 0.6, 0.25))),
    ("swing the right arm", osc(15, 1.2, 2)),
    ("swing the left arm", osc(18, 1.2, 2)),
    (
        "run",
        all_of(osc(5, 1.0, 2), osc(11, 1.0, 2), osc(6, 1.2, 2), osc(12, 1.2, 2)),
    ),
]

# Ant: hips at 0/2/4/6 (left-upper, right-upper, left-bottom, right-bottom),
# ankles at 1/3/5/7. "Rotate" tasks are signed hip swings.
ANT_TASKS = [
    ("clockwise rotate the left bottom hip", inc(4)),
    ("clockwise rotate the right bottom hip", inc(6)),
    ("clockwise rotate the left upper hip", inc(0)),
    ("clockwise rotate the right upper hip", inc(2)),
    ("anticlockwise rotate the left bottom hip", dec(4)),
    ("anticlockwise rotate the right bottom hip", dec(6)),
    ("anticlockwise rotate the left upper hip", dec(0)),
    ("anticlockwise rotate the right upper hip", dec(2)),
]

CARTPOLE_TASKS = [
    ("left move the slider", dec(0)),
    ("right move the slider", inc(0)),
    ("anticlockwise rotate the cart", inc(1, 0.8)),
    ("left and then right move the slider", seq(reaches(0, -1.0, 0.15), reaches(0, 1.0, 0.15))),
    ("right and then left move the slider", seq(reaches(0, 1.0, 0.15), reaches(0, -1.0, 0.15))),
    (
        "anticlockwise and then clockwise rotate the cart",
        seq(reaches(1, 1.0, 0.15), final_at(1, 0.0, 0.1)),
    ),
    (
        "clockwise and then anticlockwise rotate the cart",
        seq(reaches(1, -1.0, 0.15), final_at(1, 0.0, 0.1)),
    ),
]

SEKTION_TASKS = [
    ("open the left door", reaches(0, -1.2, 0.2)),
    ("open the right door", reaches(1, 1.2, 0.2)),
    ("open the bottom drawer", reaches(2, 0.35, 0.05)),
    ("open and then close the left door", seq(reaches(0, -1.2, 0.2), final_at(0, 0.0, 0.05))),
    ("open and then close the right door", seq(reaches(1, 1.2, 0.2), final_at(1, 0.0, 0.05))),
    ("open and then close the bottom drawer", seq(reaches(2, 0.35, 0.05), final_at(2, 0.0, 0.02))),
    ("open and then close the front drawer", seq(reaches(3, 0.35, 0.05), final_at(3, 0.0, 0.02))),
]

# Franka: clockwise = toward the lower limit, anticlockwise = toward the upper.
FRANKA_TASKS = [
    ("clockwise rotate the first joint", dec(0, 1.0)),
    ("anticlockwise rotate the first joint", inc(0, 1.0)),
    ("clockwise rotate the second joint", dec(1, 0.8)),
    ("anticlockwise rotate the second joint", inc(1, 0.8)),
    ("clockwise rotate the third joint", dec(2, 1.0)),
    ("anticlockwise rotate the third joint", inc(2, 1.0)),
    ("clockwise rotate the forth joint", dec(3, 1.0)),
    ("clockwise rotate the fifth joint", dec(4, 1.0)),
    ("anticlockwise rotate the fifth joint", inc(4, 1.0)),
    ("clockwise rotate the sixth joint", dec(5, 0.8)),
    ("anticlockwise rotate the sixth joint", inc(5, 0.8)),
    ("clockwise rotate the seventh joint", dec(6, 1.0)),
    ("anticlockwise rotate the seventh joint", inc(6, 1.0)),
    ("bend the first finger", inc(7, 0.03)),
    ("extend the first finger", dec(7, 0.03)),
    ("bend the second finger", inc(8, 0.03)),
    ("extend the second finger", dec(8, 0.03)),
]

KINOVA_TASKS = [
    ("anticlockwise rotate the first joint", inc(0, 1.0)),
    ("clockwise rotate the first joint", dec(0, 1.0)),
    ("anticlockwise swing the second joint", inc(1, 1.0)),
    ("clockwise swing the second joint", dec(1, 1.0)),
    ("anticlockwise swing the third joint", inc(2, 1.0)),
    ("clockwise swing the third joint", dec(2, 1.0)),
    ("anticlockwise rotate the forth joint", inc(3, 1.0)),
    ("clockwise rotate the forth joint", dec(3, 1.0)),
    ("anticlockwise swing the fifth joint", inc(4, 1.0)),
    ("clockwise swing the fifth joint", dec(4, 1.0)),
    ("anticlockwise rotate the sixth joint", inc(5, 1.0)),
    ("clockwise rotate the sixth joint", dec(5, 1.0)),
]

# Anymal: HAA = abduction (side swing), HFE = flexion (fore/aft swing),
# KFE = knee. The source task list repeats two entries; both are kept.
ANYMAL_TASKS = [
    ("walk", all_of(osc(1, 0.6, 2), osc(4, 0.6, 2), osc(7, 0.6, 2), osc(10, 0.6, 2))),
    ("forward swing right front hip", inc(7)),
    ("backward swing right front hip", dec(7)),
    ("forward swing right front hip", inc(7)),
    ("backward swing left front hip", dec(1)),
    ("forward swing right hind hip", inc(10)),
    ("backward swing right hind hip", dec(10)),
    ("forward swing right hind hip", inc(10)),
    ("right swing the right hind hip", inc(9)),
    ("right swing the right front hip", inc(6)),
    ("left swing the right front hip", dec(6)),
]

BENCHMARK = [
    ("Human", HUMAN_TASKS),
    ("Ant", ANT_TASKS),
    ("Cartpole", CARTPOLE_TASKS),
    ("SektionCabinet", SEKTION_TASKS),
    ("FrankaPanda", FRANKA_TASKS),
    ("Kinova", KINOVA_TASKS),
    ("Anymal", ANYMAL_TASKS),
]

# --- Seed action space -----------------------------------------------------

SEEDS = [
    ("Human", "stretch the body", all_of(reaches(15, 1.0, 0.2), reaches(18, 1.0, 0.2), reaches(1, -0.5, 0.2))),
    ("Human", "put your right hand on right waist", all_of(reaches(15, 0.4, 0.2), reaches(17, -1.0, 0.25))),
    ("Human", "walk", all_of(osc(5, 0.8, 2), osc(11, 0.8, 2))),
    ("Human", "rotate the left elbow", osc(20, 1.0)),
    ("Human", "put your right hand on right shoulder", all_of(reaches(15, 0.9, 0.2), reaches(17, -1.5, 0.2))),
    ("Human", "put your right arm down vertically", seq(reaches(15, 1.0, 0.2), final_at(15, 0.0, 0.05))),
    (
        "Human",
        "walk and swing arms",
        all_of(osc(5, 0.8, 2), osc(11, 0.8, 2), osc(15, 0.8, 2), osc(18, 0.8, 2)),
    ),
    ("Human", "raise your right arm", reaches(15, 1.0, 0.2)),
    ("Human", "rotate the right ankle", osc(7, 0.8)),
    ("Human", "place the two feet overlapped", all_of(reaches(3, -0.6, 0.15), reaches(9, -0.6, 0.15))),
    ("Human", "rotate the left knee", osc(12, 1.0)),
    ("Human", "bend the right knee", dec(6, 1.0)),
    ("Human", "swing arms", all_of(osc(15, 1.2, 2), osc(18, 1.2, 2))),
    (
        "Human",
        "put your right hand on the left knee",
        all_of(reaches(15, -0.8, 0.2), reaches(17, -0.9, 0.25), reaches(1, 0.4, 0.2)),
    ),
    ("Human", "twist the waist", osc(0, 1.0)),
    ("Ant", "bend the right upper knee", dec(3)),
    ("Ant", "bend the right bottom knee", inc(7)),
    ("Cartpole", "clockwise rotate pole", dec(1, 0.8)),
    ("SektionCabinet", "open top drawer", reaches(3, 0.35, 0.05)),
    ("FrankaPanda", "clockwise rotate 1 dof", dec(0, 1.0)),
    ("Kinova", "clockwise rotate 1 dof", dec(0, 1.0)),
    ("Anymal", "extend the left front knee", inc(2, 0.8)),
    ("Anymal", "bend left front knee", dec(2, 0.8)),
    ("Anymal", "left swing the right hind hip", dec(9)),
]


class _Task:
    def __init__(self, predicate):
        self.predicate = predicate


def verify(entity_spec, predicate_obj, program):
    predicate = predicate_from_obj(predicate_obj)
    result = simulate(program, entity_spec, SimConfig())
    if result.return_code != 0:
        raise SystemExit(
            f"fixture program errored ({result.error.kind}: {result.error.message})"
        )
    verdict = evaluate_trace(result, _Task(predicate))
    if not verdict.completed:
        raise SystemExit(f"fixture program fails its predicate: {verdict.reasons}")


def main() -> None:
    entities = load_all_entities()
    os.makedirs(SCRIPTED, exist_ok=True)

    bench_lines = []
    scripted_written = set()
    for entity_name, tasks in BENCHMARK:
        spec = entities[entity_name]
        for n, (text, predicate_obj) in enumerate(tasks, start=1):
            task_id = f"{entity_name.lower()}-{n:02d}"
            predicate = predicate_from_obj(predicate_obj)
            program = derive_program(predicate, spec)
            verify(spec, predicate_obj, program)
            bench_lines.append(
                json.dumps(
                    {
                        "id": task_id,
                        "entity": entity_name,
                        "text": text,
                        "predicate": predicate_obj,
                    }
                )
            )
            fixture_name = f"{entity_name.lower()}__{slugify(text)}.txt"
            if fixture_name not in scripted_written:
                scripted_written.add(fixture_name)
                body = (
                    f"# task: {entity_name}|{text}\n"
                    f"Here is an action program for the task.\n\n"
                    + serialize_program(program)
                )
                with open(os.path.join(SCRIPTED, fixture_name), "w") as fh:
                    fh.write(body)
    with open(os.path.join(DATA, "benchmark.jsonl"), "w") as fh:
        fh.write("\n".join(bench_lines) + "\n")
    print(f"wrote {len(bench_lines)} benchmark tasks, {len(scripted_written)} scripted fixtures")

    seed_lines = []
    for entity_name, text, predicate_obj in SEEDS:
        spec = entities[entity_name]
        predicate = predicate_from_obj(predicate_obj)
        program = derive_program(predicate, spec)
        verify(spec, predicate_obj, program)
        seed_lines.append(
            json.dumps(
                {
                    "entity": entity_name,
                    "task_text": text,
                    "program": _program_to_obj(program),
                    "predicate": predicate_obj,
                }
            )
        )
    with open(os.path.join(DATA, "seed_actions.jsonl"), "w") as fh:
        fh.write("\n".join(seed_lines) + "\n")
    print(f"wrote {len(seed_lines)} seed actions")


if __name__ == "__main__":
    main()
