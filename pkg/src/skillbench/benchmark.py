"""Benchmark tasks and the seed action library.

Ships 80 tasks across the seven entities and 24 seed skills, both as
line-delimited JSON fixtures under ``skillbench/data/``. Duplicate task
texts (the Anymal list repeats two entries) are preserved under distinct ids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .entities import ENTITY_NAMES, EntitySpec, load_all_entities
from .predicates import Predicate, predicate_from_obj
from .programs import ActionProgram
from .store import ActionSpace, make_record, program_from_obj

EXPECTED_TASK_COUNTS = {
    "Human": 18,
    "Ant": 8,
    "Cartpole": 7,
    "SektionCabinet": 7,
    "FrankaPanda": 17,
    "Kinova": 12,
    "Anymal": 11,
}

EXPECTED_SEED_COUNTS = {
    "Human": 15,
    "Ant": 2,
    "Cartpole": 1,
    "SektionCabinet": 1,
    "FrankaPanda": 1,
    "Kinova": 1,
    "Anymal": 3,
}


class BenchmarkError(ValueError):
    pass


@dataclass(frozen=True)
class TaskSpec:
    id: str
    entity: str
    text: str
    predicate: Predicate


@dataclass(frozen=True)
class SeedAction:
    entity: str
    task_text: str
    program: ActionProgram
    predicate: Predicate


def _data_text(filename: str) -> str:
    return resources.files("skillbench").joinpath("data", filename).read_text()


def load_benchmark(
    source: str | None = None,
    entities: dict[str, EntitySpec] | None = None,
) -> list[TaskSpec]:
    """Load the task list, checking counts, entities and predicate indices."""
    if source is None:
        source = _data_text("benchmark.jsonl")
    entities = entities or load_all_entities()
    tasks: list[TaskSpec] = []
    for lineno, line in enumerate(source.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except ValueError as exc:
            raise BenchmarkError(f"line {lineno}: malformed record ({exc})") from exc
        entity = obj.get("entity")
        if entity not in ENTITY_NAMES:
            raise BenchmarkError(f"line {lineno}: unknown entity {entity!r}")
        try:
            predicate = predicate_from_obj(obj["predicate"])
        except (KeyError, ValueError) as exc:
            raise BenchmarkError(f"line {lineno}: invalid predicate ({exc})") from exc
        invalid = {
            d for d in predicate.dofs() if not 0 <= d < entities[entity].dof_count
        }
        if invalid:
            raise BenchmarkError(
                f"line {lineno}: predicate references dofs {sorted(invalid)} "
                f"outside {entity}"
            )
        tasks.append(
            TaskSpec(id=obj["id"], entity=entity, text=obj["text"], predicate=predicate)
        )
    counts = {name: sum(1 for t in tasks if t.entity == name) for name in ENTITY_NAMES}
    if counts != EXPECTED_TASK_COUNTS:
        raise BenchmarkError(
            f"per-entity task counts {counts} do not match expected {EXPECTED_TASK_COUNTS}"
        )
    ids = [t.id for t in tasks]
    if len(set(ids)) != len(ids):
        raise BenchmarkError("task ids are not unique")
    return tasks


def load_seed_actions(source: str | None = None) -> list[SeedAction]:
    if source is None:
        source = _data_text("seed_actions.jsonl")
    seeds: list[SeedAction] = []
    for lineno, line in enumerate(source.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except ValueError as exc:
            raise BenchmarkError(f"line {lineno}: malformed seed record ({exc})") from exc
        seeds.append(
            SeedAction(
                entity=obj["entity"],
                task_text=obj["task_text"],
                program=program_from_obj(obj["program"]),
                predicate=predicate_from_obj(obj["predicate"]),
            )
        )
    counts = {
        name: sum(1 for s in seeds if s.entity == name) for name in ENTITY_NAMES
    }
    if counts != EXPECTED_SEED_COUNTS:
        raise BenchmarkError(
            f"per-entity seed counts {counts} do not match expected {EXPECTED_SEED_COUNTS}"
        )
    return seeds


def seed_initial_space(embedder, space: ActionSpace | None = None) -> ActionSpace:
    """Populate a store with the seed skills. Idempotent (commit dedupes)."""
    space = space or ActionSpace()
    records = [
        make_record(
            entity=seed.entity,
            task_text=seed.task_text,
            program=seed.program,
            embedder=embedder,
            provenance="Seed",
        )
        for seed in load_seed_actions()
    ]
    space.commit(records, entities=load_all_entities())
    return space


def lint_seed_overlap(tasks: list[TaskSpec], seeds: list[SeedAction]) -> list[str]:
    """Texts appearing both as seeds and benchmark tasks (flagged, not fatal)."""
    task_keys = {(t.entity, t.text) for t in tasks}
    return [
        f"{s.entity}: {s.task_text!r}"
        for s in seeds
        if (s.entity, s.task_text) in task_keys
    ]
