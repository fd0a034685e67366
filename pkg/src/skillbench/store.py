"""The growing action library: per-entity records, commits, snapshots, persistence.

Records are partitioned by entity (programs for one entity cannot bind to
another's DOF layout). Commits are serialized and bump a monotone version;
reads go through immutable per-entity snapshots so searches inside an
iteration never observe records committed at the iteration boundary.
Persistence is an append-only line log of structured records replayed on load.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass

import numpy as np

from . import programs as programs_mod
from .embedding import Embedding
from .entities import EntitySpec
from .programs import ActionProgram

STORE_SCHEMA = "skillbench-action-store/1"


class StoreError(RuntimeError):
    pass


@dataclass(frozen=True)
class ActionRecord:
    id: str
    entity: str
    task_text: str
    program: ActionProgram
    embedding: Embedding
    provenance: str  # "Seed" or "Learned"
    iteration: int | None = None
    run_id: str | None = None
    created_at: float = 0.0


class EntitySnapshot:
    """Immutable view of one entity's partition at a fixed store version."""

    def __init__(self, entity: str, records: tuple[ActionRecord, ...], version: int):
        self.entity = entity
        self.records = records
        self.version = version
        self._matrix: np.ndarray | None = None

    def embedding_matrix(self) -> np.ndarray:
        if self._matrix is None:
            if self.records:
                self._matrix = np.stack([r.embedding.as_array() for r in self.records])
            else:
                self._matrix = np.empty((0, 0), dtype=np.float64)
        return self._matrix

    def __len__(self) -> int:
        return len(self.records)


class ActionSpace:
    """Mutable store. Snapshots are cheap immutable views; commits are locked."""

    def __init__(self) -> None:
        self._partitions: dict[str, list[ActionRecord]] = {}
        self._version = 0
        self._lock = threading.Lock()
        # Event history (record upserts + commit boundaries) for persistence replay.
        self._events: list[dict] = []

    @property
    def version(self) -> int:
        return self._version

    def size(self, entity: str | None = None) -> int:
        with self._lock:
            if entity is not None:
                return len(self._partitions.get(entity, []))
            return sum(len(p) for p in self._partitions.values())

    def entities(self) -> list[str]:
        with self._lock:
            return sorted(self._partitions)

    def snapshot(self, entity: str) -> EntitySnapshot:
        with self._lock:
            records = tuple(self._partitions.get(entity, ()))
            return EntitySnapshot(entity=entity, records=records, version=self._version)

    def get(self, entity: str, task_text: str) -> ActionRecord | None:
        with self._lock:
            for record in self._partitions.get(entity, ()):
                if record.task_text == task_text:
                    return record
        return None

    def commit(self, passed: list[ActionRecord], entities: dict[str, EntitySpec] | None = None) -> int:
        """Apply one update batch: union with task_text dedupe, version += 1.

        A record whose (entity, task_text) already exists replaces the stored
        program in place; novel task_texts append. An empty batch still bumps
        the version (it marks an iteration boundary). Returns the new version.
        """
        if entities is not None:
            for record in passed:
                entity = entities.get(record.entity)
                if entity is None:
                    raise StoreError(f"unknown entity {record.entity!r}")
                report = programs_mod.validate_program(record.program, entity)
                if not report.ok:
                    raise StoreError(
                        f"record {record.task_text!r} fails validation: "
                        + "; ".join(i.message for i in report.errors())
                    )
        with self._lock:
            self._version += 1
            for record in passed:
                self._upsert(record)
                self._events.append(_record_event(record, self._version))
            self._events.append({"type": "commit", "version": self._version})
            return self._version

    def _upsert(self, record: ActionRecord) -> None:
        partition = self._partitions.setdefault(record.entity, [])
        for i, existing in enumerate(partition):
            if existing.task_text == record.task_text:
                partition[i] = record
                return
        partition.append(record)

    def save(self, path: str) -> None:
        lines = [json.dumps({"schema": STORE_SCHEMA})]
        lines.extend(json.dumps(event, sort_keys=True) for event in self._events)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str) -> "ActionSpace":
        space = cls()
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if not lines:
            raise StoreError(f"{path}: empty store file")
        header = _parse_line(path, 1, lines[0])
        if header.get("schema") != STORE_SCHEMA:
            raise StoreError(f"{path}: unsupported schema {header.get('schema')!r}")
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            event = _parse_line(path, lineno, line)
            kind = event.get("type")
            if kind == "record":
                record = _record_from_event(path, lineno, event)
                space._upsert(record)
                space._events.append(event)
            elif kind == "commit":
                space._version = int(event["version"])
                space._events.append(event)
            else:
                raise StoreError(f"{path}: line {lineno}: unknown event type {kind!r}")
        return space


def _parse_line(path: str, lineno: int, line: str) -> dict:
    try:
        value = json.loads(line)
    except ValueError as exc:
        raise StoreError(f"{path}: line {lineno}: corrupt log line ({exc})") from exc
    if not isinstance(value, dict):
        raise StoreError(f"{path}: line {lineno}: corrupt log line (not an object)")
    return value


def _record_event(record: ActionRecord, version: int) -> dict:
    return {
        "type": "record",
        "version": version,
        "id": record.id,
        "entity": record.entity,
        "task_text": record.task_text,
        "program": _program_to_obj(record.program),
        "embedding": list(record.embedding.values),
        "provenance": record.provenance,
        "iteration": record.iteration,
        "run_id": record.run_id,
        "created_at": record.created_at,
    }


def _record_from_event(path: str, lineno: int, event: dict) -> ActionRecord:
    try:
        return ActionRecord(
            id=event["id"],
            entity=event["entity"],
            task_text=event["task_text"],
            program=program_from_obj(event["program"]),
            embedding=Embedding(values=tuple(event["embedding"])),
            provenance=event["provenance"],
            iteration=event.get("iteration"),
            run_id=event.get("run_id"),
            created_at=event.get("created_at", 0.0),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise StoreError(f"{path}: line {lineno}: corrupt record ({exc})") from exc


def _program_to_obj(program: ActionProgram) -> dict:
    return {
        "initial_dof_position": {str(k): v for k, v in sorted(program.initial_positions.items())},
        "speeds": {str(k): v for k, v in sorted(program.speeds.items())},
        "state_destination": [
            {str(k): v for k, v in sorted(state.items())} for state in program.states
        ],
        "repeat": program.repeat,
    }


def program_from_obj(obj: dict) -> ActionProgram:
    return ActionProgram(
        initial_positions={int(k): float(v) for k, v in obj.get("initial_dof_position", {}).items()},
        speeds={int(k): float(v) for k, v in obj.get("speeds", {}).items()},
        states=[
            {int(k): float(v) for k, v in state.items()}
            for state in obj.get("state_destination", [])
        ],
        repeat=int(obj.get("repeat", 1)),
    )


def make_record(
    entity: str,
    task_text: str,
    program: ActionProgram,
    embedder,
    provenance: str = "Learned",
    iteration: int | None = None,
    run_id: str | None = None,
) -> ActionRecord:
    return ActionRecord(
        id=f"{entity}:{slugify(task_text)}",
        entity=entity,
        task_text=task_text,
        program=program,
        embedding=embedder.embed(task_text),
        provenance=provenance,
        iteration=iteration,
        run_id=run_id,
        created_at=time.time(),
    )


def slugify(text: str) -> str:
    out = []
    for ch in text.lower().strip():
        out.append(ch if ch.isalnum() else "_")
    slug = "".join(out)
    while "__" in slug:
        slug = slug.replace("__", "_")
    return slug.strip("_")
