"""Action programs: data model, tolerant parsing, canonical serialization.

A program is a structured object with three parts mirroring the control
template the actor is prompted to produce:

* ``initial_dof_position`` -- starting position per referenced DOF
* ``speeds`` -- transition speed per DOF (position units per second)
* ``state_destination`` -- ordered list of target-position maps

plus an optional ``repeat`` cycle count over the state list. Providers emit
the object as JSON (or a Python-literal dict) inside a fenced code block;
the parser extracts the first well-formed block from arbitrary surrounding
prose. See docs/program_format.md for the grammar.
"""

from __future__ import annotations

import ast
import json
import math
from dataclasses import dataclass, field

from .entities import EntitySpec, clamp

DEFAULT_SPEED = 1.0
MAX_REPEAT = 100

_CANONICAL_KEYS = ("initial_dof_position", "speeds", "state_destination")


class ParseError(ValueError):
    """No program block found, or a block is structurally malformed.

    The message is written to be usable verbatim as repair feedback.
    """


@dataclass
class ActionProgram:
    initial_positions: dict[int, float] = field(default_factory=dict)
    speeds: dict[int, float] = field(default_factory=dict)
    states: list[dict[int, float]] = field(default_factory=list)
    repeat: int = 1

    def referenced_dofs(self) -> set[int]:
        refs = set(self.initial_positions) | set(self.speeds)
        for state in self.states:
            refs |= set(state)
        return refs


@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # "Error" | "Clamped"
    dof_index: int | None
    message: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    issues: tuple[ValidationIssue, ...]

    def errors(self) -> list[ValidationIssue]:
        return [i for i in self.issues if i.severity == "Error"]


def parse_program(text: str, entity: EntitySpec | None = None) -> ActionProgram:
    """Extract the first well-formed program block from provider output.

    Accepts the canonical object bare, inside code fences, or surrounded by
    prose. Never raises anything but :class:`ParseError` on arbitrary input.
    DOFs the program does not reference keep their entity defaults at
    simulation time; the ``entity`` argument is accepted for call-site
    symmetry and index validation happens in :func:`validate_program`.
    """
    if not isinstance(text, str):
        raise ParseError("no action block found: provider output was not text")
    block = _find_program_object(text)
    if block is None:
        raise ParseError(
            "no action block found: emit a fenced code block containing a JSON "
            "object with keys initial_dof_position, speeds, state_destination"
        )
    return _program_from_object(block)


def _find_program_object(text: str) -> dict | None:
    """Scan for the first balanced object literal that looks like a program."""
    decoder = json.JSONDecoder()
    pos = text.find("{")
    while pos != -1:
        candidate = None
        try:
            candidate, _ = decoder.raw_decode(text, pos)
        except (ValueError, RecursionError):
            candidate = _try_python_literal(text, pos)
        if isinstance(candidate, dict) and any(k in candidate for k in _CANONICAL_KEYS):
            return candidate
        pos = text.find("{", pos + 1)
    return None


def _try_python_literal(text: str, start: int) -> dict | None:
    """Fallback for python-style dicts (single quotes, int keys)."""
    depth = 0
    for end in range(start, min(len(text), start + 100_000)):
        ch = text[end]
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                snippet = text[start : end + 1]
                try:
                    value = ast.literal_eval(snippet)
                except (ValueError, SyntaxError, MemoryError, RecursionError):
                    return None
                return value if isinstance(value, dict) else None
    return None


def _program_from_object(obj: dict) -> ActionProgram:
    initial = _index_map(obj.get("initial_dof_position", {}), "initial_dof_position")
    speeds = _index_map(obj.get("speeds", {}), "speeds")
    raw_states = obj.get("state_destination", [])
    if not isinstance(raw_states, list):
        raise ParseError("state_destination must be a list of DOF->position maps")
    states = [
        _index_map(state, f"state_destination[{i}]")
        for i, state in enumerate(raw_states)
    ]
    repeat = obj.get("repeat", 1)
    if isinstance(repeat, bool) or not isinstance(repeat, int) or repeat < 1:
        raise ParseError("repeat must be a positive integer")
    return ActionProgram(
        initial_positions=initial, speeds=speeds, states=states, repeat=repeat
    )


def _index_map(value, where: str) -> dict[int, float]:
    if not isinstance(value, dict):
        raise ParseError(f"{where} must be a map of DOF index to number")
    result: dict[int, float] = {}
    for key, raw in value.items():
        try:
            index = int(key)
        except (TypeError, ValueError):
            raise ParseError(f"{where}: key {key!r} is not a DOF index") from None
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ParseError(f"{where}: value for DOF {index} is not a number")
        result[index] = float(raw)
    return result


def validate_program(program: ActionProgram, entity: EntitySpec) -> ValidationReport:
    """Check a structurally valid program against an entity.

    Out-of-range indices, non-positive speeds, non-finite numbers and
    oversized repeat counts are Errors; in-range targets outside a limited
    DOF's limits are non-fatal Clamped notes.
    """
    issues: list[ValidationIssue] = []
    n = entity.dof_count

    def check_index(index: int) -> bool:
        if 0 <= index < n:
            return True
        issues.append(
            ValidationIssue(
                "Error", index, f"dof index {index} out of range [0,{n - 1}]"
            )
        )
        return False

    for index, value in sorted(program.initial_positions.items()):
        if not check_index(index):
            continue
        _check_value(issues, index, value, "initial position", entity)
    for index, speed in sorted(program.speeds.items()):
        if not check_index(index):
            continue
        if not math.isfinite(speed):
            issues.append(
                ValidationIssue("Error", index, f"speed for dof {index} is not finite")
            )
        elif speed <= 0:
            issues.append(
                ValidationIssue(
                    "Error", index, f"speed for dof {index} must be > 0, got {speed}"
                )
            )
    for state_i, state in enumerate(program.states):
        for index, value in sorted(state.items()):
            if not check_index(index):
                continue
            _check_value(
                issues, index, value, f"target in state {state_i}", entity
            )
    if program.repeat > MAX_REPEAT:
        issues.append(
            ValidationIssue(
                "Error", None, f"repeat {program.repeat} exceeds the cap of {MAX_REPEAT}"
            )
        )
    ok = not any(i.severity == "Error" for i in issues)
    return ValidationReport(ok=ok, issues=tuple(issues))


def _check_value(
    issues: list[ValidationIssue],
    index: int,
    value: float,
    what: str,
    entity: EntitySpec,
) -> None:
    if not math.isfinite(value):
        issues.append(ValidationIssue("Error", index, f"{what} for dof {index} is not finite"))
        return
    dof = entity.dofs[index]
    clamped = clamp(value, dof)
    if clamped != value:
        issues.append(
            ValidationIssue(
                "Clamped",
                index,
                f"{what} {value} for dof {index} ({dof.name}) clamped to {clamped}",
            )
        )


def serialize_program(program: ActionProgram) -> str:
    """Canonical deterministic text form; round-trips through parse_program."""
    obj = {
        "initial_dof_position": {
            str(k): program.initial_positions[k]
            for k in sorted(program.initial_positions)
        },
        "speeds": {str(k): program.speeds[k] for k in sorted(program.speeds)},
        "state_destination": [
            {str(k): state[k] for k in sorted(state)} for state in program.states
        ],
        "repeat": program.repeat,
    }
    body = json.dumps(obj, indent=2, sort_keys=False)
    return f"```action\n{body}\n```\n"
