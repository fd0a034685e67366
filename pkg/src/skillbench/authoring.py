"""Construct action programs that satisfy a given predicate.

Used to author fixture data (seed skills and scripted provider responses):
walk the predicate tree, emit state destinations that establish each atom in
order, and verify by simulation before shipping. This is tooling for fixture
generation and tests, not part of the solve loop.
"""

from __future__ import annotations

from .entities import EntitySpec, clamp, default_pose
from .predicates import (
    AllOf,
    AnyOf,
    FinalAt,
    Monotonic,
    NetChange,
    Oscillates,
    Predicate,
    Reaches,
    ReturnsToStart,
    Seq,
)
from .programs import ActionProgram

SOLVE_SPEED = 2.0


def derive_program(predicate: Predicate, entity: EntitySpec) -> ActionProgram:
    """A program whose simulated trajectory satisfies ``predicate``.

    The result uses a common speed for every touched DOF and, where an atom
    needs headroom a default start position does not offer, an explicit
    initial position.
    """
    start = dict(enumerate(default_pose(entity)))
    initial: dict[int, float] = {}
    states: list[dict[int, float]] = []
    _emit(predicate, entity, start, initial, states)
    speeds = {d: SOLVE_SPEED for d in predicate.dofs()}
    return ActionProgram(
        initial_positions=initial, speeds=speeds, states=states, repeat=1
    )


def _emit(
    predicate: Predicate,
    entity: EntitySpec,
    start: dict[int, float],
    initial: dict[int, float],
    states: list[dict[int, float]],
) -> None:
    if isinstance(predicate, (Seq, AllOf)):
        for child in predicate.children:
            _emit(child, entity, start, initial, states)
        return
    if isinstance(predicate, AnyOf):
        _emit(predicate.children[0], entity, start, initial, states)
        return
    if isinstance(predicate, (Reaches, FinalAt)):
        target = clamp(predicate.value, entity.dofs[predicate.dof])
        states.append({predicate.dof: target})
        start[predicate.dof] = target
        return
    if isinstance(predicate, NetChange):
        dof = entity.dofs[predicate.dof]
        origin = initial.get(predicate.dof, start[predicate.dof])
        margin = predicate.min_delta * 1.25
        target = origin + margin * predicate.direction
        if dof.limited and not dof.lower_limit <= target <= dof.upper_limit:
            # Not enough headroom from the default start: shift the initial
            # position toward the far end of the range.
            if predicate.direction > 0:
                origin = dof.upper_limit - margin
            else:
                origin = dof.lower_limit + margin
            origin = clamp(origin, dof)
            initial[predicate.dof] = origin
            target = clamp(origin + margin * predicate.direction, dof)
        states.append({predicate.dof: target})
        start[predicate.dof] = target
        return
    if isinstance(predicate, Monotonic):
        dof = entity.dofs[predicate.dof]
        if predicate.direction == "up":
            target = dof.upper_limit if dof.limited else start[predicate.dof] + 1.0
        else:
            target = dof.lower_limit if dof.limited else start[predicate.dof] - 1.0
        states.append({predicate.dof: target})
        start[predicate.dof] = target
        return
    if isinstance(predicate, ReturnsToStart):
        dof = entity.dofs[predicate.dof]
        origin = start[predicate.dof]
        away = clamp(origin + 0.5, dof)
        if abs(away - origin) < 0.1:
            away = clamp(origin - 0.5, dof)
        states.append({predicate.dof: away})
        states.append({predicate.dof: origin})
        start[predicate.dof] = origin
        return
    if isinstance(predicate, Oscillates):
        dof = entity.dofs[predicate.dof]
        origin = start[predicate.dof]
        hi = clamp(origin + predicate.min_amplitude, dof)
        lo = clamp(origin - predicate.min_amplitude, dof)
        if hi - lo < predicate.min_amplitude:
            raise ValueError(
                f"dof {predicate.dof} range too narrow for amplitude "
                f"{predicate.min_amplitude}"
            )
        for _ in range(predicate.min_cycles + 1):
            states.append({predicate.dof: hi})
            states.append({predicate.dof: lo})
        start[predicate.dof] = lo
        return
    raise ValueError(f"cannot derive a program for predicate op {predicate.op!r}")
