"""Machine-checkable success predicates over simulated trajectories.

A predicate is an expression tree over per-DOF atoms plus the combinators
``all_of``, ``any_of`` and ``seq`` (sequencing: each child must hold with a
witness step strictly after its predecessor's). Atoms evaluate over a window
of the trajectory starting at a given step and report a witness step, an
observed value, and a templated remedy usable as repair feedback.

Benchmark fixtures store predicates as JSON objects, e.g.::

    {"op": "reaches", "dof": 2, "value": 0.35, "tol": 0.05}
    {"op": "all", "children": [...]}
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .simulator import Trajectory


@dataclass
class PredicateResult:
    ok: bool
    witness: int  # step index establishing the predicate (valid when ok)
    reason: str
    remedy: str


class Predicate:
    """Base class; subclasses implement evaluate(trajectory, start)."""

    op = "?"

    def evaluate(self, trajectory: Trajectory, start: int = 0) -> PredicateResult:
        raise NotImplementedError

    def dofs(self) -> set[int]:
        raise NotImplementedError

    def to_obj(self) -> dict:
        raise NotImplementedError


def _series(trajectory: Trajectory, dof: int, start: int) -> list[float]:
    return [pose[dof] for pose in trajectory.poses[start:]]


@dataclass
class FinalAt(Predicate):
    dof: int
    value: float
    tol: float
    op = "final_at"

    def evaluate(self, trajectory: Trajectory, start: int = 0) -> PredicateResult:
        final = trajectory.poses[-1][self.dof]
        ok = abs(final - self.value) <= self.tol
        return PredicateResult(
            ok=ok,
            witness=len(trajectory.poses) - 1,
            reason=(
                f"dof {self.dof} ended at {final:.4f}, required {self.value:.4f} "
                f"within {self.tol:.4f}"
            ),
            remedy=(
                f"make the final state destination leave dof {self.dof} at "
                f"{self.value:.4f}"
            ),
        )

    def dofs(self) -> set[int]:
        return {self.dof}

    def to_obj(self) -> dict:
        return {"op": self.op, "dof": self.dof, "value": self.value, "tol": self.tol}


@dataclass
class Reaches(Predicate):
    dof: int
    value: float
    tol: float
    op = "reaches"

    def evaluate(self, trajectory: Trajectory, start: int = 0) -> PredicateResult:
        closest = None
        for t in range(start, len(trajectory.poses)):
            observed = trajectory.poses[t][self.dof]
            gap = abs(observed - self.value)
            if closest is None or gap < closest[1]:
                closest = (t, gap)
            if gap <= self.tol:
                return PredicateResult(
                    ok=True,
                    witness=t,
                    reason=f"dof {self.dof} reached {self.value:.4f} at step {t}",
                    remedy="",
                )
        gap = closest[1] if closest else float("inf")
        return PredicateResult(
            ok=False,
            witness=-1,
            reason=(
                f"dof {self.dof} never came within {self.tol:.4f} of "
                f"{self.value:.4f} (closest gap {gap:.4f})"
            ),
            remedy=(
                f"drive dof {self.dof} to {self.value:.4f} by adding it to a "
                f"state destination"
            ),
        )

    def dofs(self) -> set[int]:
        return {self.dof}

    def to_obj(self) -> dict:
        return {"op": self.op, "dof": self.dof, "value": self.value, "tol": self.tol}


@dataclass
class NetChange(Predicate):
    """Net signed change (last minus first pose in the window) of one DOF."""

    dof: int
    min_delta: float
    direction: int  # +1 increases, -1 decreases
    op = "net_change"

    def evaluate(self, trajectory: Trajectory, start: int = 0) -> PredicateResult:
        series = _series(trajectory, self.dof, start)
        net = (series[-1] - series[0]) * self.direction
        word = "increase" if self.direction > 0 else "decrease"
        if net >= self.min_delta:
            # Witness: first step in the window achieving the required change.
            witness = start
            for offset, value in enumerate(series):
                if (value - series[0]) * self.direction >= self.min_delta:
                    witness = start + offset
                    break
            return PredicateResult(
                ok=True,
                witness=witness,
                reason=f"dof {self.dof} net {word} {net:.4f}",
                remedy="",
            )
        return PredicateResult(
            ok=False,
            witness=-1,
            reason=(
                f"dof {self.dof} net signed change was {net * self.direction:+.4f}, "
                f"required a {word} of at least {self.min_delta:.4f}"
            ),
            remedy=(
                f"move dof {self.dof} {'toward its upper limit' if self.direction > 0 else 'toward its lower limit'} "
                f"by at least {self.min_delta:.4f} and leave it there"
            ),
        )

    def dofs(self) -> set[int]:
        return {self.dof}

    def to_obj(self) -> dict:
        op = "increases" if self.direction > 0 else "decreases"
        return {"op": op, "dof": self.dof, "min_delta": self.min_delta}


@dataclass
class Monotonic(Predicate):
    dof: int
    direction: str  # "up" | "down"
    op = "monotonic"
    _slack = 1e-9

    def evaluate(self, trajectory: Trajectory, start: int = 0) -> PredicateResult:
        series = _series(trajectory, self.dof, start)
        sign = 1.0 if self.direction == "up" else -1.0
        for offset in range(1, len(series)):
            if (series[offset] - series[offset - 1]) * sign < -self._slack:
                return PredicateResult(
                    ok=False,
                    witness=-1,
                    reason=(
                        f"dof {self.dof} moved {'down' if sign > 0 else 'up'} at "
                        f"step {start + offset} "
                        f"({series[offset - 1]:.4f} -> {series[offset]:.4f}), "
                        f"required monotonic {self.direction}"
                    ),
                    remedy=(
                        f"order the state destinations so dof {self.dof} only "
                        f"moves {self.direction}"
                    ),
                )
        return PredicateResult(
            ok=True,
            witness=len(trajectory.poses) - 1,
            reason=f"dof {self.dof} is monotonic {self.direction}",
            remedy="",
        )

    def dofs(self) -> set[int]:
        return {self.dof}

    def to_obj(self) -> dict:
        return {"op": self.op, "dof": self.dof, "direction": self.direction}


@dataclass
class ReturnsToStart(Predicate):
    dof: int
    tol: float
    op = "returns_to_start"

    def evaluate(self, trajectory: Trajectory, start: int = 0) -> PredicateResult:
        series = _series(trajectory, self.dof, start)
        gap = abs(series[-1] - series[0])
        ok = gap <= self.tol
        return PredicateResult(
            ok=ok,
            witness=len(trajectory.poses) - 1,
            reason=(
                f"dof {self.dof} ended {gap:.4f} away from its start, "
                f"tolerance {self.tol:.4f}"
            ),
            remedy=(
                f"append a final state destination returning dof {self.dof} to "
                f"its starting position"
            ),
        )

    def dofs(self) -> set[int]:
        return {self.dof}

    def to_obj(self) -> dict:
        return {"op": self.op, "dof": self.dof, "tol": self.tol}


@dataclass
class Oscillates(Predicate):
    """At least ``min_cycles`` back-and-forth swing pairs of one DOF.

    A swing is the excursion between consecutive direction reversals; it
    qualifies when its range is at least ``min_amplitude``. A cycle is two
    consecutive qualifying swings.
    """

    dof: int
    min_amplitude: float
    min_cycles: int
    op = "oscillates"

    def evaluate(self, trajectory: Trajectory, start: int = 0) -> PredicateResult:
        series = _series(trajectory, self.dof, start)
        extrema = _extrema(series)
        qualifying = 0
        cycles = 0
        witness = -1
        for i in range(1, len(extrema)):
            step_prev, value_prev = extrema[i - 1]
            step_cur, value_cur = extrema[i]
            if abs(value_cur - value_prev) >= self.min_amplitude:
                qualifying += 1
            else:
                qualifying = 0
            if qualifying >= 2:
                cycles += 1
                qualifying = 0
                if cycles == self.min_cycles:
                    witness = start + step_cur
        if cycles >= self.min_cycles:
            return PredicateResult(
                ok=True,
                witness=witness,
                reason=(
                    f"dof {self.dof} completed {cycles} oscillation cycle(s) of "
                    f"amplitude >= {self.min_amplitude:.4f}"
                ),
                remedy="",
            )
        return PredicateResult(
            ok=False,
            witness=-1,
            reason=(
                f"dof {self.dof} completed {cycles} oscillation cycle(s) of "
                f"amplitude >= {self.min_amplitude:.4f}, required {self.min_cycles}"
            ),
            remedy=(
                f"alternate dof {self.dof} between two positions at least "
                f"{self.min_amplitude:.4f} apart, {self.min_cycles} time(s) each way "
                f"(use repeat for cycles)"
            ),
        )

    def dofs(self) -> set[int]:
        return {self.dof}

    def to_obj(self) -> dict:
        return {
            "op": self.op,
            "dof": self.dof,
            "min_amplitude": self.min_amplitude,
            "min_cycles": self.min_cycles,
        }


def _extrema(series: list[float]) -> list[tuple[int, float]]:
    """Indices and values of the series' turning points, endpoints included."""
    if not series:
        return []
    points = [(0, series[0])]
    direction = 0
    for i in range(1, len(series)):
        delta = series[i] - series[i - 1]
        if delta == 0:
            continue
        new_direction = 1 if delta > 0 else -1
        if direction != 0 and new_direction != direction:
            points.append((i - 1, series[i - 1]))
        direction = new_direction
    last = (len(series) - 1, series[-1])
    if points[-1][0] != last[0]:
        points.append(last)
    return points


@dataclass
class Combinator(Predicate):
    children: tuple[Predicate, ...]

    def dofs(self) -> set[int]:
        out: set[int] = set()
        for child in self.children:
            out |= child.dofs()
        return out

    def to_obj(self) -> dict:
        return {"op": self.op, "children": [c.to_obj() for c in self.children]}


class AllOf(Combinator):
    op = "all"

    def evaluate(self, trajectory: Trajectory, start: int = 0) -> PredicateResult:
        witness = start
        for child in self.children:
            result = child.evaluate(trajectory, start)
            if not result.ok:
                return result
            witness = max(witness, result.witness)
        return PredicateResult(ok=True, witness=witness, reason="all conditions hold", remedy="")


class AnyOf(Combinator):
    op = "any"

    def evaluate(self, trajectory: Trajectory, start: int = 0) -> PredicateResult:
        first_failure = None
        for child in self.children:
            result = child.evaluate(trajectory, start)
            if result.ok:
                return result
            if first_failure is None:
                first_failure = result
        assert first_failure is not None
        return first_failure


class Seq(Combinator):
    op = "seq"

    def evaluate(self, trajectory: Trajectory, start: int = 0) -> PredicateResult:
        cursor = start
        last = PredicateResult(ok=True, witness=start, reason="empty sequence", remedy="")
        for i, child in enumerate(self.children):
            if cursor >= len(trajectory.poses):
                return PredicateResult(
                    ok=False,
                    witness=-1,
                    reason=f"trajectory ended before phase {i + 1} of the sequence",
                    remedy="add state destinations for the later phases of the task",
                )
            last = child.evaluate(trajectory, cursor)
            if not last.ok:
                return last
            cursor = last.witness + 1
        return last


_ATOM_BUILDERS: dict[str, Callable[[dict], Predicate]] = {
    "final_at": lambda o: FinalAt(int(o["dof"]), float(o["value"]), float(o["tol"])),
    "reaches": lambda o: Reaches(int(o["dof"]), float(o["value"]), float(o["tol"])),
    "increases": lambda o: NetChange(int(o["dof"]), float(o["min_delta"]), +1),
    "decreases": lambda o: NetChange(int(o["dof"]), float(o["min_delta"]), -1),
    "monotonic": lambda o: Monotonic(int(o["dof"]), str(o["direction"])),
    "returns_to_start": lambda o: ReturnsToStart(int(o["dof"]), float(o["tol"])),
    "oscillates": lambda o: Oscillates(
        int(o["dof"]), float(o["min_amplitude"]), int(o["min_cycles"])
    ),
}

_COMBINATORS = {"all": AllOf, "any": AnyOf, "seq": Seq}


def predicate_from_obj(obj: dict) -> Predicate:
    """Build a predicate tree from its JSON fixture form."""
    op = obj.get("op")
    if op in _COMBINATORS:
        children = tuple(predicate_from_obj(c) for c in obj.get("children", []))
        if not children:
            raise ValueError(f"combinator {op!r} requires children")
        return _COMBINATORS[op](children=children)
    builder = _ATOM_BUILDERS.get(op)
    if builder is None:
        raise ValueError(f"unknown predicate op {op!r}")
    try:
        return builder(obj)
    except KeyError as exc:
        raise ValueError(f"predicate {op!r} missing field {exc}") from exc
