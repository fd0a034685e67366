"""Deterministic joint-space execution of action programs.

Constant-rate kinematic interpolation: each targeted DOF closes on its
(clamped) target by at most speed*dt per step; untargeted DOFs hold. A state
completes when every targeted DOF is within the configured tolerance of its
target, at which point a keyframe is recorded. Stiffness/damping/armature are
entity metadata only and never enter the integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .entities import EntitySpec, clamp, default_pose
from .programs import DEFAULT_SPEED, ActionProgram


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1.0 / 60.0
    tolerance: float = 1e-3
    max_steps: int = 5000

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class Keyframe:
    step_index: int
    state_index: int
    cycle_index: int


@dataclass
class Trajectory:
    entity_name: str
    poses: list[list[float]]
    keyframes: list[Keyframe]

    @property
    def step_count(self) -> int:
        return len(self.poses) - 1


@dataclass(frozen=True)
class SimError:
    kind: str  # "InvalidDof" | "BadSpeed" | "Timeout" | "NonFinite"
    message: str


@dataclass
class SimResult:
    return_code: int  # 0 success, 1 error
    trajectory: Trajectory | None = None
    error: SimError | None = None

    def __post_init__(self) -> None:
        assert (self.trajectory is None) != (self.error is None)


def simulate(
    program: ActionProgram, entity: EntitySpec, config: SimConfig = SimConfig()
) -> SimResult:
    """Execute a program against an entity. Never raises; errors are code 1."""
    error = _structural_check(program, entity)
    if error is not None:
        return SimResult(return_code=1, error=error)

    pose = default_pose(entity)
    for index, value in program.initial_positions.items():
        pose[index] = clamp(value, entity.dofs[index])

    poses = [list(pose)]
    keyframes: list[Keyframe] = []
    tol = config.tolerance
    steps = 0

    for cycle in range(program.repeat):
        for state_index, state in enumerate(program.states):
            targets = {
                index: clamp(value, entity.dofs[index])
                for index, value in state.items()
            }
            rates = {
                index: program.speeds.get(index, DEFAULT_SPEED) * config.dt
                for index in targets
            }
            steps_at_entry = steps
            while not _arrived(pose, targets, tol):
                if steps >= config.max_steps:
                    return SimResult(
                        return_code=1,
                        error=SimError(
                            "Timeout",
                            f"exceeded max_steps={config.max_steps} before reaching "
                            f"state {state_index} of cycle {cycle}",
                        ),
                    )
                for index, target in targets.items():
                    delta = target - pose[index]
                    step = rates[index]
                    if abs(delta) <= step:
                        pose[index] = target
                    else:
                        pose[index] += math.copysign(step, delta)
                poses.append(list(pose))
                steps += 1
            if steps == steps_at_entry:
                # Zero-distance state: consume one hold step so keyframe step
                # indices stay strictly increasing and distinct from the start.
                if steps >= config.max_steps:
                    return SimResult(
                        return_code=1,
                        error=SimError(
                            "Timeout",
                            f"exceeded max_steps={config.max_steps} before reaching "
                            f"state {state_index} of cycle {cycle}",
                        ),
                    )
                poses.append(list(pose))
                steps += 1
            keyframes.append(Keyframe(steps, state_index, cycle))

    return SimResult(
        return_code=0,
        trajectory=Trajectory(entity_name=entity.name, poses=poses, keyframes=keyframes),
    )


def _arrived(pose: list[float], targets: dict[int, float], tol: float) -> bool:
    return all(abs(pose[index] - target) <= tol for index, target in targets.items())


def _structural_check(program: ActionProgram, entity: EntitySpec) -> SimError | None:
    n = entity.dof_count
    for index in sorted(program.referenced_dofs()):
        if not 0 <= index < n:
            return SimError(
                "InvalidDof", f"dof index {index} out of range [0,{n - 1}]"
            )
    for index, speed in sorted(program.speeds.items()):
        if not math.isfinite(speed):
            return SimError("NonFinite", f"speed for dof {index} is not finite")
        if speed <= 0:
            return SimError("BadSpeed", f"speed for dof {index} must be > 0, got {speed}")
    for index, value in sorted(program.initial_positions.items()):
        if not math.isfinite(value):
            return SimError("NonFinite", f"initial position for dof {index} is not finite")
    for state_i, state in enumerate(program.states):
        for index, value in sorted(state.items()):
            if not math.isfinite(value):
                return SimError(
                    "NonFinite", f"target for dof {index} in state {state_i} is not finite"
                )
    if program.repeat < 1:
        return SimError("BadSpeed", "repeat must be >= 1")
    return None


def keyframe_poses(trajectory: Trajectory) -> list[list[float]]:
    """Initial pose followed by the pose at each keyframe, in order."""
    return [list(trajectory.poses[0])] + [
        list(trajectory.poses[kf.step_index]) for kf in trajectory.keyframes
    ]


def export_trajectory(trajectory: Trajectory, config: SimConfig) -> str:
    """Structured text export: header lines, then one whitespace-joined pose per line."""
    lines = [
        f"# entity: {trajectory.entity_name}",
        f"# dt: {config.dt!r}",
        f"# tolerance: {config.tolerance!r}",
        f"# keyframes: {' '.join(str(kf.step_index) for kf in trajectory.keyframes)}",
    ]
    for pose in trajectory.poses:
        lines.append(" ".join(repr(v) for v in pose))
    return "\n".join(lines) + "\n"
