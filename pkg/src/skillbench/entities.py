"""Articulated entities and their degrees of freedom.

Entity definitions are loaded from line-oriented config files (one DOF per
line, pipe-separated columns). The seven shipped entities live under
``skillbench/data/entities/``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

ENTITY_NAMES = (
    "Human",
    "Ant",
    "Cartpole",
    "SektionCabinet",
    "FrankaPanda",
    "Kinova",
    "Anymal",
)

EXPECTED_DOF_COUNTS = {
    "Human": 21,
    "Ant": 8,
    "Cartpole": 2,
    "SektionCabinet": 4,
    "FrankaPanda": 9,
    "Kinova": 6,
    "Anymal": 12,
}

_CONFIG_FILES = {
    "Human": "human.txt",
    "Ant": "ant.txt",
    "Cartpole": "cartpole.txt",
    "SektionCabinet": "sektion_cabinet.txt",
    "FrankaPanda": "franka_panda.txt",
    "Kinova": "kinova.txt",
    "Anymal": "anymal.txt",
}


class EntityConfigError(ValueError):
    """Malformed or inconsistent entity config."""


@dataclass(frozen=True)
class DofSpec:
    index: int
    name: str
    kind: str  # "Rotation" | "Translation"
    stiffness: float
    damping: float
    armature: float
    limited: bool
    lower_limit: float
    upper_limit: float
    default_position: float

    def __post_init__(self) -> None:
        if self.kind not in ("Rotation", "Translation"):
            raise EntityConfigError(f"dof {self.index}: unknown kind {self.kind!r}")
        if self.lower_limit > self.upper_limit:
            raise EntityConfigError(
                f"dof {self.index} ({self.name}): lower limit {self.lower_limit} "
                f"> upper limit {self.upper_limit}"
            )
        if self.limited and not (
            self.lower_limit <= self.default_position <= self.upper_limit
        ):
            raise EntityConfigError(
                f"dof {self.index} ({self.name}): default {self.default_position} "
                f"outside [{self.lower_limit}, {self.upper_limit}]"
            )
        for field_name in ("stiffness", "damping", "armature"):
            if getattr(self, field_name) < 0:
                raise EntityConfigError(
                    f"dof {self.index} ({self.name}): {field_name} must be >= 0"
                )


@dataclass(frozen=True)
class EntitySpec:
    name: str
    dofs: tuple[DofSpec, ...]

    def __post_init__(self) -> None:
        indices = [d.index for d in self.dofs]
        if indices != list(range(len(self.dofs))):
            dupes = {i for i in indices if indices.count(i) > 1}
            if dupes:
                raise EntityConfigError(f"duplicate dof index {sorted(dupes)[0]}")
            raise EntityConfigError(
                f"dof indices must be contiguous 0..{len(self.dofs) - 1}, got {indices}"
            )
        names = [d.name for d in self.dofs]
        if len(set(names)) != len(names):
            raise EntityConfigError("duplicate dof names")

    @property
    def dof_count(self) -> int:
        return len(self.dofs)


def load_entity(source: str) -> EntitySpec:
    """Parse an entity config text into an :class:`EntitySpec`.

    Format: a ``# entity: <name>`` header, then one pipe-separated record per
    DOF: index|name|kind|stiffness|damping|armature|limited|lower|upper|default.
    Blank lines and additional ``#`` comments are ignored.
    """
    entity_name = None
    dofs = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.lower().startswith("entity:"):
                entity_name = body.split(":", 1)[1].strip()
            continue
        fields = [f.strip() for f in line.split("|")]
        if len(fields) != 10:
            raise EntityConfigError(
                f"line {lineno}: expected 10 pipe-separated fields, got {len(fields)}"
            )
        try:
            dof = DofSpec(
                index=int(fields[0]),
                name=fields[1],
                kind=fields[2],
                stiffness=float(fields[3]),
                damping=float(fields[4]),
                armature=float(fields[5]),
                limited=_parse_bool(fields[6]),
                lower_limit=float(fields[7]),
                upper_limit=float(fields[8]),
                default_position=float(fields[9]),
            )
        except EntityConfigError:
            raise
        except ValueError as exc:
            raise EntityConfigError(f"line {lineno}: malformed record ({exc})") from exc
        dofs.append(dof)
    if entity_name is None:
        raise EntityConfigError("missing '# entity: <name>' header")
    if not dofs:
        raise EntityConfigError("entity config has no DOF records")
    dofs.sort(key=lambda d: d.index)
    # Re-check duplicates before EntitySpec's contiguity check so the error is precise.
    seen = set()
    for d in dofs:
        if d.index in seen:
            raise EntityConfigError(f"duplicate dof index {d.index}")
        seen.add(d.index)
    return EntitySpec(name=entity_name, dofs=tuple(dofs))


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("yes", "true", "1"):
        return True
    if lowered in ("no", "false", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def serialize_entity(entity: EntitySpec) -> str:
    """Render an EntitySpec back to config text. Round-trips with load_entity."""
    lines = [f"# entity: {entity.name}"]
    for d in entity.dofs:
        lines.append(
            f"{d.index}|{d.name}|{d.kind}|{d.stiffness}|{d.damping}|{d.armature}"
            f"|{'Yes' if d.limited else 'No'}|{d.lower_limit}|{d.upper_limit}"
            f"|{d.default_position}"
        )
    return "\n".join(lines) + "\n"


def dof_description(entity: EntitySpec) -> str:
    """One deterministic line per DOF, suitable for embedding into a prompt."""
    lines = []
    for d in entity.dofs:
        if d.limited:
            limits = f"limits [{d.lower_limit:.2f}, {d.upper_limit:.2f}]"
        else:
            limits = "unlimited range"
        motion = (
            "rotates about its joint axis"
            if d.kind == "Rotation"
            else "translates along its joint axis"
        )
        lines.append(
            f"DOF {d.index}: {d.name} ({d.kind}), {limits}; positive values move "
            f"toward the upper limit, it {motion}."
        )
    return "\n".join(lines)


def default_pose(entity: EntitySpec) -> list[float]:
    """Per-DOF default positions as a vector indexed by DOF index."""
    return [d.default_position for d in entity.dofs]


def clamp(value: float, dof: DofSpec) -> float:
    """Clamp a position into a limited DOF's range; unlimited DOFs pass through."""
    if not dof.limited or math.isnan(value):
        return value
    return min(max(value, dof.lower_limit), dof.upper_limit)


def builtin_entity_source(name: str) -> str:
    """Raw config text of one of the seven shipped entities."""
    try:
        filename = _CONFIG_FILES[name]
    except KeyError:
        raise EntityConfigError(
            f"unknown entity {name!r}; expected one of {', '.join(ENTITY_NAMES)}"
        ) from None
    return (
        resources.files("skillbench").joinpath("data", "entities", filename).read_text()
    )


def load_builtin_entity(name: str) -> EntitySpec:
    return load_entity(builtin_entity_source(name))


def load_all_entities() -> dict[str, EntitySpec]:
    return {name: load_builtin_entity(name) for name in ENTITY_NAMES}
