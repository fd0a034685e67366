"""Cosine scoring and dual-threshold action selection.

Given a task embedding and a per-entity snapshot of the action library, the
selector returns one of four outcomes:

* ExactMatch  -- some score exceeds the upper threshold; that single record
  is the answer and no generation is needed.
* Related     -- scores above the lower threshold exist; the top-k of them
  (fewer if fewer qualify) are returned as refinement material.
* TemplateOnly -- nothing qualifies; the single closest record is returned
  as a template.
* Empty       -- the snapshot holds no records.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .embedding import Embedding

if TYPE_CHECKING:
    from .store import EntitySnapshot


@dataclass(frozen=True)
class SearcherConfig:
    upper_threshold: float = 0.99
    lower_threshold: float = 0.5
    k: int = 3

    def __post_init__(self) -> None:
        if not 0 <= self.lower_threshold < self.upper_threshold <= 1:
            raise ValueError(
                "thresholds must satisfy 0 <= lower < upper <= 1, got "
                f"lower={self.lower_threshold} upper={self.upper_threshold}"
            )
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class SearchOutcome:
    kind: str  # "ExactMatch" | "Related" | "TemplateOnly" | "Empty"
    records: tuple = ()
    scores: tuple[float, ...] = ()


def cosine(a: Embedding, b: Embedding) -> float:
    """Cosine similarity of two embeddings; a plain dot for unit vectors."""
    if a.dimension != b.dimension:
        raise ValueError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    va, vb = a.as_array(), b.as_array()
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine is undefined for zero-norm input")
    return float(va @ vb / (na * nb))


def score_records(task_embedding: Embedding, snapshot: "EntitySnapshot") -> np.ndarray:
    """Cosine of the task against every record, in insertion order."""
    matrix = snapshot.embedding_matrix()
    if matrix.shape[0] == 0:
        return np.empty(0, dtype=np.float64)
    if matrix.shape[1] != task_embedding.dimension:
        raise ValueError(
            f"dimension mismatch: snapshot d={matrix.shape[1]}, "
            f"task d={task_embedding.dimension}"
        )
    return matrix @ task_embedding.as_array()


def select_actions(
    task: str,
    snapshot: "EntitySnapshot",
    config: SearcherConfig,
    embedder,
) -> SearchOutcome:
    """Apply the dual-threshold selection over a snapshot.

    Thresholds are strict (``>``); ties between equal scores break by
    insertion order, earliest first.
    """
    records = snapshot.records
    if not records:
        return SearchOutcome(kind="Empty")
    scores = score_records(embedder.embed(task), snapshot)
    return select_from_scores(records, scores, config)


def select_from_scores(records, scores, config: SearcherConfig) -> SearchOutcome:
    """Selection given precomputed per-record scores (insertion order)."""
    if len(records) == 0:
        return SearchOutcome(kind="Empty")
    scores = np.asarray(scores, dtype=np.float64)
    best = int(np.argmax(scores))  # argmax keeps the earliest index on ties
    if scores[best] > config.upper_threshold:
        return SearchOutcome(
            kind="ExactMatch",
            records=(records[best],),
            scores=(float(scores[best]),),
        )
    above = [i for i in range(len(records)) if scores[i] > config.lower_threshold]
    if above:
        # Stable sort by descending score; insertion order breaks ties.
        above.sort(key=lambda i: (-scores[i], i))
        chosen = above[: config.k]
        return SearchOutcome(
            kind="Related",
            records=tuple(records[i] for i in chosen),
            scores=tuple(float(scores[i]) for i in chosen),
        )
    return SearchOutcome(
        kind="TemplateOnly",
        records=(records[best],),
        scores=(float(scores[best]),),
    )
