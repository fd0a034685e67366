import numpy as np
import pytest

from skillbench.embedding import Embedding, LocalEmbedder
from skillbench.search import (
    SearcherConfig,
    cosine,
    score_records,
    select_actions,
    select_from_scores,
)
from skillbench.store import EntitySnapshot

from conftest import StubEmbedder, record_for, unit

DEFAULTS = SearcherConfig()


def snapshot_of(records):
    return EntitySnapshot(entity="Human", records=tuple(records), version=1)


def test_default_thresholds():
    assert DEFAULTS.upper_threshold == 0.99
    assert DEFAULTS.lower_threshold == 0.5
    assert DEFAULTS.k == 3


def test_config_validation():
    with pytest.raises(ValueError):
        SearcherConfig(upper_threshold=0.4, lower_threshold=0.5)
    with pytest.raises(ValueError):
        SearcherConfig(k=0)


def test_cosine_of_identical_unit_vectors_is_one():
    a = Embedding(values=unit(1, 2, 3))
    assert cosine(a, a) == pytest.approx(1.0)


def test_cosine_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        cosine(Embedding(values=(1.0,)), Embedding(values=unit(1, 1)))


def test_empty_snapshot_yields_empty_outcome():
    outcome = select_actions("anything", snapshot_of([]), DEFAULTS, LocalEmbedder())
    assert outcome.kind == "Empty"
    assert outcome.records == ()


def test_exact_match_above_upper_threshold():
    v = unit(1, 0, 0, 0)
    records = [record_for("Human", "walk", v)]
    embedder = StubEmbedder({"walk": v})
    outcome = select_actions("walk", snapshot_of(records), DEFAULTS, embedder)
    assert outcome.kind == "ExactMatch"
    assert outcome.records[0].task_text == "walk"
    assert outcome.scores[0] == pytest.approx(1.0)


def test_related_returns_top_k_sorted_descending():
    task_v = unit(1, 0, 0, 0)
    records = [
        record_for("Human", f"t{i}", unit(c, np.sqrt(1 - c * c), 0, 0))
        for i, c in enumerate([0.6, 0.9, 0.7, 0.8, 0.55])
    ]
    outcome = select_from_scores(
        records, [0.6, 0.9, 0.7, 0.8, 0.55], DEFAULTS
    )
    assert outcome.kind == "Related"
    assert [r.task_text for r in outcome.records] == ["t1", "t3", "t2"]
    assert list(outcome.scores) == [0.9, 0.8, 0.7]
    del task_v


def test_related_returns_fewer_than_k_when_fewer_qualify():
    records = [record_for("Human", f"t{i}", unit(1, 1)) for i in range(3)]
    outcome = select_from_scores(records, [0.7, 0.2, 0.1], DEFAULTS)
    assert outcome.kind == "Related"
    assert len(outcome.records) == 1


def test_template_only_when_nothing_clears_lower():
    records = [record_for("Human", f"t{i}", unit(1, 1)) for i in range(3)]
    outcome = select_from_scores(records, [0.1, 0.45, 0.3], DEFAULTS)
    assert outcome.kind == "TemplateOnly"
    assert outcome.records[0].task_text == "t1"


def test_thresholds_are_strict_comparisons():
    records = [record_for("Human", "a", unit(1, 1)), record_for("Human", "b", unit(1, 1))]
    # Exactly at the upper threshold is not an exact match.
    outcome = select_from_scores(records, [0.99, 0.1], DEFAULTS)
    assert outcome.kind == "Related"
    # Exactly at the lower threshold does not qualify as related.
    outcome = select_from_scores(records, [0.5, 0.5], DEFAULTS)
    assert outcome.kind == "TemplateOnly"


def test_ties_break_by_insertion_order():
    records = [record_for("Human", f"t{i}", unit(1, 1)) for i in range(4)]
    outcome = select_from_scores(records, [0.8, 0.8, 0.8, 0.8], DEFAULTS)
    assert [r.task_text for r in outcome.records] == ["t0", "t1", "t2"]
    outcome = select_from_scores(records, [0.995, 0.995, 0.1, 0.1], DEFAULTS)
    assert outcome.kind == "ExactMatch"
    assert outcome.records[0].task_text == "t0"


def test_score_records_matches_pairwise_cosine():
    embedder = LocalEmbedder(dimension=32)
    texts = ["walk", "run", "squat down", "wave"]
    records = [
        record_for("Human", t, embedder.embed(t).values) for t in texts
    ]
    task = embedder.embed("walk fast")
    scores = score_records(task, snapshot_of(records))
    expected = [cosine(task, r.embedding) for r in records]
    assert list(scores) == pytest.approx(expected)


def test_score_dimension_mismatch_rejected():
    records = [record_for("Human", "walk", unit(1, 1))]
    with pytest.raises(ValueError):
        score_records(Embedding(values=unit(1, 1, 1)), snapshot_of(records))
