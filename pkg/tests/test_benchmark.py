import pytest

from skillbench.benchmark import (
    EXPECTED_SEED_COUNTS,
    EXPECTED_TASK_COUNTS,
    BenchmarkError,
    lint_seed_overlap,
    load_benchmark,
    load_seed_actions,
    seed_initial_space,
)
from skillbench.embedding import LocalEmbedder
from skillbench.evaluator import evaluate_trace
from skillbench.simulator import simulate


def test_task_counts_per_entity(entities):
    tasks = load_benchmark(entities=entities)
    assert len(tasks) == 80
    counts = {name: sum(1 for t in tasks if t.entity == name) for name in entities}
    assert counts == EXPECTED_TASK_COUNTS


def test_task_ids_unique_even_for_duplicate_texts(entities):
    tasks = load_benchmark(entities=entities)
    ids = [t.id for t in tasks]
    assert len(set(ids)) == len(ids)
    anymal_texts = [t.text for t in tasks if t.entity == "Anymal"]
    assert anymal_texts.count("forward swing right front hip") == 2
    assert anymal_texts.count("forward swing right hind hip") == 2


def test_known_task_texts_present(entities):
    texts = {(t.entity, t.text) for t in load_benchmark(entities=entities)}
    assert ("Human", "run") in texts
    assert ("Human", "raise both your arms") in texts
    assert ("Cartpole", "left move the slider") in texts


def test_predicate_dofs_stay_within_entity(entities):
    for task in load_benchmark(entities=entities):
        count = entities[task.entity].dof_count
        assert all(0 <= d < count for d in task.predicate.dofs())


def test_loader_rejects_bad_counts():
    with pytest.raises(BenchmarkError):
        load_benchmark(source='{"id": "x", "entity": "Human", "text": "t", '
                              '"predicate": {"op": "reaches", "dof": 0, '
                              '"value": 1.0, "tol": 0.1}}')


def test_loader_rejects_out_of_range_predicate():
    line = ('{"id": "x", "entity": "Cartpole", "text": "t", '
            '"predicate": {"op": "reaches", "dof": 9, "value": 1.0, "tol": 0.1}}')
    with pytest.raises(BenchmarkError):
        load_benchmark(source=line)


def test_seed_counts_per_entity():
    seeds = load_seed_actions()
    assert len(seeds) == 24
    counts = {
        name: sum(1 for s in seeds if s.entity == name)
        for name in EXPECTED_SEED_COUNTS
    }
    assert counts == EXPECTED_SEED_COUNTS


def test_seed_programs_execute_and_satisfy_their_predicates(entities):
    for seed in load_seed_actions():
        result = simulate(seed.program, entities[seed.entity])
        assert result.return_code == 0, seed.task_text
        outcome = seed.predicate.evaluate(result.trajectory)
        assert outcome.ok, f"{seed.entity}: {seed.task_text}: {outcome.reason}"


def test_seed_initial_space_has_24_records():
    space = seed_initial_space(LocalEmbedder(dimension=32))
    assert space.size() == 24
    assert space.version == 1
    assert all(
        r.provenance == "Seed"
        for e in space.entities()
        for r in space.snapshot(e).records
    )


def test_seed_lint_reports_overlaps(entities):
    tasks = load_benchmark(entities=entities)
    seeds = load_seed_actions()
    overlaps = lint_seed_overlap(tasks, seeds)
    assert isinstance(overlaps, list)


def test_benchmark_tasks_pass_their_own_evaluator_path(entities):
    # A task whose fixture program completes must get a completed verdict.
    tasks = load_benchmark(entities=entities)
    task = next(t for t in tasks if t.entity == "Cartpole")
    from skillbench.programs import ActionProgram

    bad = simulate(ActionProgram(states=[{1: 0.0}]), entities["Cartpole"])
    verdict = evaluate_trace(bad, task)
    assert verdict.completed in (True, False)  # total, never raises
