import pytest

from skillbench.actor import KthTryProvider, ScriptedProvider
from skillbench.benchmark import TaskSpec
from skillbench.orchestrator import (
    Deps,
    RunConfig,
    run_parallel,
    run_serial,
    solve_task,
)
from skillbench.predicates import Reaches
from skillbench.programs import ActionProgram, serialize_program
from skillbench.search import SearcherConfig
from skillbench.store import ActionSpace, make_record

from conftest import CountingProvider, StubEmbedder, scripted_text, unit

V_RIGHT = unit(1.0, 0.0, 0.0, 0.0)
V_LEFT = unit(0.0, 1.0, 0.0, 0.0)

RIGHT = TaskSpec(
    id="c1", entity="Cartpole", text="right move the slider",
    predicate=Reaches(0, 0.5, 0.01),
)
LEFT = TaskSpec(
    id="c2", entity="Cartpole", text="left move the slider",
    predicate=Reaches(0, -0.5, 0.01),
)

RIGHT_PROGRAM = ActionProgram(states=[{0: 0.5}])
LEFT_PROGRAM = ActionProgram(states=[{0: -0.5}])


def embedder():
    return StubEmbedder({RIGHT.text: V_RIGHT, LEFT.text: V_LEFT})


def deps_with(provider, entities):
    return Deps(entities=entities, embedder=embedder(), provider=provider)


def scripted():
    return ScriptedProvider({
        ("Cartpole", RIGHT.text): scripted_text(RIGHT_PROGRAM),
        ("Cartpole", LEFT.text): scripted_text(LEFT_PROGRAM),
    })


def test_solve_task_search_hit_uses_no_actor_calls(entities):
    space = ActionSpace()
    space.commit([
        make_record("Cartpole", RIGHT.text, RIGHT_PROGRAM, embedder())
    ])
    provider = CountingProvider(scripted())
    result = solve_task(
        RIGHT, space.snapshot("Cartpole"), deps_with(provider, entities), RunConfig()
    )
    assert result.status == "PassedBySearch"
    assert result.pass_iteration == 0
    assert result.actor_calls == 0
    assert provider.call_count == 0
    assert result.final_program == RIGHT_PROGRAM


def test_solve_task_first_try_actor_pass(entities):
    result = solve_task(
        RIGHT,
        ActionSpace().snapshot("Cartpole"),
        deps_with(scripted(), entities),
        RunConfig(),
    )
    assert result.status == "PassedByActor"
    assert result.pass_iteration == 1
    assert result.iterations_used == 1


def test_solve_task_kth_try_consumes_iterations(entities):
    fixture = {("Cartpole", RIGHT.text): scripted_text(RIGHT_PROGRAM)}
    result = solve_task(
        RIGHT,
        ActionSpace().snapshot("Cartpole"),
        deps_with(KthTryProvider(fixture, k=3), entities),
        RunConfig(max_iterations=5),
    )
    assert result.status == "PassedByActor"
    assert result.iterations_used == 3
    assert [v.completed for v in result.verdicts] == [False, False, True]


def test_solve_task_fails_when_k_exceeds_budget(entities):
    fixture = {("Cartpole", RIGHT.text): scripted_text(RIGHT_PROGRAM)}
    result = solve_task(
        RIGHT,
        ActionSpace().snapshot("Cartpole"),
        deps_with(KthTryProvider(fixture, k=4), entities),
        RunConfig(max_iterations=3),
    )
    assert result.status == "Failed"
    assert result.iterations_used == 3
    assert len(result.verdicts) == 3


def test_unparseable_output_consumes_iteration_with_verdict(entities):
    provider = KthTryProvider({}, k=99, filler="garbage")
    result = solve_task(
        RIGHT,
        ActionSpace().snapshot("Cartpole"),
        deps_with(provider, entities),
        RunConfig(max_iterations=2),
    )
    assert result.status == "Failed"
    assert len(result.verdicts) == 2
    assert all(not v.completed for v in result.verdicts)


def test_run_serial_commits_learned_skills_after_each_task(entities):
    space = ActionSpace()
    report = run_serial(
        [RIGHT, LEFT], space, deps_with(scripted(), entities), RunConfig(mode="serial")
    )
    assert all(r.passed for r in report.results)
    assert space.size("Cartpole") == 2
    assert space.version == 2  # one commit per task
    sizes = [s for _, s in report.space_sizes_by_version]
    assert sizes == [0, 1, 2]


def test_run_parallel_passes_all_by_search_at_iteration_zero(entities):
    space = ActionSpace()
    space.commit([
        make_record("Cartpole", RIGHT.text, RIGHT_PROGRAM, embedder()),
        make_record("Cartpole", LEFT.text, LEFT_PROGRAM, embedder()),
    ])
    provider = CountingProvider(scripted())
    report = run_parallel(
        [RIGHT, LEFT], space, deps_with(provider, entities), RunConfig()
    )
    assert provider.call_count == 0
    assert all(r.status == "PassedBySearch" for r in report.results)
    assert all(r.pass_iteration == 0 for r in report.results)
    assert report.cumulative_passes[0]["Cartpole"] == 2


def test_parallel_cross_task_dependency_passes_second_task_at_iteration_two(entities):
    # The second task's provider only succeeds once the first task's learned
    # skill shows up among the related actions of its prompt.
    v_shared = unit(0.8, 0.6, 0.0, 0.0)  # cosine 0.8 with V_RIGHT
    stub = StubEmbedder({RIGHT.text: V_RIGHT, LEFT.text: v_shared})

    class DependentProvider:
        call_count = 0

        def generate(self, prompt):
            self.call_count += 1
            if prompt.task == RIGHT.text:
                return scripted_text(RIGHT_PROGRAM)
            related = [t for t, _ in prompt.related_actions]
            if RIGHT.text in related:
                return scripted_text(LEFT_PROGRAM)
            return "no idea yet"

    space = ActionSpace()
    deps = Deps(entities=entities, embedder=stub, provider=DependentProvider())
    report = run_parallel([RIGHT, LEFT], space, deps, RunConfig(max_iterations=5))
    by_id = {r.task.id: r for r in report.results}
    assert by_id["c1"].pass_iteration == 1
    assert by_id["c2"].status == "PassedByActor"
    assert by_id["c2"].pass_iteration == 2

    # Serial mode resolves the same dependency on the second task's first try.
    space2 = ActionSpace()
    deps2 = Deps(entities=entities, embedder=stub, provider=DependentProvider())
    report2 = run_serial([RIGHT, LEFT], space2, deps2, RunConfig(mode="serial"))
    by_id2 = {r.task.id: r for r in report2.results}
    assert by_id2["c2"].pass_iteration == 1


def test_parallel_iteration_snapshot_excludes_same_round_commits(entities):
    # Within one round, the second task must not see the first task's record.
    seen_related = []

    class Spy:
        call_count = 0

        def generate(self, prompt):
            self.call_count += 1
            if prompt.task == LEFT.text:
                seen_related.append([t for t, _ in prompt.related_actions])
                return scripted_text(LEFT_PROGRAM)
            return scripted_text(RIGHT_PROGRAM)

    v_shared = unit(0.8, 0.6, 0.0, 0.0)
    stub = StubEmbedder({RIGHT.text: V_RIGHT, LEFT.text: v_shared})
    deps = Deps(entities=entities, embedder=stub, provider=Spy())
    run_parallel([RIGHT, LEFT], ActionSpace(), deps, RunConfig(max_concurrency=1))
    assert seen_related == [[]]


def test_single_task_serial_equals_parallel_outcome(entities):
    config_s = RunConfig(mode="serial")
    config_p = RunConfig(mode="parallel")
    serial = run_serial([RIGHT], ActionSpace(), deps_with(scripted(), entities), config_s)
    parallel = run_parallel([RIGHT], ActionSpace(), deps_with(scripted(), entities), config_p)
    rs, rp = serial.results[0], parallel.results[0]
    assert (rs.status, rs.pass_iteration) == (rp.status, rp.pass_iteration)


def test_cumulative_pass_counts_never_decrease(entities):
    fixture = {("Cartpole", t.text): scripted_text(p)
               for t, p in [(RIGHT, RIGHT_PROGRAM), (LEFT, LEFT_PROGRAM)]}
    provider = KthTryProvider(fixture, k=3)
    report = run_parallel(
        [RIGHT, LEFT], ActionSpace(), deps_with(provider, entities), RunConfig()
    )
    iterations = sorted(report.cumulative_passes)
    for earlier, later in zip(iterations, iterations[1:]):
        for entity in report.totals_by_entity:
            assert (report.cumulative_passes[later][entity]
                    >= report.cumulative_passes[earlier][entity])


def test_failed_programs_are_not_committed(entities):
    space = ActionSpace()
    provider = KthTryProvider({}, k=99)  # never produces a passing program
    report = run_parallel(
        [RIGHT], space, deps_with(provider, entities), RunConfig(max_iterations=2)
    )
    assert report.results[0].status == "Failed"
    assert space.size() == 0


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(max_iterations=0)
    with pytest.raises(ValueError):
        RunConfig(mode="batched")
    with pytest.raises(ValueError):
        RunConfig(max_concurrency=0)


def test_searcher_config_is_honored(entities):
    # With a permissive upper threshold, a merely similar record becomes an
    # exact match and short-circuits the actor.
    v_close = unit(0.95, 0.312249899919920, 0.0, 0.0)
    stub = StubEmbedder({RIGHT.text: V_RIGHT, LEFT.text: v_close})
    space = ActionSpace()
    space.commit([make_record("Cartpole", RIGHT.text, RIGHT_PROGRAM, stub)])
    provider = CountingProvider(scripted())
    config = RunConfig(searcher=SearcherConfig(upper_threshold=0.9))
    result = solve_task(
        LEFT, space.snapshot("Cartpole"),
        Deps(entities=entities, embedder=stub, provider=provider), config,
    )
    assert result.status == "PassedBySearch"
    assert provider.call_count == 0
