"""The per-task solve loop and the serial/parallel multi-task strategies.

Per task: search the action library first; a high-confidence hit returns the
stored program with zero generation calls. Otherwise generate, simulate,
evaluate and repair for up to N iterations, feeding each failing verdict back
into the next prompt. Evaluator-passed programs are merged back into the
library -- after each task in Serial mode, at each global iteration boundary
in Parallel mode (searches within an iteration only see the frozen snapshot).
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .actor import ActorFailure, obtain_program
from .benchmark import TaskSpec
from .entities import EntitySpec
from .evaluator import FeedbackMessage, Verdict, compose_feedback, evaluate_trace
from .programs import ActionProgram
from .search import SearcherConfig, SearchOutcome, select_actions
from .simulator import SimConfig, simulate
from .store import ActionSpace, EntitySnapshot, make_record


@dataclass(frozen=True)
class RunConfig:
    max_iterations: int = 5
    mode: str = "parallel"  # "serial" | "parallel"
    max_concurrency: int = 8
    searcher: SearcherConfig = SearcherConfig()
    sim: SimConfig = SimConfig()
    include_reason_feedback: bool = True
    seed: int = 0
    run_id: str = "run"

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")
        if self.mode not in ("serial", "parallel"):
            raise ValueError("mode must be 'serial' or 'parallel'")


@dataclass
class Deps:
    entities: dict[str, EntitySpec]
    embedder: object
    provider: object


@dataclass
class TaskResult:
    task: TaskSpec
    status: str  # "PassedBySearch" | "PassedByActor" | "Failed"
    pass_iteration: int | None  # global/actor iteration of the pass; 0 = search sweep
    iterations_used: int
    actor_calls: int
    final_program: ActionProgram | None
    verdicts: list[Verdict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status in ("PassedBySearch", "PassedByActor")


@dataclass
class RunReport:
    run_id: str
    mode: str
    max_iterations: int
    results: list[TaskResult]
    # iteration -> entity -> cumulative pass count (iteration 0 = search sweep)
    cumulative_passes: dict[int, dict[str, int]]
    totals_by_entity: dict[str, int]
    space_sizes_by_version: list[tuple[int, int]]
    provider_calls: int
    phase_seconds: dict[str, float]


def _iteration_attempt(
    task: TaskSpec,
    snapshot: EntitySnapshot,
    deps: Deps,
    config: RunConfig,
    feedback: FeedbackMessage | None,
) -> tuple[str, ActionProgram | None, Verdict | None, SearchOutcome]:
    """One search + (possibly) one actor iteration for a task.

    Returns (kind, program, verdict, outcome) where kind is "search-hit",
    "passed" or "failed".
    """
    outcome = select_actions(task.text, snapshot, config.searcher, deps.embedder)
    if outcome.kind == "ExactMatch":
        return "search-hit", outcome.records[0].program, None, outcome
    entity = deps.entities[task.entity]
    produced = obtain_program(task.text, outcome, entity, feedback, deps.provider)
    if isinstance(produced, ActorFailure):
        verdict = Verdict(
            completed=False,
            reasons=produced.reason,
            solution=(
                "emit exactly one fenced code block containing the action object "
                "with keys initial_dof_position, speeds, state_destination"
            ),
        )
        return "failed", None, verdict, outcome
    result = simulate(produced, entity, config.sim)
    verdict = evaluate_trace(result, task)
    if verdict.completed:
        return "passed", produced, verdict, outcome
    return "failed", produced, verdict, outcome


def solve_task(
    task: TaskSpec,
    snapshot: EntitySnapshot,
    deps: Deps,
    config: RunConfig,
) -> TaskResult:
    """Run the full bounded repair loop for one task against a fixed snapshot."""
    outcome = select_actions(task.text, snapshot, config.searcher, deps.embedder)
    if outcome.kind == "ExactMatch":
        return TaskResult(
            task=task,
            status="PassedBySearch",
            pass_iteration=0,
            iterations_used=0,
            actor_calls=0,
            final_program=outcome.records[0].program,
        )
    entity = deps.entities[task.entity]
    feedback: FeedbackMessage | None = None
    verdicts: list[Verdict] = []
    calls_before = getattr(deps.provider, "call_count", 0)
    for iteration in range(1, config.max_iterations + 1):
        produced = obtain_program(task.text, outcome, entity, feedback, deps.provider)
        if isinstance(produced, ActorFailure):
            verdict = Verdict(
                completed=False,
                reasons=produced.reason,
                solution=(
                    "emit exactly one fenced code block containing the action "
                    "object with keys initial_dof_position, speeds, state_destination"
                ),
            )
        else:
            result = simulate(produced, entity, config.sim)
            verdict = evaluate_trace(result, task)
        verdicts.append(verdict)
        if verdict.completed:
            return TaskResult(
                task=task,
                status="PassedByActor",
                pass_iteration=iteration,
                iterations_used=iteration,
                actor_calls=getattr(deps.provider, "call_count", 0) - calls_before,
                final_program=produced,
                verdicts=verdicts,
            )
        feedback = compose_feedback(
            verdict, task.text, include_reason=config.include_reason_feedback
        )
    return TaskResult(
        task=task,
        status="Failed",
        pass_iteration=None,
        iterations_used=config.max_iterations,
        actor_calls=getattr(deps.provider, "call_count", 0) - calls_before,
        final_program=None,
        verdicts=verdicts,
    )


def run_serial(tasks: list[TaskSpec], store: ActionSpace, deps: Deps, config: RunConfig) -> RunReport:
    """Process tasks one at a time to completion; commit after each task."""
    started = time.perf_counter()
    calls_before = getattr(deps.provider, "call_count", 0)
    results: list[TaskResult] = []
    space_sizes: list[tuple[int, int]] = [(store.version, store.size())]
    solve_seconds = 0.0
    for task in tasks:
        snapshot = store.snapshot(task.entity)
        t0 = time.perf_counter()
        result = solve_task(task, snapshot, deps, config)
        solve_seconds += time.perf_counter() - t0
        results.append(result)
        passed_records = []
        if result.status == "PassedByActor":
            passed_records.append(
                make_record(
                    entity=task.entity,
                    task_text=task.text,
                    program=result.final_program,
                    embedder=deps.embedder,
                    provenance="Learned",
                    iteration=result.pass_iteration,
                    run_id=config.run_id,
                )
            )
        store.commit(passed_records, entities=deps.entities)
        space_sizes.append((store.version, store.size()))
    return _build_report(
        results,
        config,
        mode="serial",
        space_sizes=space_sizes,
        provider_calls=getattr(deps.provider, "call_count", 0) - calls_before,
        phase_seconds={
            "solve": solve_seconds,
            "total": time.perf_counter() - started,
        },
    )


def run_parallel(tasks: list[TaskSpec], store: ActionSpace, deps: Deps, config: RunConfig) -> RunReport:
    """All tasks advance one iteration per round against a frozen snapshot.

    Iteration 0 is a search-only sweep; iterations 1..N each run one actor
    attempt per unfinished task. Passed actions are committed once per round,
    after every pipeline for the round has finished.
    """
    started = time.perf_counter()
    calls_before = getattr(deps.provider, "call_count", 0)
    pending: list[TaskSpec] = list(tasks)
    feedbacks: dict[str, FeedbackMessage | None] = {t.id: None for t in tasks}
    verdicts: dict[str, list[Verdict]] = {t.id: [] for t in tasks}
    results: dict[str, TaskResult] = {}
    space_sizes: list[tuple[int, int]] = [(store.version, store.size())]
    solve_seconds = 0.0

    for iteration in range(0, config.max_iterations + 1):
        if not pending:
            break
        snapshots = {
            entity: store.snapshot(entity)
            for entity in {t.entity for t in pending}
        }
        t0 = time.perf_counter()
        if iteration == 0:
            attempts = [
                (task, *_search_only(task, snapshots[task.entity], deps, config))
                for task in pending
            ]
        else:
            with ThreadPoolExecutor(max_workers=config.max_concurrency) as pool:
                futures = [
                    pool.submit(
                        _iteration_attempt,
                        task,
                        snapshots[task.entity],
                        deps,
                        config,
                        feedbacks[task.id],
                    )
                    for task in pending
                ]
                attempts = [
                    (task, *future.result())
                    for task, future in zip(pending, futures)
                ]
        solve_seconds += time.perf_counter() - t0

        passed_records = []
        still_pending = []
        for task, kind, program, verdict, _outcome in attempts:
            if verdict is not None:
                verdicts[task.id].append(verdict)
            if kind == "search-hit":
                results[task.id] = TaskResult(
                    task=task,
                    status="PassedBySearch",
                    pass_iteration=iteration,
                    iterations_used=iteration,
                    actor_calls=0,
                    final_program=program,
                    verdicts=verdicts[task.id],
                )
            elif kind == "passed":
                results[task.id] = TaskResult(
                    task=task,
                    status="PassedByActor",
                    pass_iteration=iteration,
                    iterations_used=iteration,
                    actor_calls=iteration,  # refined below for reporting
                    final_program=program,
                    verdicts=verdicts[task.id],
                )
                passed_records.append(
                    make_record(
                        entity=task.entity,
                        task_text=task.text,
                        program=program,
                        embedder=deps.embedder,
                        provenance="Learned",
                        iteration=iteration,
                        run_id=config.run_id,
                    )
                )
            else:
                if verdict is not None:
                    feedbacks[task.id] = compose_feedback(
                        verdict, task.text, include_reason=config.include_reason_feedback
                    )
                still_pending.append(task)
        store.commit(passed_records, entities=deps.entities)
        space_sizes.append((store.version, store.size()))
        pending = still_pending

    for task in pending:
        results[task.id] = TaskResult(
            task=task,
            status="Failed",
            pass_iteration=None,
            iterations_used=config.max_iterations,
            actor_calls=config.max_iterations,
            final_program=None,
            verdicts=verdicts[task.id],
        )
    ordered = [results[t.id] for t in tasks]
    return _build_report(
        ordered,
        config,
        mode="parallel",
        space_sizes=space_sizes,
        provider_calls=getattr(deps.provider, "call_count", 0) - calls_before,
        phase_seconds={
            "solve": solve_seconds,
            "total": time.perf_counter() - started,
        },
    )


def _search_only(task, snapshot, deps, config):
    outcome = select_actions(task.text, snapshot, config.searcher, deps.embedder)
    if outcome.kind == "ExactMatch":
        return "search-hit", outcome.records[0].program, None, outcome
    return "pending", None, None, outcome


def _build_report(
    results: list[TaskResult],
    config: RunConfig,
    mode: str,
    space_sizes: list[tuple[int, int]],
    provider_calls: int,
    phase_seconds: dict[str, float],
) -> RunReport:
    entities = sorted({r.task.entity for r in results})
    totals = {e: sum(1 for r in results if r.task.entity == e) for e in entities}
    cumulative: dict[int, dict[str, int]] = {}
    for iteration in range(0, config.max_iterations + 1):
        counts = {}
        for entity in entities:
            counts[entity] = sum(
                1
                for r in results
                if r.task.entity == entity
                and r.passed
                and (r.pass_iteration or 0) <= iteration
            )
        cumulative[iteration] = counts
    return RunReport(
        run_id=config.run_id,
        mode=mode,
        max_iterations=config.max_iterations,
        results=results,
        cumulative_passes=cumulative,
        totals_by_entity=totals,
        space_sizes_by_version=space_sizes,
        provider_calls=provider_calls,
        phase_seconds=phase_seconds,
    )
