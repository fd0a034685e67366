"""Command-line front end.

Commands::

    skillbench bench run   [--entity E] [--mode serial|parallel] [--iterations N]
                           [--provider SPEC] [--store PATH] [--out DIR] [--fresh]
    skillbench task solve  ENTITY "TEXT" [--provider SPEC] [--store PATH] ...
    skillbench sim exec    ENTITY PROGRAM_FILE
    skillbench store       inspect|seed [--store PATH]
    skillbench search query ENTITY "TEXT" [--k K] [--upper X] [--lower Y] [--store PATH]
    skillbench report render RUN_DIR

All commands honor ``--config FILE`` (JSON; flags override file values) and
``--seed``. Provider specs: ``scripted:<dir>`` or ``remote:<profile>`` where
the profile is looked up under ``providers`` in the config file. Exit codes:
0 success, 1 completed run with failing tasks, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .actor import RemoteProvider, ScriptedProvider
from .benchmark import (
    BenchmarkError,
    lint_seed_overlap,
    load_benchmark,
    load_seed_actions,
    seed_initial_space,
)
from .embedding import LocalEmbedder, RemoteEmbedder
from .entities import (
    ENTITY_NAMES,
    EntityConfigError,
    load_all_entities,
    load_builtin_entity,
)
from .orchestrator import Deps, RunConfig, run_parallel, run_serial, solve_task
from .programs import ParseError, parse_program, serialize_program, validate_program
from .report import emit_report, render_from_results
from .search import SearcherConfig, select_actions
from .simulator import SimConfig, export_trajectory, simulate
from .store import ActionSpace, StoreError


class CliError(Exception):
    """Usage/config error; maps to exit code 2."""


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both through.
        return int(exc.code or 0)
    if not getattr(args, "func", None):
        parser.print_help()
        return 2
    try:
        settings = _merge_config(args)
        return args.func(args, settings)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BenchmarkError, EntityConfigError, StoreError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skillbench",
        description="Skill-learning benchmark harness for articulated entities.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--seed", type=int, default=None, help="random seed for stochastic providers")

    bench = sub.add_parser("bench", help="benchmark runs").add_subparsers(dest="sub")
    bench_run = bench.add_parser("run", help="run the benchmark suite")
    common(bench_run)
    bench_run.add_argument("--entity", choices=ENTITY_NAMES, help="restrict to one entity")
    bench_run.add_argument("--mode", choices=["serial", "parallel"], default=None)
    bench_run.add_argument("--iterations", type=int, default=None, help="max iterations per task")
    bench_run.add_argument("--provider", default=None, help="scripted:<dir> or remote:<profile>")
    bench_run.add_argument("--store", default=None, help="action store file (created if missing)")
    bench_run.add_argument("--out", default=None, help="report output directory")
    bench_run.add_argument(
        "--fresh", action="store_true", help="start from the seed-only action space"
    )
    bench_run.set_defaults(func=_cmd_bench_run)

    task = sub.add_parser("task", help="single-task operations").add_subparsers(dest="sub")
    task_solve = task.add_parser("solve", help="solve one task")
    common(task_solve)
    task_solve.add_argument("entity", choices=ENTITY_NAMES)
    task_solve.add_argument("text", help="natural-language task text")
    task_solve.add_argument("--provider", default=None)
    task_solve.add_argument("--store", default=None)
    task_solve.add_argument("--iterations", type=int, default=None)
    task_solve.set_defaults(func=_cmd_task_solve)

    sim = sub.add_parser("sim", help="simulator operations").add_subparsers(dest="sub")
    sim_exec = sim.add_parser("exec", help="execute a program file")
    common(sim_exec)
    sim_exec.add_argument("entity", choices=ENTITY_NAMES)
    sim_exec.add_argument("program_file")
    sim_exec.add_argument("--trace-out", help="write the trajectory export here")
    sim_exec.set_defaults(func=_cmd_sim_exec)

    store = sub.add_parser("store", help="action store operations").add_subparsers(dest="sub")
    store_inspect = store.add_parser("inspect", help="summarize a store file")
    common(store_inspect)
    store_inspect.add_argument("--store", default=None)
    store_inspect.set_defaults(func=_cmd_store_inspect)
    store_seed = store.add_parser("seed", help="create/refresh a store with the seed skills")
    common(store_seed)
    store_seed.add_argument("--store", default=None)
    store_seed.set_defaults(func=_cmd_store_seed)

    search = sub.add_parser("search", help="searcher operations").add_subparsers(dest="sub")
    search_query = search.add_parser("query", help="score a task against the store")
    common(search_query)
    search_query.add_argument("entity", choices=ENTITY_NAMES)
    search_query.add_argument("text")
    search_query.add_argument("--store", default=None)
    search_query.add_argument("--k", type=int, default=None)
    search_query.add_argument("--upper", type=float, default=None)
    search_query.add_argument("--lower", type=float, default=None)
    search_query.set_defaults(func=_cmd_search_query)

    report = sub.add_parser("report", help="report operations").add_subparsers(dest="sub")
    report_render = report.add_parser("render", help="re-render figures for a run dir")
    common(report_render)
    report_render.add_argument("run_dir")
    report_render.set_defaults(func=_cmd_report_render)

    return parser


def _merge_config(args) -> dict:
    """File settings with CLI flags layered on top (flags win)."""
    settings: dict = {}
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                settings = json.load(fh)
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot read config {config_path}: {exc}") from exc
        if not isinstance(settings, dict):
            raise CliError(f"config {config_path} must contain a JSON object")
    for key in ("mode", "iterations", "provider", "store", "out", "entity", "seed",
                "k", "upper", "lower"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _setting(settings: dict, key: str, default):
    return settings.get(key, default)


def _embedder(settings: dict):
    spec = settings.get("embedder", "local")
    if spec == "local":
        return LocalEmbedder()
    if isinstance(spec, dict):
        return RemoteEmbedder(
            endpoint=spec["endpoint"],
            model_id=spec.get("model", ""),
            dimension=int(spec.get("dimension", 384)),
            auth_token_env=spec.get("auth_token_env"),
        )
    raise CliError(f"unknown embedder spec {spec!r}")


def _provider(settings: dict):
    spec = _setting(settings, "provider", None)
    if spec is None:
        raise CliError("a --provider is required (scripted:<dir> or remote:<profile>)")
    kind, _, rest = spec.partition(":")
    if kind == "scripted":
        if not os.path.isdir(rest):
            raise CliError(f"scripted fixture directory not found: {rest}")
        return ScriptedProvider.from_dir(rest)
    if kind == "remote":
        profiles = settings.get("providers", {})
        profile = profiles.get(rest)
        if profile is None:
            raise CliError(f"provider profile {rest!r} not found in config")
        return RemoteProvider(
            endpoint=profile["endpoint"],
            model_id=profile.get("model", ""),
            auth_token_env=profile.get("auth_token_env"),
            temperature=float(profile.get("temperature", 0.0)),
        )
    raise CliError(f"unknown provider spec {spec!r}")


def _open_store(settings: dict, embedder, fresh: bool = False) -> tuple[ActionSpace, str | None]:
    path = _setting(settings, "store", None)
    if path and os.path.exists(path) and not fresh:
        return ActionSpace.load(path), path
    return seed_initial_space(embedder), path


def _run_config(settings: dict) -> RunConfig:
    searcher = SearcherConfig(
        upper_threshold=float(_setting(settings, "upper", 0.99)),
        lower_threshold=float(_setting(settings, "lower", 0.5)),
        k=int(_setting(settings, "k", 3)),
    )
    return RunConfig(
        max_iterations=int(_setting(settings, "iterations", 5)),
        mode=_setting(settings, "mode", "parallel"),
        max_concurrency=int(_setting(settings, "concurrency", 8)),
        searcher=searcher,
        sim=SimConfig(),
        include_reason_feedback=bool(_setting(settings, "reason_feedback", True)),
        seed=int(_setting(settings, "seed", 0)),
        run_id=str(_setting(settings, "run_id", "run")),
    )


def _cmd_bench_run(args, settings: dict) -> int:
    embedder = _embedder(settings)
    provider = _provider(settings)
    config = _run_config(settings)
    entities = load_all_entities()
    tasks = load_benchmark(entities=entities)
    entity_filter = _setting(settings, "entity", None)
    if entity_filter:
        tasks = [t for t in tasks if t.entity == entity_filter]
    overlaps = lint_seed_overlap(tasks, load_seed_actions())
    for overlap in overlaps:
        print(f"note: seed text also appears in the benchmark: {overlap}")
    store, store_path = _open_store(settings, embedder, fresh=args.fresh)
    deps = Deps(entities=entities, embedder=embedder, provider=provider)
    runner = run_serial if config.mode == "serial" else run_parallel
    report = runner(tasks, store, deps, config)
    if store_path:
        store.save(store_path)
    out_dir = _setting(settings, "out", "runs/latest")
    written = emit_report(report, out_dir, config)
    passed = sum(1 for r in report.results if r.passed)
    print(f"{passed}/{len(report.results)} tasks passed; report in {out_dir}")
    for path in written:
        print(f"  wrote {path}")
    return 0 if passed == len(report.results) else 1


def _cmd_task_solve(args, settings: dict) -> int:
    embedder = _embedder(settings)
    provider = _provider(settings)
    config = _run_config(settings)
    entities = load_all_entities()
    tasks = [t for t in load_benchmark(entities=entities)
             if t.entity == args.entity and t.text == args.text]
    if not tasks:
        raise CliError(
            f"task {args.text!r} not in the benchmark for {args.entity}; "
            "task solve requires a benchmark task (predicates are fixture data)"
        )
    store, store_path = _open_store(settings, embedder)
    deps = Deps(entities=entities, embedder=embedder, provider=provider)
    result = solve_task(tasks[0], store.snapshot(args.entity), deps, config)
    print(f"status: {result.status}")
    print(f"iterations used: {result.iterations_used}, actor calls: {result.actor_calls}")
    if result.final_program is not None:
        print(serialize_program(result.final_program), end="")
    if result.verdicts and not result.passed:
        print(f"last verdict: {result.verdicts[-1].reasons}")
    return 0 if result.passed else 1


def _cmd_sim_exec(args, settings: dict) -> int:
    entity = load_builtin_entity(args.entity)
    try:
        with open(args.program_file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {args.program_file}: {exc}") from exc
    try:
        program = parse_program(text, entity)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    report = validate_program(program, entity)
    for issue in report.issues:
        print(f"{issue.severity.lower()}: {issue.message}")
    config = SimConfig()
    result = simulate(program, entity, config)
    print(f"return {result.return_code}")
    if result.return_code == 0:
        print(f"{result.trajectory.step_count} steps, "
              f"{len(result.trajectory.keyframes)} keyframes")
        if args.trace_out:
            with open(args.trace_out, "w", encoding="utf-8") as fh:
                fh.write(export_trajectory(result.trajectory, config))
            print(f"trace written to {args.trace_out}")
        return 0
    print(f"{result.error.kind}: {result.error.message}")
    return 1


def _cmd_store_inspect(args, settings: dict) -> int:
    path = _setting(settings, "store", None)
    if not path:
        raise CliError("--store is required")
    store = ActionSpace.load(path)
    print(f"version: {store.version}")
    print(f"records: {store.size()}")
    for entity in store.entities():
        snapshot = store.snapshot(entity)
        print(f"  {entity}: {len(snapshot)}")
        for record in snapshot.records:
            print(f"    [{record.provenance}] {record.task_text}")
    return 0


def _cmd_store_seed(args, settings: dict) -> int:
    path = _setting(settings, "store", None)
    if not path:
        raise CliError("--store is required")
    embedder = _embedder(settings)
    store = seed_initial_space(embedder)
    store.save(path)
    print(f"seeded store with {store.size()} records at {path}")
    return 0


def _cmd_search_query(args, settings: dict) -> int:
    embedder = _embedder(settings)
    config = SearcherConfig(
        upper_threshold=float(_setting(settings, "upper", 0.99)),
        lower_threshold=float(_setting(settings, "lower", 0.5)),
        k=int(_setting(settings, "k", 3)),
    )
    store, _ = _open_store(settings, embedder)
    outcome = select_actions(args.text, store.snapshot(args.entity), config, embedder)
    print(f"outcome: {outcome.kind}")
    for record, score in zip(outcome.records, outcome.scores):
        print(f"  {score:.4f}  {record.task_text}")
    return 0


def _cmd_report_render(args, settings: dict) -> int:
    if not os.path.isfile(os.path.join(args.run_dir, "results.json")):
        raise CliError(f"no results.json in {args.run_dir}")
    for path in render_from_results(args.run_dir):
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
