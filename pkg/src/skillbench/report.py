"""Run report files: delimited pass-rate data plus a rendered figure.

``emit_report`` writes into an output directory:

* results.json    -- per-task records and action-space sizes (deterministic)
* pass_rate.csv   -- cumulative pass rate by iteration, one row per
                     (iteration, entity) plus an "all" aggregate
* pass_rate.svg   -- cumulative pass-rate line chart (deterministic render)
* manifest.json   -- config echo + environment fingerprint (deterministic)
* timings.json    -- wall-clock per phase (naturally varies across runs)
"""

from __future__ import annotations

import csv
import io
import json
import os
import platform

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from . import __version__
from .orchestrator import RunConfig, RunReport
from .store import _program_to_obj

# Pin the svg id salt so renders are byte-stable across processes.
matplotlib.rcParams["svg.hashsalt"] = "skillbench"


def emit_report(report: RunReport, out_dir: str, config: RunConfig | None = None) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, content in (
        ("results.json", _results_json(report)),
        ("pass_rate.csv", _pass_rate_csv(report)),
        ("pass_rate.svg", _pass_rate_svg(report)),
        ("manifest.json", _manifest_json(report, config)),
        ("timings.json", json.dumps(report.phase_seconds, indent=2, sort_keys=True) + "\n"),
    ):
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(content)
        written.append(path)
    return written


def _results_json(report: RunReport) -> str:
    obj = {
        "run_id": report.run_id,
        "mode": report.mode,
        "max_iterations": report.max_iterations,
        "provider_calls": report.provider_calls,
        "space_sizes_by_version": [list(x) for x in report.space_sizes_by_version],
        "tasks": [
            {
                "id": r.task.id,
                "entity": r.task.entity,
                "text": r.task.text,
                "status": r.status,
                "pass_iteration": r.pass_iteration,
                "iterations_used": r.iterations_used,
                "actor_calls": r.actor_calls,
                "final_program": (
                    _program_to_obj(r.final_program) if r.final_program else None
                ),
                "verdicts": [v.to_obj() for v in r.verdicts],
            }
            for r in report.results
        ],
    }
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _rates(report: RunReport) -> list[tuple[int, str, int, int]]:
    rows = []
    entities = sorted(report.totals_by_entity)
    total_all = sum(report.totals_by_entity.values())
    for iteration in sorted(report.cumulative_passes):
        counts = report.cumulative_passes[iteration]
        for entity in entities:
            rows.append((iteration, entity, counts[entity], report.totals_by_entity[entity]))
        rows.append((iteration, "all", sum(counts.values()), total_all))
    return rows


def _pass_rate_csv(report: RunReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["iteration", "entity", "passed", "total", "pass_rate"])
    for iteration, entity, passed, total in _rates(report):
        rate = passed / total if total else 0.0
        writer.writerow([iteration, entity, passed, total, f"{rate:.4f}"])
    return buf.getvalue()


def _pass_rate_svg(report: RunReport) -> str:
    entities = sorted(report.totals_by_entity)
    iterations = sorted(report.cumulative_passes)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for entity in entities:
        total = report.totals_by_entity[entity]
        series = [
            report.cumulative_passes[i][entity] / total if total else 0.0
            for i in iterations
        ]
        ax.plot(iterations, series, marker="o", markersize=3, label=entity)
    total_all = sum(report.totals_by_entity.values())
    overall = [
        sum(report.cumulative_passes[i].values()) / total_all if total_all else 0.0
        for i in iterations
    ]
    ax.plot(iterations, overall, linestyle="--", color="black", label="all")
    ax.set_xlabel("iteration")
    ax.set_ylabel("cumulative pass rate")
    ax.set_xlim(0, report.max_iterations)
    ax.set_ylim(0, 1.05)
    ax.set_title(f"Pass rate by iteration ({report.mode})")
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(True, alpha=0.3)
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": "skillbench"})
    plt.close(fig)
    return buf.getvalue()


def render_from_results(run_dir: str) -> list[str]:
    """Rebuild pass_rate.csv and pass_rate.svg from a run dir's results.json."""
    with open(os.path.join(run_dir, "results.json"), encoding="utf-8") as fh:
        obj = json.load(fh)
    report = _report_from_results_obj(obj)
    written = []
    for name, content in (
        ("pass_rate.csv", _pass_rate_csv(report)),
        ("pass_rate.svg", _pass_rate_svg(report)),
    ):
        path = os.path.join(run_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(content)
        written.append(path)
    return written


def _report_from_results_obj(obj: dict) -> RunReport:
    from .benchmark import TaskSpec
    from .orchestrator import TaskResult

    results = []
    for t in obj["tasks"]:
        task = TaskSpec(id=t["id"], entity=t["entity"], text=t["text"], predicate=None)
        results.append(
            TaskResult(
                task=task,
                status=t["status"],
                pass_iteration=t["pass_iteration"],
                iterations_used=t["iterations_used"],
                actor_calls=t["actor_calls"],
                final_program=None,
            )
        )
    entities = sorted({r.task.entity for r in results})
    totals = {e: sum(1 for r in results if r.task.entity == e) for e in entities}
    max_iterations = obj["max_iterations"]
    cumulative = {
        i: {
            e: sum(
                1
                for r in results
                if r.task.entity == e and r.passed and (r.pass_iteration or 0) <= i
            )
            for e in entities
        }
        for i in range(0, max_iterations + 1)
    }
    return RunReport(
        run_id=obj["run_id"],
        mode=obj["mode"],
        max_iterations=max_iterations,
        results=results,
        cumulative_passes=cumulative,
        totals_by_entity=totals,
        space_sizes_by_version=[tuple(x) for x in obj["space_sizes_by_version"]],
        provider_calls=obj["provider_calls"],
        phase_seconds={},
    )


def _manifest_json(report: RunReport, config: RunConfig | None) -> str:
    obj = {
        "skillbench_version": __version__,
        "python_version": platform.python_version(),
        "run_id": report.run_id,
        "mode": report.mode,
        "max_iterations": report.max_iterations,
    }
    if config is not None:
        obj["config"] = {
            "max_iterations": config.max_iterations,
            "mode": config.mode,
            "max_concurrency": config.max_concurrency,
            "seed": config.seed,
            "include_reason_feedback": config.include_reason_feedback,
            "searcher": {
                "upper_threshold": config.searcher.upper_threshold,
                "lower_threshold": config.searcher.lower_threshold,
                "k": config.searcher.k,
            },
            "sim": {
                "dt": config.sim.dt,
                "tolerance": config.sim.tolerance,
                "max_steps": config.sim.max_steps,
            },
        }
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
