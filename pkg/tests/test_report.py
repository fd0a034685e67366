import csv
import json

from skillbench.actor import KthTryProvider, ScriptedProvider
from skillbench.benchmark import TaskSpec
from skillbench.orchestrator import Deps, RunConfig, run_parallel
from skillbench.predicates import Reaches
from skillbench.programs import ActionProgram
from skillbench.report import emit_report, render_from_results
from skillbench.store import ActionSpace

from conftest import StubEmbedder, scripted_text, unit

RIGHT = TaskSpec(
    id="c1", entity="Cartpole", text="right move the slider",
    predicate=Reaches(0, 0.5, 0.01),
)
RIGHT_PROGRAM = ActionProgram(states=[{0: 0.5}])


def small_report(entities, k=2, iterations=3):
    provider = KthTryProvider(
        {("Cartpole", RIGHT.text): scripted_text(RIGHT_PROGRAM)}, k=k
    )
    deps = Deps(
        entities=entities,
        embedder=StubEmbedder({RIGHT.text: unit(1, 0, 0, 0)}),
        provider=provider,
    )
    config = RunConfig(max_iterations=iterations)
    return run_parallel([RIGHT], ActionSpace(), deps, config), config


def test_emit_writes_expected_files(tmp_path, entities):
    report, config = small_report(entities)
    written = emit_report(report, str(tmp_path), config)
    names = sorted(p.rsplit("/", 1)[-1] for p in written)
    assert names == [
        "manifest.json", "pass_rate.csv", "pass_rate.svg",
        "results.json", "timings.json",
    ]
    for path in written:
        assert (tmp_path / path.rsplit("/", 1)[-1]).stat().st_size > 0


def test_csv_has_one_row_per_iteration_entity_plus_aggregate(tmp_path, entities):
    report, config = small_report(entities, iterations=3)
    emit_report(report, str(tmp_path), config)
    with open(tmp_path / "pass_rate.csv") as fh:
        rows = list(csv.DictReader(fh))
    iterations = {int(r["iteration"]) for r in rows}
    assert iterations == {0, 1, 2, 3}
    per_iteration = [r for r in rows if int(r["iteration"]) == 2]
    assert {r["entity"] for r in per_iteration} == {"Cartpole", "all"}
    final = [r for r in rows if int(r["iteration"]) == 3 and r["entity"] == "all"]
    assert final[0]["pass_rate"] == "1.0000"


def test_results_json_carries_per_task_records(tmp_path, entities):
    report, config = small_report(entities)
    emit_report(report, str(tmp_path), config)
    obj = json.loads((tmp_path / "results.json").read_text())
    assert len(obj["tasks"]) == 1
    task = obj["tasks"][0]
    assert task["status"] == "PassedByActor"
    assert task["pass_iteration"] == 2
    assert task["final_program"]["state_destination"] == [{"0": 0.5}]


def test_repeated_emission_is_byte_identical_except_timings(tmp_path, entities):
    report, config = small_report(entities)
    emit_report(report, str(tmp_path / "a"), config)
    emit_report(report, str(tmp_path / "b"), config)
    for name in ("results.json", "pass_rate.csv", "pass_rate.svg", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_svg_is_a_vector_figure_with_iteration_axis(tmp_path, entities):
    report, config = small_report(entities, iterations=4)
    emit_report(report, str(tmp_path), config)
    svg = (tmp_path / "pass_rate.svg").read_text()
    assert svg.lstrip().startswith("<?xml")
    assert "<svg" in svg


def test_manifest_echoes_config(tmp_path, entities):
    report, config = small_report(entities)
    emit_report(report, str(tmp_path), config)
    obj = json.loads((tmp_path / "manifest.json").read_text())
    assert obj["config"]["max_iterations"] == config.max_iterations
    assert obj["config"]["searcher"]["upper_threshold"] == 0.99
    assert obj["config"]["sim"]["max_steps"] == 5000
    assert obj["mode"] == "parallel"


def test_render_from_results_rebuilds_figures(tmp_path, entities):
    report, config = small_report(entities)
    emit_report(report, str(tmp_path), config)
    original_csv = (tmp_path / "pass_rate.csv").read_bytes()
    original_svg = (tmp_path / "pass_rate.svg").read_bytes()
    (tmp_path / "pass_rate.csv").unlink()
    (tmp_path / "pass_rate.svg").unlink()
    render_from_results(str(tmp_path))
    assert (tmp_path / "pass_rate.csv").read_bytes() == original_csv
    assert (tmp_path / "pass_rate.svg").read_bytes() == original_svg
