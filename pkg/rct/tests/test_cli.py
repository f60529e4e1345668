from __future__ import annotations

import json

import pytest

from rct.cli import main
from rct.paths import floorplan_path, library_path
from rct.tests.builders import floorplan_doc


def _inputs(library: str, floorplan: str) -> list[str]:
    return ["--library", str(library_path(library)), "--floorplan", str(floorplan_path(floorplan))]


def test_validate_passes_the_drra_region(capsys):
    assert main(["validate", *_inputs("drra", "drra_8x3")]) == 0
    assert "Validate passed" in capsys.readouterr().out


def test_validate_reports_a_hole_as_a_model_violation(tmp_path, capsys):
    hole = tmp_path / "hole.json"
    hole.write_text(json.dumps(floorplan_doc(2, 2, placements=[["unit", 0, 0], ["unit", 1, 0], ["unit", 0, 1]])))
    code = main(["validate", "--library", str(library_path("chain")), "--floorplan", str(hole)])
    assert code == 1
    assert "- placements: uncovered cell(s) (1, 1)" in capsys.readouterr().err


def test_missing_input_is_an_input_error(tmp_path, capsys):
    code = main(["validate", "--library", str(tmp_path / "absent.json"), "--floorplan", str(floorplan_path("chain_3x1"))])
    assert code == 2
    assert "Could not read" in capsys.readouterr().err


def test_invalid_assignment_is_an_input_error(capsys):
    assert main(["analyze", *_inputs("chain", "chain_3x1"), "--assignment", "2,2,2"]) == 2
    assert "furthest node is pinned" in capsys.readouterr().err


def test_windowed_objective_needs_a_window(capsys):
    assert main(["optimize", *_inputs("mesh_m8", "mesh_3x2"), "--objective", "windowed"]) == 2


def test_feasibility_exit_codes(capsys):
    assert main(["feasibility", *_inputs("drra", "drra_8x3")]) == 0
    assert "Region is feasible at BC" in capsys.readouterr().out
    assert main(["feasibility", *_inputs("drra", "scale_25x3"), "--format", "json"]) == 1
    doc = json.loads(capsys.readouterr().out)
    assert doc["feasible"] is False
    assert doc["offending_nodes"]


def test_analyze_all_ones_reports_the_natural_spread(capsys):
    assert main(["analyze", *_inputs("drra", "drra_8x3"), "--assignment", "ones", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "analysis"
    assert doc["corners"]["BC"]["cost"]["skew_fs"] == 4_484_000
    assert doc["window"]["n_prime"] == 14
    assert doc["region"]["branch_lengths"] == [8, 8, 8]


def test_analyze_single_block_region(tmp_path, capsys):
    single = tmp_path / "single.json"
    single.write_text(json.dumps(floorplan_doc(1, 1)))
    code = main(["analyze", "--library", str(library_path("chain")), "--floorplan", str(single), "--format", "json"])
    assert code == 0
    cost = json.loads(capsys.readouterr().out)["corners"]["BC"]["cost"]
    assert cost["skew_fs"] == 0
    assert cost["l_abs_mean"]["fs"] == cost["g_abs_mean"]["fs"] == 0


def test_analyze_output_is_deterministic(capsys):
    args = ["analyze", *_inputs("drra", "drra_8x3"), "--format", "json"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first


def test_optimize_writes_assignment_and_cost(tmp_path):
    out = tmp_path / "run"
    assert main(["optimize", *_inputs("mesh_m8", "mesh_3x2"), "--out", str(out)]) == 0
    assignment = json.loads((out / "assignment.json").read_text())
    cost = json.loads((out / "cost.json").read_text())
    assert assignment["assignment"] == [8, 6, 3, 7, 4, 1]
    assert cost["objective"] == "G"
    assert cost["objective_cost"]["fs"] == 200_000
    assert not (out / "oracle.json").exists()
    assert (out / "run.meta.json").exists()


def test_optimized_assignment_feeds_analyze(tmp_path, capsys):
    out = tmp_path / "run"
    main(["optimize", *_inputs("mesh_m8", "mesh_3x2"), "--out", str(out)])
    capsys.readouterr()
    code = main(
        ["analyze", *_inputs("mesh_m8", "mesh_3x2"), "--assignment", str(out / "assignment.json"), "--format", "json"]
    )
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["assignment"]["indices"] == [8, 6, 3, 7, 4, 1]


def test_oracle_method_writes_the_comparison(tmp_path):
    out = tmp_path / "run"
    args = ["optimize", *_inputs("mesh_m8", "mesh_3x2"), "--method", "oracle", "--oracle-limit", "40000"]
    assert main([*args, "--out", str(out)]) == 0
    oracle = json.loads((out / "oracle.json").read_text())
    assert oracle["pruned"]["cost"]["fs"] == 200_000
    assert oracle["full"]["cost"]["fs"] <= 200_000


def test_oracle_guard_leaves_no_partial_output(tmp_path, capsys):
    out = tmp_path / "run"
    args = ["optimize", *_inputs("mesh_m8", "mesh_3x2"), "--method", "oracle", "--oracle-limit", "10"]
    assert main([*args, "--out", str(out)]) == 3
    assert not out.exists()
    assert "exceeds the limit of 10" in capsys.readouterr().err


def test_render_dot_and_svg(tmp_path, capsys):
    assert main(["render", *_inputs("drra", "drra_8x3")]) == 0
    assert capsys.readouterr().out.startswith("digraph rct {")
    svg = tmp_path / "rct.svg"
    assert main(["render", *_inputs("drra", "drra_8x3"), "--format", "svg", "--out", str(svg)]) == 0
    assert "<svg" in svg.read_text()


def test_sweep_size_reports_columns(capsys):
    assert main(["sweep-size", "--library", str(library_path("chain")), "--rows", "1", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["max_columns"] == 3
    assert doc["tap_range_fs"] == 1_000_000


@pytest.mark.parametrize(
    ("command", "extra"),
    [
        ("validate", ["--format", "json"]),
        ("feasibility", ["--format", "json"]),
        ("render", []),
        ("render", ["--format", "svg"]),
    ],
)
def test_commands_write_identical_bytes_on_rerun(tmp_path, command, extra):
    outputs = []
    for run in ("first", "second"):
        out = tmp_path / run / "output"
        assert main([command, *_inputs("drra", "drra_8x3"), *extra, "--out", str(out)]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    assert outputs[0]


def test_sweep_size_is_deterministic(tmp_path):
    outputs = []
    for run in ("first", "second"):
        out = tmp_path / f"{run}.json"
        args = ["sweep-size", "--library", str(library_path("drra")), "--rows", "3", "--taps", "16,32"]
        assert main([*args, "--format", "json", "--out", str(out)]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_optimize_documents_are_deterministic(tmp_path):
    runs = [tmp_path / "first", tmp_path / "second"]
    for out in runs:
        assert main(["optimize", *_inputs("drra", "drra_8x3"), "--out", str(out)]) == 0
    for name in ("assignment.json", "cost.json"):
        assert (runs[0] / name).read_bytes() == (runs[1] / name).read_bytes()


def test_optimize_runs_at_the_corner_of_record(tmp_path, capsys):
    assert main(["optimize", *_inputs("mesh_m8", "mesh_3x2"), "--corner", "BC", "--out", str(tmp_path / "bc")]) == 0
    capsys.readouterr()
    code = main(["optimize", *_inputs("drra", "drra_8x3"), "--corner", "WC", "--out", str(tmp_path / "wc")])
    assert code == 2
    assert "corner of record BC, not WC" in capsys.readouterr().err
    assert not (tmp_path / "wc").exists()
