from __future__ import annotations

from rct.delay import arrival_times
from rct.optimize import local_optimize
from rct.render import build_chart, diagram_frames
from rct.tests.builders import build, floorplan_doc, library_doc


def test_drra_diagram_has_a_spine_and_three_branches(drra):
    assignment = local_optimize(drra.profile(), drra.region.tap_line)
    arrivals = arrival_times(drra.profile(), drra.region.tap_line, assignment, "BC")
    nodes, lines = diagram_frames(drra.region, drra.topology, assignment, arrivals)
    assert len(nodes) == 24
    assert nodes["entry"].sum() == 1
    assert lines.loc[lines["kind"] == "branch", "line"].nunique() == 3
    spine = lines[lines["kind"] == "spine"].sort_values("order")
    assert spine["x"].tolist() == [0.5, 0.5, 0.5]
    assert spine["y"].tolist() == [0.5, 1.5, 2.5]
    assert nodes.loc[nodes["node"] == 24, "label"].item().startswith("24 t1 ")


def test_single_row_has_no_spine_line():
    region, topology = build(library_doc(), floorplan_doc(4, 1))
    nodes, lines = diagram_frames(region, topology)
    assert set(lines["kind"]) == {"branch"}
    assert nodes["tap"].isna().all()


def test_chart_layers_the_tree_over_the_blocks(drra):
    chart = build_chart(drra.region, drra.topology)
    spec = chart.to_dict()
    assert len(spec["layer"]) == 3
