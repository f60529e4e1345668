from __future__ import annotations

import random
from decimal import Decimal

import networkx as nx
import pytest

from rct.delay import (
    TapAssignment,
    aggregate_electrical,
    arrival_times,
    cross_corner_skew,
    feasibility_max_size,
    natural_delays,
    size_sweep,
    size_vs_taps,
)
from rct.errors import AssignmentError
from rct.region import build_region, load_block_library, load_floorplan
from rct.router import route_rct
from rct.tests.builders import build, floorplan_doc, library_doc, profile, random_region, tap_line


def test_chain_natural_delays_and_arrivals(chain):
    natural = chain.profile()
    assert natural.natural == (0, 500_000, 1_000_000)
    arrivals = arrival_times(natural, chain.region.tap_line, TapAssignment((6, 3, 1)), "BC")
    assert arrivals.arrival == (2_000_000, 1_900_000, 2_000_000)
    assert arrivals.skew == 100_000


def test_mesh_natural_delays(mesh):
    assert mesh.profile().natural == (0, 1_500_000, 3_000_000, 1_000_000, 2_500_000, 4_000_000)


def test_drra_row_ends_at_best_case(drra):
    natural = drra.profile("BC")
    by_position = {(n.col, n.row): natural.at(n.node_id) for n in drra.region.nodes}
    assert by_position[(7, 0)] == 7 * 465_000
    assert by_position[(7, 1)] == 617_000 + 7 * 469_000
    assert by_position[(7, 2)] == 1_229_000 + 7 * 465_000 == 4_484_000
    assert natural.reference_natural == natural.max_natural == 4_484_000


def test_natural_delay_is_the_path_sum_of_chords():
    rng = random.Random(11)
    for _ in range(25):
        region, topology = random_region(rng, max_nodes=12)
        natural = natural_delays(region, topology, "BC")
        graph = topology.to_networkx()
        for node in region.nodes:
            path = nx.shortest_path(graph, region.entry_node, node.node_id)
            expected = sum(
                region.block_type(child).chord(
                    topology.edge_into(child).variant, region.node(child).row_class, "BC"
                )
                for child in path[1:]
            )
            assert natural.at(node.node_id) == expected


def test_natural_delays_strictly_increase_along_edges(drra):
    for corner in ("BC", "WC"):
        natural = drra.profile(corner)
        assert natural.at(1) == 0
        for edge in drra.topology.edges:
            assert natural.at(edge.child) > natural.at(edge.parent)


def test_assignment_checks_range_and_length():
    taps = tap_line([1_000, 2_000, 3_000])
    natural = profile([0, 10, 20])
    with pytest.raises(AssignmentError) as exc_info:
        arrival_times(natural, taps, TapAssignment((4, 1)), "BC")
    assert exc_info.value.items == ["expected 3 tap indices, got 2", "node 1: tap index 4 outside 1..3"]
    with pytest.raises(AssignmentError):
        TapAssignment((2, 2, 2)).check(3, 3, pinned=True)


def test_shifting_every_tap_shifts_every_arrival_alike():
    rng = random.Random(5)
    for _ in range(20):
        region, topology = random_region(rng)
        natural = natural_delays(region, topology, "BC")
        m = region.tap_line.m
        assignment = TapAssignment(tuple(rng.randint(1, m) for _ in range(region.n - 1)) + (1,))
        before = arrival_times(natural, region.tap_line, assignment, "BC")
        after = arrival_times(natural, region.tap_line.shifted(37_000), assignment, "BC")
        assert [b - a for a, b in zip(before.arrival, after.arrival, strict=True)] == [37_000] * region.n
        assert after.skew == before.skew


def test_feasibility_verdict_against_the_tap_range():
    taps = tap_line([1_000_000, 5_500_000])
    assert feasibility_max_size(profile([0, 2_000_000, 4_000_000]), taps, "BC").feasible
    report = feasibility_max_size(profile([0, 2_000_000, 4_600_000]), taps, "BC")
    assert not report.feasible
    assert report.margin == -100_000
    assert report.offending == (1,)


def test_feasibility_matches_every_ideal_tap_in_range():
    rng = random.Random(3)
    for _ in range(200):
        region, topology = random_region(rng)
        report = feasibility_max_size(natural_delays(region, topology, "BC"), region.tap_line, "BC")
        assert report.feasible == all(report.in_range)


def test_drra_is_feasible_at_both_corners_and_scale_is_not(drra, scale):
    best = feasibility_max_size(drra.profile("BC"), drra.region.tap_line, "BC")
    assert best.feasible
    assert best.margin == 16_000
    assert feasibility_max_size(drra.profile("WC"), drra.region.tap_line, "WC").feasible

    oversized = feasibility_max_size(scale.profile(), scale.region.tap_line, "BC")
    assert not oversized.feasible
    assert oversized.offending


def test_size_sweep_counts_columns_within_the_tap_range():
    library = load_block_library(library_doc(taps=[Decimal("1.0"), Decimal("5.5")]))
    assert size_sweep(library["unit"], rows=1, corner="BC") == 10

    single = load_block_library(library_doc(taps=[Decimal("1.0")]))
    assert size_sweep(single["unit"], rows=1, corner="BC") == 1


def _drra_region(library, cols):
    region = build_region(load_floorplan(floorplan_doc(cols, 3, type_id="drra"), library), library)
    return region, route_rct(region)


def test_size_sweep_agrees_with_built_regions(drra):
    block_type = drra.library["drra"]
    for corner in ("BC", "WC"):
        span = block_type.tap_line.span(corner)
        fits = [
            cols
            for cols in range(1, 16)
            if max(natural_delays(*_drra_region(drra.library, cols), corner).natural) <= span
        ]
        assert size_sweep(block_type, 3, corner) == max(fits)


def test_adding_a_column_never_lowers_the_furthest_delay(drra):
    for corner in ("BC", "WC"):
        furthest = [
            natural_delays(*_drra_region(drra.library, cols), corner).max_natural for cols in range(1, 16)
        ]
        assert furthest == sorted(furthest)
        assert furthest[0] < furthest[-1]


def test_size_never_shrinks_with_more_taps(drra):
    results = size_vs_taps(drra.library["drra"], 3, "BC", [2, 8, 16, 32, 64])
    columns = [r.max_columns for r in results]
    assert columns == sorted(columns)
    assert results[-2].tap_range == drra.region.tap_line.span("BC")


def test_electrical_totals_for_the_drra_region(drra):
    report = aggregate_electrical(drra.region, "BC")
    assert report.total_rct_capacitance == Decimal("3897.6")
    assert report.total_lct_capacitance == Decimal("126000")
    assert report.total_rct_capacitance + report.total_lct_capacitance == Decimal("129897.6")
    assert abs(report.rct_fraction - Decimal("0.03")) / Decimal("0.03") < Decimal("0.005")
    assert report.slew_rule_ok
    assert report.worst_slew == {"BC": 67_000, "WC": 74_000}


def test_slew_rule_violation_is_reported():
    region, _ = build(library_doc(slew_ps=120), floorplan_doc(2, 1))
    assert not aggregate_electrical(region, "BC").slew_rule_ok


def test_cross_corner_skew_per_node(drra):
    assignment = TapAssignment((1,) * 24)
    report = cross_corner_skew(drra.region, drra.topology, assignment)
    assert report.skew["BC"] == 4_484_000
    best, worst = drra.profile("BC"), drra.profile("WC")
    line_bc, line_wc = drra.region.tap_line.for_corner("BC"), drra.region.tap_line.for_corner("WC")
    expected = tuple(abs((b + line_bc[0]) - (w + line_wc[0])) for b, w in zip(best.natural, worst.natural, strict=True))
    assert report.node_spread == expected
    assert report.worst_spread == max(expected)
