from __future__ import annotations

from fractions import Fraction

import pytest

from rct.costs import PairSet, cost_report, g_abs_mean, l_abs_mean, pair_mean, pair_sum, star_pairs
from rct.delay import ArrivalProfile


def _arrivals(*ps: float) -> ArrivalProfile:
    return ArrivalProfile(corner="BC", arrival=tuple(round(value * 1_000) for value in ps))


def test_l_abs_mean_against_the_furthest_node():
    arrivals = ArrivalProfile("BC", (2_200_000, 1_700_000, 2_300_000, 2_100_000, 1_700_000, 2_000_000))
    assert l_abs_mean(arrivals) == Fraction(240_000)


def test_two_nodes_agree_on_both_objectives():
    arrivals = _arrivals(1_500, 1_800)
    assert l_abs_mean(arrivals) == g_abs_mean(arrivals) == Fraction(300_000)


def test_single_node_costs_nothing():
    arrivals = _arrivals(1_000)
    assert l_abs_mean(arrivals) == g_abs_mean(arrivals) == 0
    report = cost_report(arrivals)
    assert report.skew == 0
    assert report.diffs == (0,)


def test_g_abs_mean_is_exact():
    arrivals = _arrivals(2_000, 1_900, 2_000)
    assert g_abs_mean(arrivals) == Fraction(200_000, 3)


def test_all_pairs_sum_matches_the_explicit_pair_set():
    arrival = (5, 1, 9, 9, 4)
    assert pair_sum(arrival, None) == pair_sum(arrival, PairSet.all(5)) == 42


def test_star_pairs_reproduce_l_abs_mean():
    arrival = (3_000, 1_000, 2_500, 2_000)
    assert pair_mean(arrival, star_pairs(4)) == l_abs_mean(ArrivalProfile("BC", arrival))


def test_pair_set_normalises_and_rejects_strangers():
    pairs = PairSet.of(4, [(3, 1), (1, 3), (2, 2), (4, 2)])
    assert pairs.sorted() == [(1, 3), (2, 4)]
    assert (3, 1) in pairs
    assert pairs.max_neighbours == 1
    assert not pairs.is_complete()
    assert PairSet.all(4).is_complete()
    with pytest.raises(ValueError):
        PairSet.of(3, [(1, 4)])


def test_empty_pair_set_costs_nothing():
    assert pair_mean((1, 2, 3), PairSet.of(3, [])) == 0


def test_cost_report_documents_rationals():
    report = cost_report(_arrivals(2_000, 1_900, 2_000), window=PairSet.of(3, [(1, 2)]))
    doc = report.to_document()
    assert doc["g_abs_mean"] == {"num_fs": 200_000, "den": 3, "fs": 66_667}
    assert doc["windowed_mean"]["fs"] == 100_000
    assert doc["diffs_vs_n_fs"] == [0, -100_000, 0]
    assert report.summary()[0] == "L_abs_mean 50.000 ps"
