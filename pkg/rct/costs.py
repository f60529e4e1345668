"""Arrival-difference cost functions.

All costs are exact rationals in femtoseconds. Every objective is the mean of
|T_LCT_x - T_LCT_y| over a set of unordered node pairs: the star {x, N} gives
L_abs_mean, all pairs give G_abs_mean and a window pair set gives the
windowed mean. A region of one node costs 0 under every objective.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Any

from .delay import ArrivalProfile
from .units import rational_document, render_ps

Pair = tuple[int, int]


@dataclass(frozen=True)
class PairSet:
    """Unordered node pairs (smaller id first) that must be balanced against each other."""

    n: int
    pairs: frozenset[Pair]

    @classmethod
    def of(cls, n: int, pairs: Iterable[Pair]) -> PairSet:
        normalised = set()
        for x, y in pairs:
            if x == y:
                continue
            if not (1 <= x <= n and 1 <= y <= n):
                raise ValueError(f"pair ({x}, {y}) references a node outside 1..{n}")
            normalised.add((min(x, y), max(x, y)))
        return cls(n=n, pairs=frozenset(normalised))

    @classmethod
    def all(cls, n: int) -> PairSet:
        return cls(n=n, pairs=frozenset(combinations(range(1, n + 1), 2)))

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair: object) -> bool:
        if not isinstance(pair, tuple) or len(pair) != 2:
            return False
        x, y = pair
        return (min(x, y), max(x, y)) in self.pairs

    def neighbourhood(self) -> Mapping[int, frozenset[int]]:
        partners: dict[int, set[int]] = {node: set() for node in range(1, self.n + 1)}
        for x, y in self.pairs:
            partners[x].add(y)
            partners[y].add(x)
        return {node: frozenset(found) for node, found in partners.items()}

    @property
    def max_neighbours(self) -> int:
        """N': the largest number of partners any node has."""
        return max((len(found) for found in self.neighbourhood().values()), default=0)

    def is_complete(self) -> bool:
        return len(self.pairs) == self.n * (self.n - 1) // 2

    def sorted(self) -> list[Pair]:
        return sorted(self.pairs)


def star_pairs(n: int) -> PairSet:
    return PairSet(n=n, pairs=frozenset((x, n) for x in range(1, n)))


def _all_pairs_sum(values: Iterable[int]) -> int:
    ordered = sorted(values)
    total = 0
    prefix = 0
    for k, value in enumerate(ordered):
        total += value * k - prefix
        prefix += value
    return total


def pair_sum(arrival: tuple[int, ...], pairs: PairSet | None) -> int:
    """Sum of |a_x - a_y| over unordered pairs; None means every pair."""
    if pairs is None:
        return _all_pairs_sum(arrival)
    return sum(abs(arrival[x - 1] - arrival[y - 1]) for x, y in pairs.pairs)


def pair_mean(arrival: tuple[int, ...], pairs: PairSet | None) -> Fraction:
    n = len(arrival)
    count = n * (n - 1) // 2 if pairs is None else len(pairs)
    if n < 2 or count == 0:
        return Fraction(0)
    return Fraction(pair_sum(arrival, pairs), count)


def l_abs_mean(arrivals: ArrivalProfile) -> Fraction:
    if arrivals.n < 2:
        return Fraction(0)
    reference = arrivals.arrival[-1]
    return Fraction(sum(abs(a - reference) for a in arrivals.arrival[:-1]), arrivals.n - 1)


def g_abs_mean(arrivals: ArrivalProfile, pairs: PairSet | None = None) -> Fraction:
    # Each unordered pair appears twice among the N(N-1) ordered pairs, so the
    # ordered mean equals the unordered one.
    return pair_mean(arrivals.arrival, pairs)


@dataclass(frozen=True)
class CostReport:
    corner: str
    l_abs_mean: Fraction
    g_abs_mean: Fraction
    windowed_mean: Fraction | None
    skew: int
    diffs: tuple[int, ...]

    def to_document(self) -> dict[str, Any]:
        return {
            "corner": self.corner,
            "l_abs_mean": rational_document(self.l_abs_mean),
            "g_abs_mean": rational_document(self.g_abs_mean),
            "windowed_mean": None if self.windowed_mean is None else rational_document(self.windowed_mean),
            "skew_fs": self.skew,
            "diffs_vs_n_fs": list(self.diffs),
        }

    def summary(self) -> list[str]:
        lines = [
            f"L_abs_mean {render_ps(self.l_abs_mean)}",
            f"G_abs_mean {render_ps(self.g_abs_mean)}",
        ]
        if self.windowed_mean is not None:
            lines.append(f"windowed mean {render_ps(self.windowed_mean)}")
        lines.append(f"skew {render_ps(self.skew)}")
        return lines


def cost_report(arrivals: ArrivalProfile, window: PairSet | None = None) -> CostReport:
    reference = arrivals.arrival[-1]
    return CostReport(
        corner=arrivals.corner,
        l_abs_mean=l_abs_mean(arrivals),
        g_abs_mean=g_abs_mean(arrivals),
        windowed_mean=None if window is None else g_abs_mean(arrivals, window),
        skew=arrivals.skew,
        diffs=tuple(a - reference for a in arrivals.arrival),
    )
