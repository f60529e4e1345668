"""Exhaustive search over the full tap configuration space, for cross-checking the optimizers."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np

from .costs import PairSet, pair_mean, star_pairs
from .delay import DelayProfile, TapAssignment, arrival_times
from .errors import SearchLimitExceeded
from .optimize import PrunedCandidates, SearchResult, global_optimize, local_optimize
from .settings import Settings

if TYPE_CHECKING:
    from .region import TapLine

logger = logging.getLogger(__name__)

OBJECTIVES = ("L", "G")


def brute_force_oracle(
    profile: DelayProfile,
    taps: TapLine,
    pairs: PairSet | None = None,
    objective: str = "G",
    limit: int = 1_000_000,
    chunk: int | None = None,
) -> SearchResult:
    """Optimum over all M^(N-1) configurations with node N on tap 1.

    Configurations are visited in lexicographic index order and only a strictly
    better cost replaces the incumbent. Refuses, never samples, when the space
    exceeds ``limit``.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    line = taps.for_corner(profile.corner)
    m = len(line)
    n = profile.n
    space = m ** (n - 1)
    if space > limit:
        raise SearchLimitExceeded(
            f"Oracle space of {space} configurations exceeds the limit of {limit}",
            [f"{n} node(s), {m} tap(s): M^(N-1) = {m}^{n - 1}"],
        )
    if objective == "L":
        pairs = star_pairs(n)
    if n == 1:
        return SearchResult(TapAssignment((1,)), Fraction(0), 0, "oracle", "exhaustive", 1, 1, 1)

    chunk = chunk or Settings().oracle_chunk
    natural = np.asarray(profile.natural, dtype=np.int64)
    delays = np.asarray(line, dtype=np.int64)
    pair_list = (
        [(x, y) for x in range(1, n + 1) for y in range(x + 1, n + 1)] if pairs is None else pairs.sorted()
    )
    left = np.asarray([x - 1 for x, _ in pair_list], dtype=np.intp)
    right = np.asarray([y - 1 for _, y in pair_list], dtype=np.intp)
    # Node 1 is the most significant digit so that flat order is lexicographic.
    place = m ** np.arange(n - 2, -1, -1, dtype=np.int64)

    best_sum: int | None = None
    best_index = 0
    for start in range(0, space, chunk):
        flat = np.arange(start, min(start + chunk, space), dtype=np.int64)
        digits = (flat[:, None] // place[None, :]) % m
        arrival = np.empty((flat.size, n), dtype=np.int64)
        arrival[:, :-1] = natural[None, :-1] + delays[digits]
        arrival[:, -1] = natural[-1] + delays[0]
        if pair_list:
            sums = np.abs(arrival[:, left] - arrival[:, right]).sum(axis=1)
        else:
            sums = np.zeros(flat.size, dtype=np.int64)
        k = int(np.argmin(sums))
        if best_sum is None or int(sums[k]) < best_sum:
            best_sum, best_index = int(sums[k]), int(flat[k])

    indices = tuple(int(d) + 1 for d in (best_index // place) % m) + (1,)
    assignment = TapAssignment(indices)
    arrivals = arrival_times(profile, taps, assignment, profile.corner)
    return SearchResult(
        assignment=assignment,
        cost=pair_mean(arrivals.arrival, pairs),
        pair_sum=best_sum,
        method="oracle",
        strategy="exhaustive",
        examined=space,
        full_space=space,
        pruned_space=space,
    )


@dataclass(frozen=True)
class OracleComparison:
    full: SearchResult
    pruned: SearchResult
    local: TapAssignment
    local_cost: Fraction

    @property
    def triple(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.full.cost, self.pruned.cost, self.local_cost)

    @property
    def pruned_is_optimal(self) -> bool:
        return self.full.cost == self.pruned.cost

    def to_document(self) -> dict[str, object]:
        from .units import rational_document

        return {
            "full": self.full.to_document(),
            "pruned": self.pruned.to_document(),
            "local": {"assignment": list(self.local.indices), "cost": rational_document(self.local_cost)},
            "pruned_is_optimal": self.pruned_is_optimal,
        }


def compare_with_oracle(
    profile: DelayProfile,
    taps: TapLine,
    candidates: PrunedCandidates,
    pairs: PairSet | None,
    limit: int,
    settings: Settings | None = None,
) -> OracleComparison:
    """Full optimum, pruned optimum and the local optimum cost under one pair set."""
    settings = settings or Settings()
    full = brute_force_oracle(profile, taps, pairs, "G", limit, settings.oracle_chunk)
    pruned = global_optimize(profile, taps, candidates, pairs, settings=settings)
    local = local_optimize(profile, taps)
    local_cost = pair_mean(arrival_times(profile, taps, local, profile.corner).arrival, pairs)
    comparison = OracleComparison(full=full, pruned=pruned, local=local, local_cost=local_cost)
    if not comparison.pruned_is_optimal:
        logger.warning(
            "Pruned optimum %s misses the full optimum %s; witness T_nat=%s taps=%s pruned=%s full=%s",
            pruned.cost,
            full.cost,
            list(profile.natural),
            list(taps.for_corner(profile.corner)),
            list(pruned.assignment.indices),
            list(full.assignment.indices),
        )
    return comparison
