"""Additive delay model, region-size feasibility and electrical aggregates.

T_nat of a node is the sum of chord delays on its path from the entry node;
each edge charges the chord of the child's block, keyed by the child's input
and continuing exit. The clock reaches a block's LCT at T_nat plus the
selected tap delay.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import TYPE_CHECKING

import networkx as nx

from .errors import AssignmentError
from .schema import ChordVariant, RowClass

if TYPE_CHECKING:
    from .region import BlockType, RegionModel, TapLine
    from .router import RctTopology

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DelayProfile:
    corner: str
    natural: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.natural)

    def at(self, node: int) -> int:
        return self.natural[node - 1]

    @property
    def max_natural(self) -> int:
        return max(self.natural)

    @property
    def reference_natural(self) -> int:
        """T_nat of node N, the balancing reference."""
        return self.natural[-1]


@dataclass(frozen=True)
class TapAssignment:
    indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.indices)

    def check(self, n: int, m: int, pinned: bool = True) -> None:
        problems = []
        if len(self.indices) != n:
            problems.append(f"expected {n} tap indices, got {len(self.indices)}")
        for node, index in enumerate(self.indices, start=1):
            if not 1 <= index <= m:
                problems.append(f"node {node}: tap index {index} outside 1..{m}")
        if pinned and len(self.indices) == n and self.indices and self.indices[-1] != 1:
            problems.append(f"node {n}: the furthest node is pinned to tap 1, got {self.indices[-1]}")
        if problems:
            raise AssignmentError("Invalid tap assignment", problems)


@dataclass(frozen=True)
class ArrivalProfile:
    corner: str
    arrival: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.arrival)

    def at(self, node: int) -> int:
        return self.arrival[node - 1]

    @property
    def skew(self) -> int:
        return max(self.arrival) - min(self.arrival)


@dataclass(frozen=True)
class FeasibilityReport:
    corner: str
    max_natural: int
    tap_range: int
    feasible: bool
    ideal: tuple[int, ...]
    in_range: tuple[bool, ...]

    @property
    def margin(self) -> int:
        return self.tap_range - self.max_natural

    @property
    def offending(self) -> tuple[int, ...]:
        return tuple(node for node, ok in enumerate(self.in_range, start=1) if not ok)


@dataclass(frozen=True)
class ElectricalReport:
    corner: str
    node_count: int
    total_rct_capacitance: Decimal
    total_lct_capacitance: Decimal
    worst_slew: Mapping[str, int]
    max_slew_rule: int
    slew_rule_ok: bool

    @property
    def rct_fraction(self) -> Decimal:
        total = self.total_rct_capacitance + self.total_lct_capacitance
        if total == 0:
            return Decimal(0)
        return self.total_rct_capacitance / total


@dataclass(frozen=True)
class SizeForTaps:
    taps: int
    tap_range: Fraction
    max_columns: int


@dataclass(frozen=True)
class CrossCornerReport:
    skew: Mapping[str, int]
    node_spread: tuple[int, ...]

    @property
    def worst_node(self) -> int:
        return max(range(len(self.node_spread)), key=lambda i: (self.node_spread[i], -i)) + 1

    @property
    def worst_spread(self) -> int:
        return max(self.node_spread)


def natural_delays(region: RegionModel, topology: RctTopology, corner: str) -> DelayProfile:
    natural = {region.entry_node: 0}
    graph = topology.to_networkx()
    for node in nx.topological_sort(graph):
        edge = topology.edge_into(node)
        if edge is None:
            continue
        block = region.node(node)
        chord = region.block_type(node).chord(edge.variant, block.row_class, corner)
        natural[node] = natural[edge.parent] + chord
    return DelayProfile(corner=corner, natural=tuple(natural[i] for i in range(1, region.n + 1)))


def natural_delays_all(region: RegionModel, topology: RctTopology) -> dict[str, DelayProfile]:
    return {corner: natural_delays(region, topology, corner) for corner in region.corners}


def arrival_times(
    profile: DelayProfile, taps: TapLine, assignment: TapAssignment, corner: str
) -> ArrivalProfile:
    line = taps.for_corner(corner)
    assignment.check(profile.n, len(line), pinned=False)
    arrival = tuple(t + line[i - 1] for t, i in zip(profile.natural, assignment.indices, strict=True))
    return ArrivalProfile(corner=corner, arrival=arrival)


def ideal_tap_delays(profile: DelayProfile, line: Sequence[int]) -> tuple[int, ...]:
    """Tap delay that would land each node exactly on T_LCT of node N at tap 1."""
    reference = profile.reference_natural + line[0]
    return tuple(reference - t for t in profile.natural)


def feasibility_max_size(profile: DelayProfile, taps: TapLine, corner: str) -> FeasibilityReport:
    line = taps.for_corner(corner)
    tap_range = line[-1] - line[0]
    ideal = ideal_tap_delays(profile, line)
    in_range = tuple(line[0] <= value <= line[-1] for value in ideal)
    report = FeasibilityReport(
        corner=corner,
        max_natural=profile.max_natural,
        tap_range=tap_range,
        feasible=profile.max_natural <= tap_range,
        ideal=ideal,
        in_range=in_range,
    )
    if not report.feasible:
        logger.warning(
            "Region infeasible at %s: max T_nat %d fs exceeds tap range %d fs (%d node(s) out of range)",
            corner,
            report.max_natural,
            tap_range,
            len(report.offending),
        )
    return report


def _row_classes(rows: int) -> list[RowClass]:
    return [RowClass.EDGE if r in (0, rows - 1) else RowClass.MIDDLE for r in range(rows)]


def _max_columns(block_type: BlockType, rows: int, corner: str, tap_range: Fraction | int) -> int:
    """Widest homogeneous spine-and-branch region whose max T_nat fits the tap range."""
    classes = _row_classes(rows)
    branch_step = [block_type.chord(ChordVariant.H_TO_H, rc, corner) for rc in classes]

    def spine(variant: ChordVariant) -> list[int]:
        totals = [0]
        for rc in classes[1:]:
            totals.append(totals[-1] + block_type.chord(variant, rc, corner))
        return totals

    # A single column never turns into a branch: its spine chords run V_to_V.
    single = spine(ChordVariant.V_TO_V)
    best = 1 if max(single) <= tap_range else 0

    row_ends = spine(ChordVariant.V_TO_H)
    columns = 2
    row_ends = [end + step for end, step in zip(row_ends, branch_step, strict=True)]
    while max(row_ends) <= tap_range:
        best = columns
        columns += 1
        row_ends = [end + step for end, step in zip(row_ends, branch_step, strict=True)]
    return best


def size_sweep(block_type: BlockType, rows: int, corner: str) -> int:
    if rows < 1:
        raise ValueError("rows must be positive")
    return _max_columns(block_type, rows, corner, block_type.tap_line.span(corner))


def size_vs_taps(
    block_type: BlockType, rows: int, corner: str, tap_counts: Iterable[int]
) -> list[SizeForTaps]:
    line = block_type.tap_line.for_corner(corner)
    pitch = Fraction(line[-1] - line[0], len(line) - 1) if len(line) > 1 else Fraction(0)
    results = []
    for count in tap_counts:
        if count < 1:
            raise ValueError("tap counts must be positive")
        tap_range = pitch * (count - 1)
        results.append(SizeForTaps(count, tap_range, _max_columns(block_type, rows, corner, tap_range)))
    return results


def aggregate_electrical(region: RegionModel, corner: str) -> ElectricalReport:
    types = [region.block_type(node.node_id) for node in region.nodes]
    worst = {c: max(t.slew_at_lct_entry[c] for t in types) for c in region.corners}
    ok = all(t.slew_at_lct_entry[corner] <= t.max_slew_rule for t in types)
    if not ok:
        logger.warning("Slew at LCT entry exceeds the slew rule at %s", corner)
    return ElectricalReport(
        corner=corner,
        node_count=region.n,
        total_rct_capacitance=sum((t.fragment_capacitance for t in types), Decimal(0)),
        total_lct_capacitance=sum((t.lct_capacitance for t in types), Decimal(0)),
        worst_slew=worst,
        max_slew_rule=min(t.max_slew_rule for t in types),
        slew_rule_ok=ok,
    )


def cross_corner_skew(
    region: RegionModel, topology: RctTopology, assignment: TapAssignment
) -> CrossCornerReport:
    arrivals = {
        corner: arrival_times(profile, region.tap_line, assignment, corner)
        for corner, profile in natural_delays_all(region, topology).items()
    }
    spread = tuple(
        max(a.arrival[i] for a in arrivals.values()) - min(a.arrival[i] for a in arrivals.values())
        for i in range(region.n)
    )
    return CrossCornerReport(skew={c: a.skew for c, a in arrivals.items()}, node_spread=spread)
