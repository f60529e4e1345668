"""Workflows behind the CLI subcommands.

Each workflow loads the inputs, runs the model and returns a report document;
the CLI only formats and writes.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from .costs import PairSet, cost_report, pair_mean, star_pairs
from .delay import (
    DelayProfile,
    TapAssignment,
    aggregate_electrical,
    arrival_times,
    cross_corner_skew,
    feasibility_max_size,
    natural_delays,
    size_sweep,
    size_vs_taps,
)
from .errors import AssignmentError, ConfigError, LibraryError
from .optimize import PrunedCandidates, SearchResult, global_optimize, ideal_taps_and_prune, local_optimize, window_pairs
from .oracle import OracleComparison, compare_with_oracle
from .region import BlockLibrary, Floorplan, RegionModel, WindowSpec, build_region, read_block_library, read_floorplan
from .report import document
from .router import RctTopology, branches, route_rct
from .schema import AssignmentDocument, read_json, validate_document
from .settings import Settings
from .units import rational_document
from .verify import verify_region

logger = logging.getLogger(__name__)

OBJECTIVES = ("L", "G", "windowed")
METHODS = ("local", "global", "oracle")

_INDEX_LIST = re.compile(r"^\d+(,\d+)*$")


@dataclass(frozen=True)
class Workspace:
    library: BlockLibrary
    floorplan: Floorplan
    region: RegionModel
    topology: RctTopology
    settings: Settings

    @property
    def corner_of_record(self) -> str:
        return self.floorplan.corner_of_record

    def profile(self, corner: str | None = None) -> DelayProfile:
        return natural_delays(self.region, self.topology, corner or self.corner_of_record)

    def check_corner(self, corner: str | None) -> str:
        corner = corner or self.corner_of_record
        if corner not in self.region.corners:
            raise LibraryError(
                f"Corner {corner!r} is not characterised",
                [f"library corners: {', '.join(self.region.corners)}"],
            )
        return corner


def load_workspace(library_path: Path, floorplan_path: Path, settings: Settings | None = None) -> Workspace:
    library = read_block_library(library_path)
    floorplan = read_floorplan(floorplan_path, library)
    region = build_region(floorplan, library)
    return Workspace(library, floorplan, region, route_rct(region), settings or Settings())


def validate_workspace(workspace: Workspace) -> list[str]:
    return verify_region(workspace.region, workspace.topology)


def region_summary(workspace: Workspace) -> dict[str, Any]:
    floorplan = workspace.floorplan
    return {
        "cols": floorplan.grid_cols,
        "rows": floorplan.grid_rows,
        "n": workspace.region.n,
        "entry_corner": floorplan.entry_corner.value,
        "orientation": floorplan.orientation.value,
        "corner_of_record": floorplan.corner_of_record,
        "branch_lengths": [len(chain) for chain in branches(workspace.topology)],
    }


def resolve_assignment(workspace: Workspace, spec: str) -> tuple[str, TapAssignment]:
    region = workspace.region
    m = region.tap_line.m
    if spec == "local":
        assignment = local_optimize(workspace.profile(), region.tap_line)
        source = "local"
    elif spec == "ones":
        assignment = TapAssignment((1,) * region.n)
        source = "ones"
    elif _INDEX_LIST.match(spec):
        assignment = TapAssignment(tuple(int(part) for part in spec.split(",")))
        source = "list"
    else:
        path = Path(spec)
        if not path.exists():
            raise AssignmentError(f"Assignment {spec!r} is neither local, ones, an index list nor a file")
        doc = validate_document(AssignmentDocument, read_json(path), str(path))
        assignment = TapAssignment(tuple(doc.assignment))
        source = str(path)
    assignment.check(region.n, m, pinned=True)
    return source, assignment


def resolve_window(workspace: Workspace, override: WindowSpec | None) -> PairSet | None:
    window = override or workspace.floorplan.window
    if window is None:
        return None
    return window_pairs(workspace.region, window)


def objective_pairs(workspace: Workspace, objective: str, window: PairSet | None) -> PairSet | None:
    if objective == "L":
        return star_pairs(workspace.region.n)
    if objective == "windowed":
        if window is None:
            raise ConfigError("Objective 'windowed' needs a window (floorplan window or --window)")
        return window
    return None


def default_objective(window: PairSet | None) -> str:
    return "windowed" if window is not None else "G"


def _window_document(window: PairSet | None) -> dict[str, Any] | None:
    if window is None:
        return None
    return {"pairs": len(window), "n_prime": window.max_neighbours}


def _corner_section(
    workspace: Workspace, corner: str, assignment: TapAssignment, window: PairSet | None
) -> dict[str, Any]:
    region = workspace.region
    profile = workspace.profile(corner)
    line = region.tap_line.for_corner(corner)
    arrivals = arrival_times(profile, region.tap_line, assignment, corner)
    feasibility = feasibility_max_size(profile, region.tap_line, corner)
    electrical = aggregate_electrical(region, corner)
    nodes = []
    for node in region.nodes:
        i = node.node_id
        nodes.append(
            {
                "node": i,
                "col": node.col,
                "row": node.row,
                "row_class": node.row_class.value,
                "type": node.type_id,
                "t_nat_fs": profile.at(i),
                "tap": assignment.indices[i - 1],
                "tap_delay_fs": line[assignment.indices[i - 1] - 1],
                "t_lct_fs": arrivals.at(i),
                "ideal_tap_fs": feasibility.ideal[i - 1],
                "ideal_in_range": feasibility.in_range[i - 1],
            }
        )
    return {
        "nodes": nodes,
        "cost": cost_report(arrivals, window).to_document(),
        "feasibility": {
            "feasible": feasibility.feasible,
            "max_t_nat_fs": feasibility.max_natural,
            "tap_range_fs": feasibility.tap_range,
            "margin_fs": feasibility.margin,
            "offending_nodes": list(feasibility.offending),
        },
        "electrical": {
            "total_rct_capacitance_ff": float(electrical.total_rct_capacitance),
            "total_lct_capacitance_ff": float(electrical.total_lct_capacitance),
            "rct_fraction": round(float(electrical.rct_fraction), 6),
            "worst_slew_fs": electrical.worst_slew[corner],
            "max_slew_rule_fs": electrical.max_slew_rule,
            "slew_rule_ok": electrical.slew_rule_ok,
        },
    }


def analyse_region(
    workspace: Workspace,
    assignment_spec: str = "local",
    corner: str | None = None,
    window_override: WindowSpec | None = None,
) -> dict[str, Any]:
    corners = [workspace.check_corner(corner)] if corner else list(workspace.region.corners)
    source, assignment = resolve_assignment(workspace, assignment_spec)
    window = resolve_window(workspace, window_override)
    cross = cross_corner_skew(workspace.region, workspace.topology, assignment)
    return document(
        "analysis",
        {
            "region": region_summary(workspace),
            "assignment": {"source": source, "indices": list(assignment.indices)},
            "window": _window_document(window),
            "corners": {c: _corner_section(workspace, c, assignment, window) for c in corners},
            "cross_corner": {
                "skew_fs": dict(cross.skew),
                "worst_node": cross.worst_node,
                "worst_spread_fs": cross.worst_spread,
            },
        },
    )


@dataclass(frozen=True)
class OptimizeOutcome:
    assignment: dict[str, Any]
    cost: dict[str, Any]
    oracle: dict[str, Any] | None


def _candidates_document(candidates: PrunedCandidates) -> list[dict[str, Any]]:
    return [
        {
            "node": node,
            "ideal_tap_fs": candidates.ideal[node - 1],
            "candidates": list(candidates.at(node)),
            "clamped": candidates.clamped[node - 1],
        }
        for node in range(1, len(candidates.candidates) + 1)
    ]


def _objective_costs(profile: DelayProfile, workspace: Workspace, assignment: TapAssignment, window: PairSet | None) -> dict[str, Any]:
    arrival = arrival_times(profile, workspace.region.tap_line, assignment, profile.corner).arrival
    costs = {
        "L": rational_document(pair_mean(arrival, star_pairs(len(arrival)))),
        "G": rational_document(pair_mean(arrival, None)),
    }
    if window is not None:
        costs["windowed"] = rational_document(pair_mean(arrival, window))
    return costs


def optimize_region(
    workspace: Workspace,
    method: str = "global",
    objective: str | None = None,
    window_override: WindowSpec | None = None,
    oracle_limit: int | None = None,
    strategy: str = "auto",
    corner: str | None = None,
) -> OptimizeOutcome:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if workspace.check_corner(corner) != workspace.corner_of_record:
        raise ConfigError(
            f"Optimisation runs at the corner of record {workspace.corner_of_record}, not {corner}",
            ["other corners are reported in cost.json under corners"],
        )
    region = workspace.region
    profile = workspace.profile()
    taps = region.tap_line
    window = resolve_window(workspace, window_override)
    objective = objective or default_objective(window)
    pairs = objective_pairs(workspace, objective, window)
    candidates = ideal_taps_and_prune(profile, taps)
    local = local_optimize(profile, taps)

    search: SearchResult | None = None
    comparison: OracleComparison | None = None
    if method == "local":
        assignment = local
    elif method == "global":
        search = global_optimize(
            profile, taps, candidates, pairs, strategy=strategy, order=region.sweep_order(), settings=workspace.settings
        )
        assignment = search.assignment
    else:
        if oracle_limit is None:
            raise ConfigError("--method oracle requires --oracle-limit")
        comparison = compare_with_oracle(profile, taps, candidates, pairs, oracle_limit, workspace.settings)
        search = comparison.full
        assignment = search.assignment

    arrivals = arrival_times(profile, taps, assignment, profile.corner)
    objective_cost = pair_mean(arrivals.arrival, pairs)
    assignment_doc = document(
        "assignment",
        {
            "assignment": list(assignment.indices),
            "method": method,
            "objective": objective,
            "corner": profile.corner,
        },
    )
    cost_doc = document(
        "cost",
        {
            "method": method,
            "objective": objective,
            "corner": profile.corner,
            "objective_cost": rational_document(objective_cost),
            "search": None if search is None else search.to_document(),
            "candidates": _candidates_document(candidates),
            "window": _window_document(window),
            "local_vs_result": {
                "local": {
                    "assignment": list(local.indices),
                    **_objective_costs(profile, workspace, local, window),
                },
                "result": {
                    "assignment": list(assignment.indices),
                    **_objective_costs(profile, workspace, assignment, window),
                },
            },
            "corners": {
                corner: cost_report(
                    arrival_times(workspace.profile(corner), taps, assignment, corner), window
                ).to_document()
                for corner in region.corners
            },
        },
    )
    oracle_doc = None
    if comparison is not None:
        oracle_doc = document("oracle", {"objective": objective, **comparison.to_document()})
    return OptimizeOutcome(assignment=assignment_doc, cost=cost_doc, oracle=oracle_doc)


def feasibility_region(workspace: Workspace, corner: str | None = None) -> tuple[bool, dict[str, Any]]:
    corner = workspace.check_corner(corner)
    report = feasibility_max_size(workspace.profile(corner), workspace.region.tap_line, corner)
    doc = document(
        "feasibility",
        {
            "corner": corner,
            "feasible": report.feasible,
            "max_t_nat_fs": report.max_natural,
            "tap_range_fs": report.tap_range,
            "margin_fs": report.margin,
            "offending_nodes": list(report.offending),
            "ideal_tap_fs": list(report.ideal),
        },
    )
    return report.feasible, doc


def sweep_library(
    library: BlockLibrary,
    type_id: str | None,
    rows: int,
    corner: str,
    tap_counts: list[int] | None = None,
) -> dict[str, Any]:
    type_id = type_id or next(iter(library.types))
    if type_id not in library.types:
        raise LibraryError(f"Unknown block type {type_id!r}", [f"library types: {', '.join(library.types)}"])
    if corner not in library.corners:
        raise LibraryError(f"Corner {corner!r} is not characterised")
    block_type = library[type_id]
    counts = tap_counts or [block_type.tap_line.m]
    return document(
        "size-sweep",
        {
            "type": type_id,
            "rows": rows,
            "corner": corner,
            "tap_range_fs": block_type.tap_line.span(corner),
            "max_columns": size_sweep(block_type, rows, corner),
            "by_tap_count": [
                {
                    "taps": entry.taps,
                    "tap_range": rational_document(Fraction(entry.tap_range)),
                    "max_columns": entry.max_columns,
                }
                for entry in size_vs_taps(block_type, rows, corner, counts)
            ],
        },
    )
