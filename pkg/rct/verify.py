from __future__ import annotations

from .delay import aggregate_electrical, natural_delays_all
from .region import RegionModel
from .router import RctTopology, verify_topology


def verify_tiling(region: RegionModel) -> list[str]:
    errors: list[str] = []
    floorplan = region.floorplan
    owners: dict[tuple[int, int], int] = {}
    for node in region.nodes:
        for cell in sorted(node.cells()):
            if cell in owners:
                errors.append(f"Cell {cell} is covered by nodes {owners[cell]} and {node.node_id}")
            owners[cell] = node.node_id
    expected = floorplan.grid_cols * floorplan.grid_rows
    if len(owners) != expected:
        errors.append(f"Blocks cover {len(owners)} of {expected} grid cells")
    if region.n != len(floorplan.placements):
        errors.append(f"Region has {region.n} node(s) for {len(floorplan.placements)} placement(s)")
    return errors


def verify_delays(region: RegionModel, topology: RctTopology) -> list[str]:
    errors: list[str] = []
    for corner, profile in natural_delays_all(region, topology).items():
        if profile.at(region.entry_node) != 0:
            errors.append(f"{corner}: T_nat of the entry node is {profile.at(region.entry_node)} fs, not 0")
        for edge in topology.edges:
            if profile.at(edge.child) <= profile.at(edge.parent):
                errors.append(
                    f"{corner}: T_nat does not increase along edge {edge.parent}->{edge.child}"
                )
        if corner == region.floorplan.corner_of_record and profile.reference_natural != profile.max_natural:
            errors.append(
                f"{corner}: node {region.furthest_node} is not the node of maximal natural delay"
            )
    return errors


def verify_electrical(region: RegionModel) -> list[str]:
    errors: list[str] = []
    for corner in region.corners:
        report = aggregate_electrical(region, corner)
        if not report.slew_rule_ok:
            errors.append(
                f"{corner}: slew at LCT entry {report.worst_slew[corner]} fs exceeds the "
                f"slew rule {report.max_slew_rule} fs"
            )
    return errors


def verify_region(region: RegionModel, topology: RctTopology) -> list[str]:
    errors = verify_tiling(region)
    errors.extend(verify_topology(topology, region).violations)
    if not errors:
        errors.extend(verify_delays(region, topology))
    errors.extend(verify_electrical(region))
    return errors
