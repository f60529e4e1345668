"""Regional clock tree composition by abutment.

Every block carries one RCT fragment with entry points H_in/V_in and exit points
H_out/V_out. The router fixes each fragment's configuration so that the
fragments abut into a vertical spine down the entry column with one
horizontal branch per block row.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from typing import TYPE_CHECKING

import networkx as nx

from .schema import ChordVariant

if TYPE_CHECKING:
    from .region import RegionModel, RegionNode

logger = logging.getLogger(__name__)


class InputSelect(StrEnum):
    H_IN = "H_in"
    V_IN = "V_in"
    NONE = "NONE"


class Exit(StrEnum):
    H_OUT = "H_out"
    V_OUT = "V_out"


@dataclass(frozen=True)
class FragmentConfig:
    node: int
    input_select: InputSelect
    enable_h_out: bool
    enable_v_out: bool

    def enabled(self, exit_point: Exit) -> bool:
        return self.enable_h_out if exit_point is Exit.H_OUT else self.enable_v_out


@dataclass(frozen=True)
class Edge:
    parent: int
    child: int
    variant: ChordVariant

    @property
    def exit(self) -> Exit:
        return Exit.H_OUT if self.variant.value.startswith("H") else Exit.V_OUT


@dataclass(frozen=True)
class RctTopology:
    configs: tuple[FragmentConfig, ...]
    edges: tuple[Edge, ...]
    _config_by_node: Mapping[int, FragmentConfig] = field(init=False, repr=False, compare=False)
    _edge_by_child: Mapping[int, Edge] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_config_by_node", {c.node: c for c in self.configs})
        object.__setattr__(self, "_edge_by_child", {e.child: e for e in self.edges})

    def config(self, node: int) -> FragmentConfig:
        return self._config_by_node[node]

    def edge_into(self, node: int) -> Edge | None:
        return self._edge_by_child.get(node)

    def children(self, node: int) -> list[int]:
        return sorted(edge.child for edge in self.edges if edge.parent == node)

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        for config in self.configs:
            graph.add_node(
                config.node,
                input_select=config.input_select.value,
                enable_h_out=config.enable_h_out,
                enable_v_out=config.enable_v_out,
            )
        for edge in self.edges:
            graph.add_edge(edge.parent, edge.child, variant=edge.variant.value, exit=edge.exit.value)
        return graph


@dataclass(frozen=True)
class StructuralReport:
    node_count: int
    edge_count: int
    branch_lengths: tuple[int, ...]
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def chord_variant(config: FragmentConfig) -> ChordVariant | None:
    """Chord traversed inside a fragment: selected input paired with the continuing exit.

    A leaf fragment keeps its input direction. The entry fragment has no chord.
    """
    if config.input_select is InputSelect.NONE:
        return None
    first = "H" if config.input_select is InputSelect.H_IN else "V"
    if config.enable_h_out:
        second = "H"
    elif config.enable_v_out:
        second = "V"
    else:
        second = first
    return ChordVariant(f"{first}_to_{second}")


def spine_and_branch(branches: list[list[int]]) -> tuple[list[FragmentConfig], list[tuple[int, int, Exit]]]:
    """Fragment settings for rows of node ids; row 0 starts with the entry node."""
    configs: list[FragmentConfig] = []
    links: list[tuple[int, int, Exit]] = []
    last_branch = len(branches) - 1
    for b, row in enumerate(branches):
        for rank, node in enumerate(row):
            if rank == 0:
                configs.append(
                    FragmentConfig(
                        node=node,
                        input_select=InputSelect.NONE if b == 0 else InputSelect.V_IN,
                        enable_h_out=len(row) > 1,
                        enable_v_out=b < last_branch,
                    )
                )
                if b > 0:
                    links.append((branches[b - 1][0], node, Exit.V_OUT))
            else:
                configs.append(
                    FragmentConfig(
                        node=node,
                        input_select=InputSelect.H_IN,
                        enable_h_out=rank < len(row) - 1,
                        enable_v_out=False,
                    )
                )
                links.append((row[rank - 1], node, Exit.H_OUT))
    return configs, links


def assemble(configs: Iterable[FragmentConfig], links: Iterable[tuple[int, int, Exit]]) -> RctTopology:
    configs = sorted(configs, key=lambda c: c.node)
    by_node = {config.node: config for config in configs}
    edges = []
    for parent, child, _exit in links:
        variant = chord_variant(by_node[child])
        if variant is None:
            raise ValueError(f"node {child} is driven but selects no input")
        edges.append(Edge(parent=parent, child=child, variant=variant))
    return RctTopology(configs=tuple(configs), edges=tuple(sorted(edges, key=lambda e: e.child)))


def route_rct(region: RegionModel) -> RctTopology:
    configs, links = spine_and_branch(region.branches())
    topology = assemble(configs, links)
    logger.debug(
        "Routed %d fragment(s) into %d branch(es) with %d edge(s)",
        region.n,
        len(region.branches()),
        len(topology.edges),
    )
    return topology


def branches(topology: RctTopology) -> list[list[int]]:
    """Spine nodes and the horizontal chains they drive, in spine order."""
    spine: list[int] = []
    node: int | None = next(
        (c.node for c in topology.configs if c.input_select is InputSelect.NONE), None
    )
    while node is not None:
        spine.append(node)
        node = next(
            (child for child in topology.children(node) if topology.edge_into(child).exit is Exit.V_OUT),
            None,
        )
    result = []
    for head in spine:
        chain = [head]
        while True:
            successor = next(
                (
                    child
                    for child in topology.children(chain[-1])
                    if topology.edge_into(child).exit is Exit.H_OUT
                ),
                None,
            )
            if successor is None:
                break
            chain.append(successor)
        result.append(chain)
    return result


def _neighbours(region: RegionModel) -> tuple[dict[int, int], dict[int, int]]:
    """East and south neighbours in the propagation frame, keyed by node id."""
    by_origin: dict[tuple[int, int], RegionNode] = {
        (node.frame_col, node.frame_row): node for node in region.nodes
    }
    east: dict[int, int] = {}
    south: dict[int, int] = {}
    for node in region.nodes:
        right = by_origin.get((node.frame_col + node.width, node.frame_row))
        if right is not None:
            east[node.node_id] = right.node_id
        below = by_origin.get((node.frame_col, node.frame_row + node.height))
        if below is not None:
            south[node.node_id] = below.node_id
    return east, south


def _check_configs(
    topology: RctTopology, region: RegionModel, violations: list[str]
) -> dict[int, FragmentConfig]:
    configs: dict[int, FragmentConfig] = {}
    for config in topology.configs:
        if config.node in configs:
            violations.append(f"node {config.node}: more than one fragment configuration")
        configs[config.node] = config
    expected = {node.node_id for node in region.nodes}
    for node in sorted(expected - set(configs)):
        violations.append(f"node {node}: missing fragment configuration")
    for node in sorted(set(configs) - expected):
        violations.append(f"node {node}: configuration for a node outside the region")
    return {node: config for node, config in configs.items() if node in expected}


def _check_tree(topology: RctTopology, region: RegionModel, violations: list[str]) -> None:
    graph = nx.DiGraph()
    graph.add_nodes_from(node.node_id for node in region.nodes)
    graph.add_edges_from((edge.parent, edge.child) for edge in topology.edges)

    if len(topology.edges) != region.n - 1:
        violations.append(f"tree: expected {region.n - 1} edge(s), found {len(topology.edges)}")
    for node, degree in sorted(graph.in_degree()):
        if degree > 1:
            violations.append(f"node {node}: driven by {degree} parents (single driver required)")
    if region.entry_node in graph and graph.in_degree(region.entry_node) > 0:
        violations.append(f"node {region.entry_node}: entry node is driven from inside the region")
    if not nx.is_directed_acyclic_graph(graph):
        violations.append("tree: clock edges form a cycle")
    reachable = nx.descendants(graph, region.entry_node) | {region.entry_node}
    unreachable = sorted(set(graph.nodes) - reachable)
    if unreachable:
        violations.append(
            "tree: node(s) not reachable from the entry node: " + ", ".join(map(str, unreachable))
        )


def _check_entry(region: RegionModel, configs: dict[int, FragmentConfig], violations: list[str]) -> None:
    floorplan = region.floorplan
    right_to_left, bottom_up = floorplan.flips
    corner_cell = (
        floorplan.grid_cols - 1 if right_to_left else 0,
        floorplan.grid_rows - 1 if bottom_up else 0,
    )
    entry = region.node(region.entry_node)
    if corner_cell not in entry.cells():
        violations.append(
            f"node {entry.node_id}: entry node at ({entry.col}, {entry.row}) does not cover "
            f"the {floorplan.entry_corner.value} corner cell {corner_cell}"
        )
    for node, config in sorted(configs.items()):
        if node == region.entry_node and config.input_select is not InputSelect.NONE:
            violations.append(f"node {node}: entry node must take the region clock, not {config.input_select.value}")
        if node != region.entry_node and config.input_select is InputSelect.NONE:
            violations.append(f"node {node}: no clock input selected")


def _check_ports(
    region: RegionModel, configs: dict[int, FragmentConfig], violations: list[str]
) -> set[tuple[int, int, Exit]]:
    east, south = _neighbours(region)
    west = {right: left for left, right in east.items()}
    north = {below: above for above, below in south.items()}
    implied: set[tuple[int, int, Exit]] = set()

    for node, config in sorted(configs.items()):
        if config.input_select is InputSelect.H_IN:
            source, exit_point, side = west.get(node), Exit.H_OUT, "west"
        elif config.input_select is InputSelect.V_IN:
            source, exit_point, side = north.get(node), Exit.V_OUT, "north"
        else:
            continue
        if source is None or source not in configs:
            violations.append(f"node {node}: undriven input {config.input_select.value} (no {side} neighbour)")
        elif not configs[source].enabled(exit_point):
            violations.append(
                f"node {node}: undriven input {config.input_select.value} "
                f"(node {source} gates its {exit_point.value} to 0)"
            )
        else:
            implied.add((source, node, exit_point))

    for node, config in sorted(configs.items()):
        for exit_point, neighbour, wanted in (
            (Exit.H_OUT, east.get(node), InputSelect.H_IN),
            (Exit.V_OUT, south.get(node), InputSelect.V_IN),
        ):
            if not config.enabled(exit_point):
                continue
            if neighbour is None or neighbour not in configs:
                violations.append(f"node {node}: dangling enabled exit {exit_point.value} (no neighbour)")
            elif configs[neighbour].input_select is not wanted:
                violations.append(
                    f"node {node}: dangling enabled exit {exit_point.value} "
                    f"(node {neighbour} selects {configs[neighbour].input_select.value})"
                )
    return implied


def verify_topology(topology: RctTopology, region: RegionModel) -> StructuralReport:
    violations: list[str] = []
    configs = _check_configs(topology, region, violations)
    _check_tree(topology, region, violations)
    _check_entry(region, configs, violations)
    implied = _check_ports(region, configs, violations)

    listed = {(edge.parent, edge.child, edge.exit) for edge in topology.edges}
    for parent, child, exit_point in sorted(listed - implied):
        violations.append(f"edge {parent}->{child}: not implied by the fragment configurations ({exit_point.value})")
    for parent, child, exit_point in sorted(implied - listed):
        violations.append(f"edge {parent}->{child}: configured {exit_point.value} link missing from the tree")
    for edge in topology.edges:
        config = configs.get(edge.child)
        if config is not None and chord_variant(config) != edge.variant:
            expected = chord_variant(config)
            violations.append(
                f"edge {edge.parent}->{edge.child}: variant {edge.variant.value} does not match "
                f"the child's pairing ({expected.value if expected else 'no input'})"
            )

    report = StructuralReport(
        node_count=region.n,
        edge_count=len(topology.edges),
        branch_lengths=tuple(len(chain) for chain in branches(topology)) if not violations else (),
        violations=tuple(violations),
    )
    if violations:
        logger.warning("Topology has %d structural violation(s)", len(violations))
    return report
