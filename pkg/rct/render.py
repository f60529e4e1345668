"""DOT and SVG views of a routed region."""

from __future__ import annotations

import logging
from pathlib import Path

import altair as alt
import graphviz
import pandas as pd

from .delay import ArrivalProfile, TapAssignment
from .region import RegionModel
from .router import InputSelect, RctTopology, branches
from .units import fs_to_ps, render_ps

logger = logging.getLogger(__name__)

KIND_COLOURS = {"spine": "#C62828", "branch": "#1565C0"}


def to_dot(region: RegionModel, topology: RctTopology, corner: str | None = None) -> str:
    corner = corner or region.floorplan.corner_of_record
    dot = graphviz.Digraph(
        name="rct",
        graph_attr={"rankdir": "TB", "label": f"RCT {region.floorplan.grid_cols}x{region.floorplan.grid_rows} ({corner})"},
        node_attr={"shape": "box", "fontname": "Helvetica", "fontsize": "10"},
        edge_attr={"fontname": "Helvetica", "fontsize": "8"},
    )
    for node in region.nodes:
        dot.node(f"n{node.node_id}", label=f"{node.node_id}\\n({node.col}, {node.row})")
    for edge in topology.edges:
        child = region.node(edge.child)
        delay = region.block_type(edge.child).chord(edge.variant, child.row_class, corner)
        dot.edge(f"n{edge.parent}", f"n{edge.child}", label=f"{edge.variant.value} {render_ps(delay)}")
    return dot.source


def diagram_frames(
    region: RegionModel,
    topology: RctTopology,
    assignment: TapAssignment | None = None,
    arrivals: ArrivalProfile | None = None,
) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Node annotations and polyline vertices in grid units (y grows downwards)."""
    centres = {
        node.node_id: (node.col + node.width / 2, node.row + node.height / 2) for node in region.nodes
    }
    rows = []
    for node in region.nodes:
        tap = assignment.indices[node.node_id - 1] if assignment is not None else None
        arrival = fs_to_ps(arrivals.at(node.node_id)) if arrivals is not None else None
        label = f"{node.node_id}"
        if tap is not None:
            label += f" t{tap}"
        if arrival is not None:
            label += f" {arrival} ps"
        rows.append(
            {
                "node": node.node_id,
                "x": centres[node.node_id][0],
                "y": centres[node.node_id][1],
                "tap": tap,
                "arrival_ps": float(arrival) if arrival is not None else None,
                "entry": topology.config(node.node_id).input_select is InputSelect.NONE,
                "label": label,
            }
        )
    nodes = pd.DataFrame(rows)

    vertices = []
    chains = branches(topology)
    spine = [chain[0] for chain in chains]
    if len(spine) > 1:
        for order, node in enumerate(spine):
            vertices.append({"line": "spine", "kind": "spine", "order": order, "node": node})
    for b, chain in enumerate(chains, start=1):
        if len(chain) < 2:
            continue
        for order, node in enumerate(chain):
            vertices.append({"line": f"branch {b}", "kind": "branch", "order": order, "node": node})
    lines = pd.DataFrame(vertices, columns=["line", "kind", "order", "node"])
    lines["x"] = [centres[node][0] for node in lines["node"]]
    lines["y"] = [centres[node][1] for node in lines["node"]]
    return nodes, lines


def build_chart(
    region: RegionModel,
    topology: RctTopology,
    assignment: TapAssignment | None = None,
    arrivals: ArrivalProfile | None = None,
) -> alt.LayerChart:
    nodes, lines = diagram_frames(region, topology, assignment, arrivals)
    floorplan = region.floorplan
    x_scale = alt.Scale(domain=[0, floorplan.grid_cols], nice=False)
    y_scale = alt.Scale(domain=[0, floorplan.grid_rows], reverse=True, nice=False)
    colour = alt.Color(
        "kind:N",
        scale=alt.Scale(domain=list(KIND_COLOURS), range=list(KIND_COLOURS.values())),
        title="Chord",
    )

    polylines = (
        alt.Chart(lines)
        .mark_line(strokeWidth=2)
        .encode(
            x=alt.X("x:Q", scale=x_scale, axis=None),
            y=alt.Y("y:Q", scale=y_scale, axis=None),
            detail="line:N",
            order="order:Q",
            color=colour,
        )
    )
    points = (
        alt.Chart(nodes)
        .mark_square(size=120, color="#424242")
        .encode(
            x=alt.X("x:Q", scale=x_scale),
            y=alt.Y("y:Q", scale=y_scale),
            tooltip=["node:Q", "tap:Q", alt.Tooltip("arrival_ps:Q", format=".3f", title="T_LCT (ps)")],
        )
    )
    labels = (
        alt.Chart(nodes)
        .mark_text(dy=-14, fontSize=9)
        .encode(x=alt.X("x:Q", scale=x_scale), y=alt.Y("y:Q", scale=y_scale), text="label:N")
    )
    return alt.layer(polylines, points, labels).properties(
        width=max(200, 70 * floorplan.grid_cols),
        height=max(120, 70 * floorplan.grid_rows),
        title=f"Regional clock tree, {region.n} node(s)",
    )


def save_svg(chart: alt.LayerChart, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    chart.save(str(path), format="svg")
    logger.info("Wrote SVG diagram to %s", path)


def render_svg(chart: alt.LayerChart) -> str:
    import vl_convert as vlc

    return vlc.vegalite_to_svg(chart.to_dict())
