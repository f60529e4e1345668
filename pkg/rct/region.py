"""Block library, floorplan and the immutable region model.

A region instance is a set of SiLago blocks abutted on the synchoros grid.
Blocks are placed by their top-left grid cell and occupy whole cells.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from decimal import Decimal
from itertools import groupby
from pathlib import Path
from typing import Any

from .errors import CharacterizationError, FloorplanError, LibraryError, UnsupportedFloorplanError
from .schema import (
    ORIENTATION_FOR_CORNER,
    BlockTypeDocument,
    ChordVariant,
    EntryCorner,
    FloorplanDocument,
    LibraryDocument,
    Orientation,
    RowClass,
    parse_json,
    read_json,
    validate_document,
)
from .units import ns_number, ns_to_fs, ps_number, ps_to_fs

logger = logging.getLogger(__name__)

ChordKey = tuple[ChordVariant, RowClass, str]


@dataclass(frozen=True)
class TapLine:
    delays: Mapping[str, tuple[int, ...]]

    @property
    def m(self) -> int:
        return len(next(iter(self.delays.values())))

    def for_corner(self, corner: str) -> tuple[int, ...]:
        try:
            return self.delays[corner]
        except KeyError:
            raise LibraryError(f"Tap line has no characterisation for corner {corner!r}") from None

    def span(self, corner: str) -> int:
        taps = self.for_corner(corner)
        return taps[-1] - taps[0]

    def shifted(self, delta_fs: int) -> TapLine:
        return TapLine({corner: tuple(t + delta_fs for t in taps) for corner, taps in self.delays.items()})


@dataclass(frozen=True)
class BlockType:
    type_id: str
    width: int
    height: int
    chord_delays: Mapping[ChordKey, int]
    tap_line: TapLine
    fragment_capacitance: Decimal
    lct_capacitance: Decimal
    slew_at_lct_entry: Mapping[str, int]
    max_slew_rule: int

    def chord(self, variant: ChordVariant, row_class: RowClass, corner: str) -> int:
        try:
            return self.chord_delays[(variant, row_class, corner)]
        except KeyError:
            raise CharacterizationError(
                f"Block type {self.type_id!r} has no {variant.value} chord delay "
                f"for {row_class.value} rows at corner {corner!r}"
            ) from None


@dataclass(frozen=True)
class BlockLibrary:
    corners: tuple[str, ...]
    types: Mapping[str, BlockType]

    def __getitem__(self, type_id: str) -> BlockType:
        return self.types[type_id]


@dataclass(frozen=True)
class Placement:
    type_id: str
    col: int
    row: int


@dataclass(frozen=True)
class WindowSpec:
    cols: int
    rows: int
    stride_cols: int = 1
    stride_rows: int = 1


@dataclass(frozen=True)
class Floorplan:
    grid_cols: int
    grid_rows: int
    placements: tuple[Placement, ...]
    entry_corner: EntryCorner
    orientation: Orientation
    corner_of_record: str
    window: WindowSpec | None = None

    @property
    def flips(self) -> tuple[bool, bool]:
        """(right-to-left, bottom-up) relative to the top-left frame."""
        return (
            self.entry_corner in (EntryCorner.TOP_RIGHT, EntryCorner.BOTTOM_RIGHT),
            self.entry_corner in (EntryCorner.BOTTOM_LEFT, EntryCorner.BOTTOM_RIGHT),
        )


@dataclass(frozen=True)
class RegionNode:
    node_id: int
    type_id: str
    col: int
    row: int
    width: int
    height: int
    row_class: RowClass
    # Branch = block row in propagation order (0 holds the entry); rank = position
    # along the branch, 0 being the spine block.
    branch: int
    rank: int
    frame_col: int
    frame_row: int

    @property
    def order_key(self) -> tuple[int, int]:
        return (self.branch, self.rank)

    @property
    def sweep_key(self) -> tuple[int, int]:
        return (self.frame_col, self.frame_row)

    def cells(self) -> set[tuple[int, int]]:
        return {
            (c, r)
            for c in range(self.col, self.col + self.width)
            for r in range(self.row, self.row + self.height)
        }


@dataclass(frozen=True)
class RegionModel:
    floorplan: Floorplan
    library: BlockLibrary
    nodes: tuple[RegionNode, ...]
    _by_id: Mapping[int, RegionNode] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_by_id", {node.node_id: node for node in self.nodes})

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def entry_node(self) -> int:
        return 1

    @property
    def furthest_node(self) -> int:
        return self.n

    @property
    def corners(self) -> tuple[str, ...]:
        return self.library.corners

    def node(self, node_id: int) -> RegionNode:
        return self._by_id[node_id]

    def block_type(self, node_id: int) -> BlockType:
        return self.library[self._by_id[node_id].type_id]

    @property
    def tap_line(self) -> TapLine:
        return self.block_type(1).tap_line

    def sweep_order(self) -> list[int]:
        """Node ids column by column in the propagation frame."""
        return [node.node_id for node in sorted(self.nodes, key=lambda n: n.sweep_key)]

    def branches(self) -> list[list[int]]:
        ordered = sorted(self.nodes, key=lambda n: n.order_key)
        return [
            [node.node_id for node in group]
            for _, group in groupby(ordered, key=lambda n: n.branch)
        ]


def _exact(value: Decimal, convert, path: str, errors: list[str]) -> int | None:
    try:
        fs = convert(value)
    except ValueError as exc:
        errors.append(f"{path}: {exc}")
        return None
    if fs <= 0:
        errors.append(f"{path}: delay must be strictly positive, got {value}")
        return None
    return fs


def _check_block_type(
    doc: BlockTypeDocument, index: int, corners: tuple[str, ...], errors: list[str]
) -> BlockType | None:
    base = f"types[{index}]"
    error_count = len(errors)
    known_variants = {variant.value for variant in ChordVariant}
    known_rows = {row_class.value for row_class in RowClass}

    for name in sorted(set(doc.chords) - known_variants):
        errors.append(f"{base}.chords.{name}: unknown chord variant")

    chord_delays: dict[ChordKey, int] = {}
    for variant in ChordVariant:
        by_row = doc.chords.get(variant.value)
        if by_row is None:
            errors.append(f"{base}.chords.{variant.value}: missing chord variant")
            continue
        for name in sorted(set(by_row) - known_rows):
            errors.append(f"{base}.chords.{variant.value}.{name}: unknown row class")
        for row_class in RowClass:
            by_corner = by_row.get(row_class.value)
            path = f"{base}.chords.{variant.value}.{row_class.value}"
            if by_corner is None:
                errors.append(f"{path}: missing row class")
                continue
            for name in sorted(set(by_corner) - set(corners)):
                errors.append(f"{path}.{name}: undeclared corner")
            for corner in corners:
                if corner not in by_corner:
                    errors.append(f"{path}.{corner}: missing corner")
                    continue
                fs = _exact(by_corner[corner], ns_to_fs, f"{path}.{corner}", errors)
                if fs is not None:
                    chord_delays[(variant, row_class, corner)] = fs

    taps: dict[str, tuple[int, ...]] = {}
    for name in sorted(set(doc.taps) - set(corners)):
        errors.append(f"{base}.taps.{name}: undeclared corner")
    for corner in corners:
        path = f"{base}.taps.{corner}"
        values = doc.taps.get(corner)
        if values is None:
            errors.append(f"{path}: missing corner")
            continue
        if not values:
            errors.append(f"{path}: tap line needs at least one tap")
            continue
        converted = [_exact(value, ns_to_fs, f"{path}[{i}]", errors) for i, value in enumerate(values)]
        if any(value is None for value in converted):
            continue
        line = tuple(value for value in converted if value is not None)
        for i in range(1, len(line)):
            if line[i] <= line[i - 1]:
                errors.append(
                    f"{path}[{i}]: non-monotone tap line "
                    f"(tap {i + 1} = {values[i]} ns is not above tap {i} = {values[i - 1]} ns)"
                )
                break
        else:
            taps[corner] = line
    if len({len(line) for line in taps.values()}) > 1:
        errors.append(f"{base}.taps: every corner must have the same number of taps")

    slew: dict[str, int] = {}
    for corner in corners:
        path = f"{base}.slew_ps.{corner}"
        if corner not in doc.slew_ps:
            errors.append(f"{path}: missing corner")
            continue
        fs = _exact(doc.slew_ps[corner], ps_to_fs, path, errors)
        if fs is not None:
            slew[corner] = fs
    for name in sorted(set(doc.slew_ps) - set(corners)):
        errors.append(f"{base}.slew_ps.{name}: undeclared corner")
    max_slew = _exact(doc.max_slew_ps, ps_to_fs, f"{base}.max_slew_ps", errors)

    if len(errors) > error_count or max_slew is None:
        return None
    return BlockType(
        type_id=doc.id,
        width=doc.width,
        height=doc.height,
        chord_delays=chord_delays,
        tap_line=TapLine(taps),
        fragment_capacitance=doc.fragment_cap_ff,
        lct_capacitance=doc.lct_cap_ff,
        slew_at_lct_entry=slew,
        max_slew_rule=max_slew,
    )


def load_block_library(document: str | Mapping[str, Any], source: str = "library") -> BlockLibrary:
    data = parse_json(document, source) if isinstance(document, str) else document
    doc = validate_document(LibraryDocument, data, source)

    errors: list[str] = []
    corners = tuple(doc.corners)
    if len(set(corners)) != len(corners):
        errors.append("corners: duplicate corner names")

    types: dict[str, BlockType] = {}
    for index, type_doc in enumerate(doc.types):
        if type_doc.id in types:
            errors.append(f"types[{index}].id: duplicate block type {type_doc.id!r}")
            continue
        block_type = _check_block_type(type_doc, index, corners, errors)
        if block_type is not None:
            types[type_doc.id] = block_type

    if errors:
        raise LibraryError(f"{source} violates the block library rules", errors)
    logger.debug("Loaded %d block type(s) over corners %s", len(types), ", ".join(corners))
    return BlockLibrary(corners=corners, types=types)


def read_block_library(path: Path) -> BlockLibrary:
    return load_block_library(read_json(path), source=str(path))


def dump_block_library(library: BlockLibrary) -> dict[str, Any]:
    types = []
    for block_type in library.types.values():
        chords: dict[str, dict[str, dict[str, float | int]]] = {}
        for (variant, row_class, corner), fs in block_type.chord_delays.items():
            chords.setdefault(variant.value, {}).setdefault(row_class.value, {})[corner] = ns_number(fs)
        types.append(
            {
                "id": block_type.type_id,
                "width": block_type.width,
                "height": block_type.height,
                "chords": chords,
                "taps": {
                    corner: [ns_number(fs) for fs in line]
                    for corner, line in block_type.tap_line.delays.items()
                },
                "fragment_cap_ff": float(block_type.fragment_capacitance),
                "lct_cap_ff": float(block_type.lct_capacitance),
                "slew_ps": {
                    corner: ps_number(fs) for corner, fs in block_type.slew_at_lct_entry.items()
                },
                "max_slew_ps": ps_number(block_type.max_slew_rule),
            }
        )
    return {"corners": list(library.corners), "types": types}


def _format_cells(cells: list[tuple[int, int]], limit: int = 12) -> str:
    shown = ", ".join(f"({c}, {r})" for c, r in cells[:limit])
    if len(cells) > limit:
        shown += f", ... ({len(cells) - limit} more)"
    return shown


def load_floorplan(
    document: str | Mapping[str, Any], library: BlockLibrary, source: str = "floorplan"
) -> Floorplan:
    data = parse_json(document, source) if isinstance(document, str) else document
    doc = validate_document(FloorplanDocument, data, source)
    errors: list[str] = []

    try:
        entry_corner = EntryCorner(doc.entry_corner)
    except ValueError:
        errors.append(
            f"entry_corner: {doc.entry_corner!r} is not a grid corner "
            f"(expected one of {', '.join(c.value for c in EntryCorner)})"
        )
        entry_corner = None

    orientation = None
    if entry_corner is not None:
        orientation = ORIENTATION_FOR_CORNER[entry_corner]
        if doc.orientation is not None and doc.orientation != orientation.value:
            errors.append(
                f"orientation: {doc.orientation!r} does not propagate away from entry corner "
                f"{entry_corner.value!r} (expected {orientation.value!r})"
            )

    if doc.corner_of_record not in library.corners:
        errors.append(f"corner_of_record: {doc.corner_of_record!r} is not a library corner")

    owners: dict[tuple[int, int], int] = {}
    overlaps: list[str] = []
    placements: list[Placement] = []
    for index, (type_id, col, row) in enumerate(doc.placements):
        path = f"placements[{index}]"
        if type_id not in library.types:
            errors.append(f"{path}: unknown block type {type_id!r}")
            continue
        block_type = library[type_id]
        if col < 0 or row < 0 or col + block_type.width > doc.cols or row + block_type.height > doc.rows:
            errors.append(
                f"{path}: {type_id} at ({col}, {row}) is off-grid "
                f"({block_type.width}x{block_type.height} block on a {doc.cols}x{doc.rows} grid)"
            )
            continue
        placements.append(Placement(type_id, col, row))
        for c in range(col, col + block_type.width):
            for r in range(row, row + block_type.height):
                if (c, r) in owners:
                    overlaps.append(f"{path}: overlaps placements[{owners[(c, r)]}] at cell ({c}, {r})")
                else:
                    owners[(c, r)] = index
    errors.extend(overlaps)

    uncovered = sorted(
        ((c, r) for r in range(doc.rows) for c in range(doc.cols) if (c, r) not in owners),
        key=lambda cell: (cell[1], cell[0]),
    )
    if uncovered:
        errors.append(f"placements: uncovered cell(s) {_format_cells(uncovered)}")

    tap_lines = {tuple(sorted(library[p.type_id].tap_line.delays.items())) for p in placements}
    if len(tap_lines) > 1:
        errors.append("placements: all placed block types must share one delay line")

    if errors:
        raise FloorplanError(f"{source} violates the floorplan rules", errors)

    window = None
    if doc.window is not None:
        window = WindowSpec(
            cols=doc.window.cols,
            rows=doc.window.rows,
            stride_cols=doc.window.stride_cols,
            stride_rows=doc.window.stride_rows,
        )
    return Floorplan(
        grid_cols=doc.cols,
        grid_rows=doc.rows,
        placements=tuple(placements),
        entry_corner=entry_corner,
        orientation=orientation,
        corner_of_record=doc.corner_of_record,
        window=window,
    )


def read_floorplan(path: Path, library: BlockLibrary) -> Floorplan:
    return load_floorplan(read_json(path), library, source=str(path))


def dump_floorplan(floorplan: Floorplan) -> dict[str, Any]:
    document: dict[str, Any] = {
        "cols": floorplan.grid_cols,
        "rows": floorplan.grid_rows,
        "placements": [[p.type_id, p.col, p.row] for p in floorplan.placements],
        "entry_corner": floorplan.entry_corner.value,
        "orientation": floorplan.orientation.value,
        "corner_of_record": floorplan.corner_of_record,
    }
    if floorplan.window is not None:
        document["window"] = {
            "cols": floorplan.window.cols,
            "rows": floorplan.window.rows,
            "stride_cols": floorplan.window.stride_cols,
            "stride_rows": floorplan.window.stride_rows,
        }
    return document


def _row_class(row: int, height: int, grid_rows: int) -> RowClass:
    if row == 0 or row + height == grid_rows:
        return RowClass.EDGE
    return RowClass.MIDDLE


def _framed_nodes(floorplan: Floorplan, library: BlockLibrary) -> list[RegionNode]:
    right_to_left, bottom_up = floorplan.flips
    framed = []
    for placement in floorplan.placements:
        block_type = library[placement.type_id]
        frame_col = (
            floorplan.grid_cols - placement.col - block_type.width if right_to_left else placement.col
        )
        frame_row = (
            floorplan.grid_rows - placement.row - block_type.height if bottom_up else placement.row
        )
        framed.append((frame_row, frame_col, placement, block_type))
    framed.sort(key=lambda item: (item[0], item[1]))

    problems: list[str] = []
    nodes: list[RegionNode] = []
    expected_row = 0
    for branch, (frame_row, group) in enumerate(groupby(framed, key=lambda item: item[0])):
        members = list(group)
        heights = {block_type.height for _, _, _, block_type in members}
        width = sum(block_type.width for _, _, _, block_type in members)
        if frame_row != expected_row or len(heights) != 1 or width != floorplan.grid_cols:
            problems.append(
                f"block row starting at frame row {frame_row} is not a complete row of equal-height blocks"
            )
            expected_row = frame_row + max(heights)
            continue
        expected_row = frame_row + heights.pop()
        for rank, (_, frame_col, placement, block_type) in enumerate(members):
            nodes.append(
                RegionNode(
                    node_id=len(nodes) + 1,
                    type_id=placement.type_id,
                    col=placement.col,
                    row=placement.row,
                    width=block_type.width,
                    height=block_type.height,
                    row_class=_row_class(placement.row, block_type.height, floorplan.grid_rows),
                    branch=branch,
                    rank=rank,
                    frame_col=frame_col,
                    frame_row=frame_row,
                )
            )
    if problems:
        raise UnsupportedFloorplanError(
            "Spine-and-branch routing needs every grid row fully tiled by blocks of one height",
            problems,
        )
    return nodes


def _relabel(nodes: list[RegionNode], new_ids: Mapping[int, int]) -> tuple[RegionNode, ...]:
    relabelled = [
        replace(node, node_id=new_ids[node.node_id]) for node in nodes
    ]
    return tuple(sorted(relabelled, key=lambda n: n.node_id))


def build_region(floorplan: Floorplan, library: BlockLibrary) -> RegionModel:
    # Routing decides the natural-delay order, so ids are provisional until the
    # furthest node is known.
    from .delay import natural_delays
    from .router import route_rct

    nodes = _framed_nodes(floorplan, library)
    provisional = RegionModel(floorplan=floorplan, library=library, nodes=tuple(nodes))
    topology = route_rct(provisional)
    profile = natural_delays(provisional, topology, floorplan.corner_of_record)

    furthest = max(nodes, key=lambda node: (profile.at(node.node_id), node.order_key))
    others = [node for node in nodes if node is not furthest]
    new_ids = {node.node_id: index for index, node in enumerate(others, start=1)}
    new_ids[furthest.node_id] = len(nodes)

    region = RegionModel(floorplan=floorplan, library=library, nodes=_relabel(nodes, new_ids))
    logger.info(
        "Built region: %d node(s), furthest node at (%d, %d) with T_nat %d fs (%s)",
        region.n,
        furthest.col,
        furthest.row,
        profile.at(furthest.node_id),
        floorplan.corner_of_record,
    )
    return region
