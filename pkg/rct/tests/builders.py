"""Document and profile factories shared by the test modules."""

from __future__ import annotations

import random
from collections.abc import Mapping, Sequence
from decimal import Decimal
from typing import Any

from rct.delay import DelayProfile
from rct.region import RegionModel, TapLine, build_region, load_block_library, load_floorplan
from rct.router import RctTopology, route_rct
from rct.schema import ChordVariant, RowClass


def ns(ps: int) -> Decimal:
    """Exact ns Decimal from whole picoseconds."""
    return Decimal(ps).scaleb(-3)


def chord_table(
    values: Mapping[str, Any] | Any, corners: Sequence[str] = ("BC",)
) -> dict[str, dict[str, dict[str, Any]]]:
    """Chord section from one value, or from {variant: value}, or {variant: {row_class: value}}."""
    table: dict[str, dict[str, dict[str, Any]]] = {}
    for variant in ChordVariant:
        entry = values.get(variant.value) if isinstance(values, Mapping) else values
        table[variant.value] = {}
        for row_class in RowClass:
            value = entry.get(row_class.value) if isinstance(entry, Mapping) else entry
            table[variant.value][row_class.value] = {corner: value for corner in corners}
    return table


def library_doc(
    chords: Mapping[str, Any] | Any = Decimal("0.5"),
    taps: Sequence[Any] = (Decimal("1.0"), Decimal("1.2"), Decimal("1.4"), Decimal("1.6"), Decimal("1.8"), Decimal("2.0")),
    corners: Sequence[str] = ("BC",),
    type_id: str = "unit",
    width: int = 1,
    height: int = 1,
    fragment_cap_ff: Any = 10,
    lct_cap_ff: Any = 300,
    slew_ps: Any = 60,
    max_slew_ps: Any = 100,
) -> dict[str, Any]:
    return {
        "corners": list(corners),
        "types": [
            {
                "id": type_id,
                "width": width,
                "height": height,
                "chords": chord_table(chords, corners),
                "taps": {corner: list(taps) for corner in corners},
                "fragment_cap_ff": fragment_cap_ff,
                "lct_cap_ff": lct_cap_ff,
                "slew_ps": {corner: slew_ps for corner in corners},
                "max_slew_ps": max_slew_ps,
            }
        ],
    }


def floorplan_doc(
    cols: int,
    rows: int,
    type_id: str = "unit",
    entry_corner: str = "top_left",
    corner: str = "BC",
    window: Mapping[str, int] | None = None,
    placements: Sequence[Sequence[Any]] | None = None,
) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "cols": cols,
        "rows": rows,
        "placements": (
            [list(p) for p in placements]
            if placements is not None
            else [[type_id, c, r] for r in range(rows) for c in range(cols)]
        ),
        "entry_corner": entry_corner,
        "corner_of_record": corner,
    }
    if window is not None:
        doc["window"] = dict(window)
    return doc


def build(library: Mapping[str, Any], floorplan: Mapping[str, Any]) -> tuple[RegionModel, RctTopology]:
    lib = load_block_library(library)
    region = build_region(load_floorplan(floorplan, lib), lib)
    return region, route_rct(region)


def tap_line(values_fs: Sequence[int], corner: str = "BC") -> TapLine:
    return TapLine({corner: tuple(values_fs)})


def profile(natural_fs: Sequence[int], corner: str = "BC") -> DelayProfile:
    return DelayProfile(corner=corner, natural=tuple(natural_fs))


def random_taps(rng: random.Random, m: int) -> list[int]:
    """Strictly increasing tap delays in whole picoseconds, as fs."""
    start = rng.randint(100, 2_000)
    steps = [rng.randint(20, 600) for _ in range(m - 1)]
    values = [start]
    for step in steps:
        values.append(values[-1] + step)
    return [ps * 1_000 for ps in values]


def random_region(rng: random.Random, max_nodes: int = 6, max_taps: int = 8) -> tuple[RegionModel, RctTopology]:
    """Small routed region with random positive chords and a random monotone delay line."""
    while True:
        cols, rows = rng.randint(1, max_nodes), rng.randint(1, 3)
        if 2 <= cols * rows <= max_nodes:
            break
    chords = {
        variant.value: {row_class.value: ns(rng.randint(100, 1_500)) for row_class in RowClass}
        for variant in ChordVariant
    }
    taps = [ns(fs // 1_000) for fs in random_taps(rng, rng.randint(1, max_taps))]
    entry = rng.choice(["top_left", "top_right", "bottom_left", "bottom_right"])
    return build(library_doc(chords=chords, taps=taps), floorplan_doc(cols, rows, entry_corner=entry))
