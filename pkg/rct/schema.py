"""Document schemas for block libraries and floorplans.

Both documents are JSON. Numbers are parsed as ``Decimal`` so nanosecond and
picosecond values convert to femtoseconds without binary rounding.
"""

from __future__ import annotations

import json
from decimal import Decimal
from enum import StrEnum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError

from .errors import SchemaError


class ChordVariant(StrEnum):
    H_TO_H = "H_to_H"
    H_TO_V = "H_to_V"
    V_TO_H = "V_to_H"
    V_TO_V = "V_to_V"


class RowClass(StrEnum):
    EDGE = "edge"
    MIDDLE = "middle"


class EntryCorner(StrEnum):
    TOP_LEFT = "top_left"
    TOP_RIGHT = "top_right"
    BOTTOM_LEFT = "bottom_left"
    BOTTOM_RIGHT = "bottom_right"


class Orientation(StrEnum):
    TOP_DOWN_LEFT_RIGHT = "top_down_left_right"
    TOP_DOWN_RIGHT_LEFT = "top_down_right_left"
    BOTTOM_UP_LEFT_RIGHT = "bottom_up_left_right"
    BOTTOM_UP_RIGHT_LEFT = "bottom_up_right_left"


ORIENTATION_FOR_CORNER = {
    EntryCorner.TOP_LEFT: Orientation.TOP_DOWN_LEFT_RIGHT,
    EntryCorner.TOP_RIGHT: Orientation.TOP_DOWN_RIGHT_LEFT,
    EntryCorner.BOTTOM_LEFT: Orientation.BOTTOM_UP_LEFT_RIGHT,
    EntryCorner.BOTTOM_RIGHT: Orientation.BOTTOM_UP_RIGHT_LEFT,
}


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class BlockTypeDocument(_Document):
    id: str = Field(min_length=1)
    width: PositiveInt = 1
    height: PositiveInt = 1
    chords: dict[str, dict[str, dict[str, Decimal]]]
    taps: dict[str, list[Decimal]]
    fragment_cap_ff: Decimal = Field(ge=0)
    lct_cap_ff: Decimal = Field(ge=0)
    slew_ps: dict[str, Decimal]
    max_slew_ps: Decimal = Field(gt=0)


class LibraryDocument(_Document):
    schema_: str | None = Field(default=None, alias="schema")
    corners: list[str] = Field(min_length=1)
    types: list[BlockTypeDocument] = Field(min_length=1)


class WindowDocument(_Document):
    cols: PositiveInt
    rows: PositiveInt
    stride_cols: PositiveInt = 1
    stride_rows: PositiveInt = 1


class FloorplanDocument(_Document):
    schema_: str | None = Field(default=None, alias="schema")
    cols: PositiveInt
    rows: PositiveInt
    placements: list[tuple[str, int, int]] = Field(min_length=1)
    entry_corner: str = EntryCorner.TOP_LEFT.value
    orientation: str | None = None
    corner_of_record: str
    window: WindowDocument | None = None


class AssignmentDocument(BaseModel):
    # Accepts the optimizer's assignment.json, which carries run details too.
    model_config = ConfigDict(extra="ignore", frozen=True)

    schema_: str | None = Field(default=None, alias="schema")
    assignment: list[int] = Field(min_length=1)


def _format_location(loc: tuple[Any, ...]) -> str:
    parts: list[str] = []
    for item in loc:
        if isinstance(item, int):
            parts.append(f"[{item}]")
        else:
            parts.append(f".{item}" if parts else str(item))
    return "".join(parts) or "<root>"


def read_json(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"Could not read {path}: {exc.strerror or exc}") from exc
    return parse_json(text, source=str(path))


def parse_json(text: str, source: str = "<document>") -> Any:
    try:
        return json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{source} is not valid JSON: {exc}") from exc


def validate_document[M: BaseModel](model: type[M], data: Any, source: str) -> M:
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        items = [
            f"{_format_location(tuple(error['loc']))}: {error['msg']}"
            for error in exc.errors()
        ]
        raise SchemaError(f"{source} does not match the {model.__name__} schema", items) from exc
