"""Report documents: stable JSON, plain-text tables and run sidecars."""

from __future__ import annotations

import json
import logging
import sys
from collections.abc import Mapping, Sequence
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import pandas as pd

from . import SCHEMA_ID, __version__
from .paths import sidecar_path

logger = logging.getLogger(__name__)


def document(kind: str, body: Mapping[str, Any]) -> dict[str, Any]:
    return {"schema": SCHEMA_ID, "kind": kind, **body}


def dump_json(doc: Mapping[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_text(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info("Wrote %s", path)


def write_sidecar(output: Path, argv: Sequence[str], started: datetime, elapsed: float) -> Path:
    meta = {
        "argv": list(argv),
        "elapsed_s": round(elapsed, 6),
        "started_utc": started.astimezone(timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
    }
    path = sidecar_path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_json(meta), encoding="utf-8")
    return path


def node_table(rows: Sequence[Mapping[str, Any]], columns: Sequence[str]) -> str:
    if not rows:
        return "(no nodes)"
    frame = pd.DataFrame(list(rows), columns=list(columns))
    return frame.to_string(index=False)


def bullet_lines(title: str, items: Sequence[str]) -> list[str]:
    return [title, *(f"- {item}" for item in items)]
