from __future__ import annotations

import pytest

from rct.analyse import Workspace, load_workspace
from rct.paths import floorplan_path, library_path
from rct.settings import Settings

FIXTURES = {
    "chain": ("chain", "chain_3x1"),
    "mesh": ("mesh_m8", "mesh_3x2"),
    "drra": ("drra", "drra_8x3"),
    "scale": ("drra", "scale_25x3"),
}


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    for key in ("RCT_LOG_LEVEL", "RCT_DP_MAX_FRONTIER", "RCT_BNB_NODE_LIMIT", "RCT_FALLBACK_STRATEGY", "RCT_ORACLE_CHUNK"):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)


def _workspace(name: str) -> Workspace:
    library, floorplan = FIXTURES[name]
    return load_workspace(library_path(library), floorplan_path(floorplan), Settings())


@pytest.fixture
def chain() -> Workspace:
    return _workspace("chain")


@pytest.fixture
def mesh() -> Workspace:
    return _workspace("mesh")


@pytest.fixture
def drra() -> Workspace:
    return _workspace("drra")


@pytest.fixture
def scale() -> Workspace:
    return _workspace("scale")
