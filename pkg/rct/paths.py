from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"
LIBRARY_DIR = DATA_DIR / "library"
FLOORPLAN_DIR = DATA_DIR / "floorplans"


def library_path(name: str) -> Path:
    return LIBRARY_DIR / f"{name}.json"


def floorplan_path(name: str) -> Path:
    return FLOORPLAN_DIR / f"{name}.json"


def sidecar_path(output: Path) -> Path:
    if output.is_dir():
        return output / "run.meta.json"
    return output.with_name(f"{output.name}.meta.json")
