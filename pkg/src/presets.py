# src/presets.py
import os
from typing import List

from .config import SCENARIO_DIR


def _path(name: str) -> str:
    return os.path.join(SCENARIO_DIR, name if name.endswith(".json") else f"{name}.json")


def load_scenario_text(name: str) -> str:
    path = _path(name)
    if not os.path.exists(path):
        raise FileNotFoundError(f"No bundled scenario {name!r} in {SCENARIO_DIR}. Known: {list_scenarios()}")
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def read_config_text(ref: str) -> str:
    """A file path, or the name of a bundled scenario."""
    if os.path.exists(ref):
        with open(ref, "r", encoding="utf-8") as f:
            return f.read()
    return load_scenario_text(ref)


def list_scenarios() -> List[str]:
    if not os.path.isdir(SCENARIO_DIR):
        return []
    return sorted(f[:-5] for f in os.listdir(SCENARIO_DIR) if f.endswith(".json"))
