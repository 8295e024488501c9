"""Bundled fixtures: the end-to-end ramen-search run (scenario, provider
script, knowledge base, completion criteria)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def fixture_path(*parts: str) -> Path:
    """Absolute path of a bundled fixture file or directory."""
    root = resources.files(__package__)
    return Path(str(root.joinpath(*parts)))


RAMEN_DIR = "ramen"
