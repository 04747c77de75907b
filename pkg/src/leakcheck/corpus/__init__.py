"""Shipped IR programs: standard declarations, motivating examples and scenarios."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path


def corpus_dir() -> Path:
    return Path(str(resources.files(__name__)))


def corpus_files(subdir: str = "") -> list[Path]:
    return sorted((corpus_dir() / subdir).rglob("*.mir.json"))


def expectations() -> dict:
    return json.loads((corpus_dir() / "expected.json").read_text(encoding="utf-8"))
