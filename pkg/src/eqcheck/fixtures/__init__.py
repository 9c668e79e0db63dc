"""Bundled .mfd fixture charts."""

from __future__ import annotations

import os

_DIR = os.path.dirname(__file__)


def fixture_names() -> list[str]:
    """Alphabetical stems of the bundled .mfd files."""
    return sorted(
        os.path.splitext(f)[0] for f in os.listdir(_DIR) if f.endswith(".mfd")
    )


def fixture_path(name: str) -> str:
    """Absolute path of a bundled fixture; accepts 'sphere2' or 'sphere2.mfd'."""
    stem = name[:-4] if name.endswith(".mfd") else name
    path = os.path.join(_DIR, stem + ".mfd")
    if not os.path.isfile(path):
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return path
