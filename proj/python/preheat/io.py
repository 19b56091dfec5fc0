"""Readers for the files written by the `preheat` commands.

Every reader goes through the run manifest first, so a table is only
returned when its checksum still matches.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ._core import verify_manifest

# columns holding text; everything else parses as float
_TEXT = {"branch", "window"}
_INT = {"n", "r", "iy", "point"}


def read_manifest(directory: str | Path) -> dict:
    directory = Path(directory)
    problem = verify_manifest(directory)
    if problem:
        raise ValueError(f"{directory}: {problem}")
    return json.loads((directory / "manifest.json").read_text())


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Column name -> array. Text columns stay as object arrays."""
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    out = {}
    for j, name in enumerate(header):
        cells = [r[j] for r in body]
        if name in _TEXT:
            out[name] = np.array(cells, dtype=object)
        elif name in _INT:
            out[name] = np.array([int(c) for c in cells], dtype=np.int64)
        else:
            out[name] = np.array([float(c) for c in cells], dtype=np.float64)
    return out


def load_run(directory: str | Path) -> dict:
    """Manifest plus every CSV it lists, keyed by file stem."""
    directory = Path(directory)
    manifest = read_manifest(directory)
    tables = {}
    for entry in manifest["files"]:
        name = entry["name"]
        if name.endswith(".csv"):
            tables[Path(name).stem] = read_csv(directory / name)
    return {"manifest": manifest, "tables": tables}
