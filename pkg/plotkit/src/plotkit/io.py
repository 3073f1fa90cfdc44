"""Readers for the simulation pipeline's delimited tables and JSON summaries."""

from __future__ import annotations

import csv
import json
import re
from glob import glob
from pathlib import Path

import numpy as np

from .spec import PanelSpecError

_TOKEN_RE = re.compile(r"^([A-Za-z]\w*?)-(-?\d.*)$")


def expand_inputs(patterns: list[str], base_dir) -> list[Path]:
    """Resolve glob patterns (relative to the spec file) to a sorted file list."""
    base = Path(base_dir)
    seen: dict[Path, None] = {}
    for pattern in patterns:
        root = pattern if Path(pattern).is_absolute() else str(base / pattern)
        for match in sorted(glob(root)):
            p = Path(match)
            if p.is_file():
                seen.setdefault(p)
    if not seen:
        raise PanelSpecError(f"no input files matched {patterns!r} (relative to {base})")
    return list(seen)


def param_tokens(stem: str) -> dict[str, str]:
    """Parameter values embedded in a file name, e.g. demo_h0-2_theta-1.5."""
    tokens = {}
    for tok in stem.split("_"):
        m = _TOKEN_RE.match(tok)
        if m:
            tokens[m.group(1)] = m.group(2)
    return tokens


def series_label(path: Path, legend_from: str | None) -> str:
    tokens = param_tokens(path.stem)
    if legend_from and legend_from in tokens:
        return f"{legend_from}={tokens[legend_from]}"
    return path.stem


def _header(path: Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
    return first.split(",")


def read_series_csv(path) -> dict[str, np.ndarray]:
    """Per-point time series: t, imbalance, entropy_cut<k>, sz_1..sz_L.

    The entropy column keeps its cut-specific header name and is also
    aliased to plain "entropy".
    """
    path = Path(path)
    header = _header(path)
    if header[:2] != ["t", "imbalance"] or len(header) < 3 or not header[2].startswith("entropy_cut"):
        raise PanelSpecError(f"{path}: not a time-series table (header starts {header[:3]})")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(header):
        raise PanelSpecError(f"{path}: {data.shape[1]} columns but {len(header)} header fields")
    cols = {name: data[:, i] for i, name in enumerate(header)}
    cols["entropy"] = cols[header[2]]
    return cols


def read_dos_csv(path):
    path = Path(path)
    if _header(path) != ["energy", "dos"]:
        raise PanelSpecError(f"{path}: not a density-of-states table")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def read_scaling_csv(path) -> list[tuple[str, int, int, float]]:
    """Scaling table rows: (set label, length, sector dimension, entropy)."""
    path = Path(path)
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["set", "L", "hilbert_dim", "s2"]:
            raise PanelSpecError(f"{path}: not a scaling table (header {header})")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise PanelSpecError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            try:
                rows.append((row[0], int(row[1]), int(row[2]), float(row[3])))
            except ValueError as exc:
                raise PanelSpecError(f"{path}:{lineno}: {exc}") from exc
    return rows


def read_summary(path) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PanelSpecError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("records"), list):
        raise PanelSpecError(f"{path}: not a run summary (no records list)")
    return doc
