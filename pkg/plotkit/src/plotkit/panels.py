"""Figure rendering: one panel per call, written as both PNG and SVG.

Rendering is a pure function of the spec and the input files.  The SVG
backend is pinned to a fixed hash salt and text is kept as text (not paths)
so identical inputs produce identical bytes on every run.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import (
    expand_inputs,
    read_dos_csv,
    read_scaling_csv,
    read_series_csv,
    read_summary,
    series_label,
)
from .spec import PanelSpec, PanelSpecError

plt.rcParams["svg.hashsalt"] = "plotkit"
plt.rcParams["svg.fonttype"] = "none"

FIGSIZE = (6.4, 4.2)
DPI = 150


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _new_axes():
    fig, ax = plt.subplots(figsize=FIGSIZE, layout="constrained")
    ax.grid(True, alpha=0.3)
    return fig, ax


def _draw_timeseries(ax, panel: PanelSpec, files: list[Path]):
    for path in files:
        cols = read_series_csv(path)
        if panel.y not in cols:
            raise PanelSpecError(f"{path}: no column {panel.y!r} (columns: {', '.join(cols)})")
        ax.plot(cols["t"], cols[panel.y], lw=1.2, label=series_label(path, panel.legend_from))
    return "t", panel.y


def _draw_average(ax, panel: PanelSpec, files: list[Path]):
    series: dict[str, list[tuple[float, float]]] = {}
    for path in files:
        summary = read_summary(path)
        for rec in summary["records"]:
            params = rec.get("params", {})
            if panel.parameter not in params:
                raise PanelSpecError(
                    f"{path}: record {rec.get('label')!r} has no parameter {panel.parameter!r}"
                )
            y = rec.get(panel.value)
            if y is None:
                raise PanelSpecError(
                    f"{path}: record {rec.get('label')!r} has no value {panel.value!r}"
                )
            if panel.group_by:
                key = f"{panel.group_by}={_fmt(params.get(panel.group_by))}"
            else:
                key = panel.value
            series.setdefault(key, []).append((float(params[panel.parameter]), float(y)))
    for key, pts in series.items():
        pts.sort()
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        ax.plot(xs, ys, marker="o", ms=4, lw=1.2, label=key)
    return panel.parameter, panel.value


def _draw_dos(ax, panel: PanelSpec, files: list[Path]):
    for path in files:
        energy, dos = read_dos_csv(path)
        ax.plot(energy, dos, lw=1.0, label=series_label(path, panel.legend_from))
    return "energy", "density of states"


def _draw_scaling(ax, panel: PanelSpec, files: list[Path]):
    groups: dict[str, list[tuple[float, float]]] = {}
    for path in files:
        for set_label, _, dim, s2 in read_scaling_csv(path):
            groups.setdefault(set_label, []).append((float(np.log(dim)), s2))
    for set_label in sorted(groups):
        pts = sorted(groups[set_label])
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        label = set_label
        if panel.fit and xs.size >= 2:
            slope, intercept = np.polyfit(xs, ys, 1)
            label = f"{set_label} (slope {slope:.2f})"
        line = ax.plot(xs, ys, "o", ms=5, label=label)[0]
        if panel.fit and xs.size >= 2:
            span = np.array([xs.min(), xs.max()])
            ax.plot(span, slope * span + intercept, "--", lw=1.0, color=line.get_color())
    return "ln(sector dimension)", "participation entropy"


_DRAWERS = {
    "timeseries": _draw_timeseries,
    "average-vs-parameter": _draw_average,
    "dos": _draw_dos,
    "scaling": _draw_scaling,
}


def render(panel: PanelSpec, out_base=None) -> list[Path]:
    """Render one panel and return the written paths (PNG then SVG).

    ``out_base`` overrides the panel's own output field; either way the
    value is a base path and the two format suffixes are appended.
    """
    if out_base is not None:
        base = Path(out_base)
    elif panel.output:
        base = Path(panel.output)
    else:
        raise PanelSpecError("no output path: set the panel's output field or pass --out")
    if base.suffix in (".png", ".svg"):
        base = base.with_suffix("")

    files = expand_inputs(panel.inputs, panel.base_dir)
    fig, ax = _new_axes()
    try:
        default_x, default_y = _DRAWERS[panel.kind](ax, panel, files)
        ax.set_xlabel(panel.xlabel if panel.xlabel is not None else default_x)
        ax.set_ylabel(panel.ylabel if panel.ylabel is not None else default_y)
        if panel.title:
            ax.set_title(panel.title)
        if panel.x_range:
            ax.set_xlim(*panel.x_range)
        if panel.y_range:
            ax.set_ylim(*panel.y_range)
        ax.legend(fontsize=9)
        base.parent.mkdir(parents=True, exist_ok=True)
        written = []
        for suffix in (".png", ".svg"):
            target = base.parent / (base.name + suffix)
            fig.savefig(target, dpi=DPI, metadata={"Date": None})
            written.append(target)
        return written
    finally:
        plt.close(fig)
