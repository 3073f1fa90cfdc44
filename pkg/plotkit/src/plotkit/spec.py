"""Panel definitions: which files to read, what to draw, where to write.

A panel spec file is JSON holding either a single panel object or
``{"panels": [...]}``.  Input globs resolve relative to the spec file, so a
spec can live next to the run directory it describes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

KINDS = ("timeseries", "average-vs-parameter", "dos", "scaling")

_COMMON_KEYS = {
    "kind", "inputs", "output", "title", "xlabel", "ylabel",
    "legend_from", "x_range", "y_range",
}
_KIND_KEYS = {
    "timeseries": {"y"},
    "average-vs-parameter": {"parameter", "value", "group_by"},
    "dos": set(),
    "scaling": {"fit"},
}
_VALUE_FIELDS = ("imbalance_avg", "entropy_avg", "thermal_imbalance", "participation_entropy")


class PanelSpecError(ValueError):
    """Malformed panel spec, or inputs that cannot be used."""


@dataclass
class PanelSpec:
    """One validated panel, ready to render."""

    kind: str
    inputs: list[str]
    output: str | None = None
    title: str = ""
    xlabel: str | None = None
    ylabel: str | None = None
    legend_from: str | None = None
    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None
    y: str = "imbalance"
    parameter: str | None = None
    value: str = "imbalance_avg"
    group_by: str | None = None
    fit: bool = True
    base_dir: Path = field(default_factory=Path)


def _parse_range(raw, where: str):
    if raw is None:
        return None
    ok = (
        isinstance(raw, list)
        and len(raw) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)
    )
    if not ok:
        raise PanelSpecError(f"{where}: expected [low, high], got {raw!r}")
    return (float(raw[0]), float(raw[1]))


def _optional_str(raw: dict, key: str, where: str):
    v = raw.get(key)
    if v is not None and not isinstance(v, str):
        raise PanelSpecError(f"{where}.{key}: expected a string")
    return v


def panel_from_dict(raw: dict, base_dir, where: str = "panel") -> PanelSpec:
    if not isinstance(raw, dict):
        raise PanelSpecError(f"{where}: expected an object")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise PanelSpecError(f"{where}.kind: expected one of {', '.join(KINDS)}, got {kind!r}")
    unknown = sorted(set(raw) - _COMMON_KEYS - _KIND_KEYS[kind])
    if unknown:
        raise PanelSpecError(f"{where}: unknown key(s) for {kind}: {', '.join(unknown)}")

    inputs = raw.get("inputs")
    if isinstance(inputs, str):
        inputs = [inputs]
    if not (isinstance(inputs, list) and inputs and all(isinstance(g, str) and g for g in inputs)):
        raise PanelSpecError(f"{where}.inputs: expected one or more glob patterns")

    panel = PanelSpec(
        kind=kind,
        inputs=list(inputs),
        output=_optional_str(raw, "output", where),
        title=_optional_str(raw, "title", where) or "",
        xlabel=_optional_str(raw, "xlabel", where),
        ylabel=_optional_str(raw, "ylabel", where),
        legend_from=_optional_str(raw, "legend_from", where),
        x_range=_parse_range(raw.get("x_range"), f"{where}.x_range"),
        y_range=_parse_range(raw.get("y_range"), f"{where}.y_range"),
        base_dir=Path(base_dir),
    )

    if kind == "timeseries":
        panel.y = _optional_str(raw, "y", where) or "imbalance"
    elif kind == "average-vs-parameter":
        panel.parameter = _optional_str(raw, "parameter", where)
        if not panel.parameter:
            raise PanelSpecError(f"{where}: average-vs-parameter panels need a parameter")
        panel.value = _optional_str(raw, "value", where) or "imbalance_avg"
        if panel.value not in _VALUE_FIELDS:
            raise PanelSpecError(
                f"{where}.value: expected one of {', '.join(_VALUE_FIELDS)}, got {panel.value!r}"
            )
        panel.group_by = _optional_str(raw, "group_by", where)
    elif kind == "scaling":
        fit = raw.get("fit", True)
        if not isinstance(fit, bool):
            raise PanelSpecError(f"{where}.fit: expected true or false")
        panel.fit = fit
    return panel


def load_panels(path) -> list[PanelSpec]:
    """Read a spec file and return its panels (one element for a single panel)."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PanelSpecError(f"{path}: invalid JSON: {exc}") from exc
    if isinstance(doc, dict) and "panels" in doc:
        panels = doc["panels"]
        if not (isinstance(panels, list) and panels):
            raise PanelSpecError(f"{path}: panels must be a non-empty list")
        extra = sorted(set(doc) - {"panels"})
        if extra:
            raise PanelSpecError(f"{path}: unknown top-level key(s): {', '.join(extra)}")
        return [
            panel_from_dict(p, path.parent, where=f"panels[{i}]") for i, p in enumerate(panels)
        ]
    return [panel_from_dict(doc, path.parent)]
