"""Batch figure panels from spin-chain simulation output files.

Reads the runner's per-point CSV tables and JSON summaries (nothing is
imported from the simulation package) and renders four panel kinds:
time series, windowed averages against a swept parameter, density-of-states
curves, and participation-entropy scaling with linear fits.
"""

from .io import (
    expand_inputs,
    param_tokens,
    read_dos_csv,
    read_scaling_csv,
    read_series_csv,
    read_summary,
)
from .panels import render
from .spec import KINDS, PanelSpec, PanelSpecError, load_panels, panel_from_dict

__version__ = "0.1.0"

__all__ = [
    "KINDS",
    "PanelSpec",
    "PanelSpecError",
    "expand_inputs",
    "load_panels",
    "panel_from_dict",
    "param_tokens",
    "read_dos_csv",
    "read_scaling_csv",
    "read_series_csv",
    "read_summary",
    "render",
    "__version__",
]
