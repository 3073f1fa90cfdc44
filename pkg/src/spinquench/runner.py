"""Scenario execution: config parsing, sweeps, and delimited/JSON output.

A scenario is a JSON document with the following blocks (unknown keys are
rejected everywhere):

    model        required: L, two_s; optional: J0, theta, J1, J2, h0, gamma, D.
                 Angles accept numbers or strings like "pi/3", "2pi/3", "-pi".
    initial_state  required: a pattern of doubled projections "3,3,-3,...",
                 a list of integers, or a generator directive
                 "single_island(length[, center])" / "n_walls(k)".
    evolution    optional: method ("auto"|"dense"|"krylov", default "auto"),
                 t_max (500.0), dt (0.5), times (explicit list, exclusive
                 with t_max/dt), krylov_dim (30), step_tolerance (1e-10),
                 max_substeps (10000).
    observables  optional: entropy_cut (default L//2), window ([400, 500]),
                 degeneracy_tolerance (default: width-relative 1e-8),
                 dos_sigma (default 0.05*J0), spectral (true), dos (false).
    sweep        optional: {"parameter": name, "values": [...]} or a list of
                 two such axes (cross product, first axis outermost).
                 Parameters: theta, h0, gamma, D, J0, walls.
    guards       optional: max_states, dense_dim, max_nnz.
    output       optional: label (defaults to the file stem), export_operator.

Each sweep point writes one CSV (columns t, imbalance, entropy_cut<k>,
sz_1..sz_L); the scenario writes one summary.json holding resolved
parameters, windowed averages, spectral diagnostics when the dense path
ran, and an error manifest for failed points.  Runs with the dense method
are reproducible byte for byte.
"""

from __future__ import annotations

import json
import logging
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .basis import DEFAULT_ENUMERATION_GUARD, SpinBasis, enumerate_sector
from .dynamics import EvolutionConfig, StateVector, evolve_stream, uniform_time_grid
from .errors import ConfigError
from .hpboson import build_hp_hamiltonian, enumerate_boson_sector, one_magnon_crosscheck
from .model import (
    DEFAULT_DENSE_GUARD,
    DEFAULT_NNZ_GUARD,
    ModelParams,
    build_hamiltonian,
    full_spectrum,
    write_matrix_market,
)
from .observables import (
    decompose_state,
    density_of_states,
    entanglement_entropy,
    imbalance_from_profiles,
    magnetization_profile,
    participation_entropy,
    time_average,
)

log = logging.getLogger("spinquench")

OUTPUT_ROOT_ENV = "SPINQUENCH_OUT"
DENSE_AUTO_LIMIT = 4096
SWEEPABLE_MODEL_FIELDS = ("theta", "h0", "gamma", "D", "J0")

_MODEL_KEYS = {"L", "two_s", "J0", "theta", "J1", "J2", "h0", "gamma", "D"}
_EVOLUTION_KEYS = {"method", "t_max", "dt", "times", "krylov_dim", "step_tolerance", "max_substeps"}
_OBSERVABLE_KEYS = {"entropy_cut", "window", "degeneracy_tolerance", "dos_sigma", "spectral", "dos"}
_SWEEP_KEYS = {"parameter", "values"}
_GUARD_KEYS = {"max_states", "dense_dim", "max_nnz"}
_OUTPUT_KEYS = {"label", "export_operator"}
_TOP_KEYS = {"model", "initial_state", "evolution", "observables", "sweep", "guards", "output", "description"}

_PI_RE = re.compile(
    r"^\s*(-)?\s*(\d+(?:\.\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d+)?))?\s*$", re.IGNORECASE
)
_DIRECTIVE_RE = re.compile(r"^\s*(single_island|n_walls)\s*\(([^)]*)\)\s*$")


def parse_angle(value, where: str) -> float:
    """Accept plain numbers or strings such as "pi", "2pi/3", "-pi/2"."""
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
        m = _PI_RE.match(value)
        if m:
            sign = -1.0 if m.group(1) else 1.0
            mult = float(m.group(2)) if m.group(2) else 1.0
            div = float(m.group(3)) if m.group(3) else 1.0
            return sign * mult * math.pi / div
    raise ConfigError(f"{where}: cannot interpret {value!r} as a number")


def _reject_unknown(block: dict, allowed: set, where: str):
    unknown = sorted(set(block) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")


def _get_number(block, key, where, default=None, *, integer=False, minimum=None):
    if key not in block or block[key] is None:
        return default
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    if integer:
        if int(v) != v:
            raise ConfigError(f"{where}.{key}: expected an integer, got {v!r}")
        v = int(v)
    else:
        v = float(v)
    if minimum is not None and v < minimum:
        raise ConfigError(f"{where}.{key}: must be at least {minimum}, got {v}")
    return v


@dataclass
class Guards:
    max_states: int = DEFAULT_ENUMERATION_GUARD
    dense_dim: int = DEFAULT_DENSE_GUARD
    max_nnz: int = DEFAULT_NNZ_GUARD


@dataclass
class EvolutionSettings:
    method: str = "auto"
    t_max: float = 500.0
    dt: float = 0.5
    times: list | None = None
    krylov_dim: int = 30
    step_tolerance: float = 1e-10
    max_substeps: int = 10_000

    def time_grid(self) -> np.ndarray:
        if self.times is not None:
            return np.asarray(self.times, dtype=float)
        return uniform_time_grid(self.t_max, self.dt)


@dataclass
class ObservableSettings:
    entropy_cut: int | None = None
    window: tuple[float, float] = (400.0, 500.0)
    degeneracy_tolerance: float | None = None
    dos_sigma: float | None = None
    spectral: bool = True
    dos: bool = False


@dataclass
class SweepAxis:
    parameter: str
    values: list


@dataclass
class ScenarioConfig:
    """A validated scenario, ready to run."""

    model: dict
    initial_state: object
    evolution: EvolutionSettings
    observables: ObservableSettings
    sweep: list[SweepAxis] = field(default_factory=list)
    guards: Guards = field(default_factory=Guards)
    label: str = "scenario"
    export_operator: bool = False
    description: str = ""


def _parse_model_block(block, where="model") -> dict:
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected an object")
    _reject_unknown(block, _MODEL_KEYS, where)
    if "L" not in block or "two_s" not in block:
        raise ConfigError(f"{where}: L and two_s are required")
    model = {
        "L": _get_number(block, "L", where, integer=True, minimum=2),
        "two_s": _get_number(block, "two_s", where, integer=True, minimum=1),
        "J0": _get_number(block, "J0", where, 1.0),
        "h0": _get_number(block, "h0", where, 0.0),
        "gamma": _get_number(block, "gamma", where, 0.0),
        "D": _get_number(block, "D", where, 0.0),
    }
    if "theta" in block and block["theta"] is not None:
        if block.get("J1") is not None or block.get("J2") is not None:
            raise ConfigError(f"{where}: give either theta or explicit J1/J2, not both")
        model["theta"] = parse_angle(block["theta"], f"{where}.theta")
    elif block.get("J1") is not None or block.get("J2") is not None:
        model["J1"] = _get_number(block, "J1", where, 0.0)
        model["J2"] = _get_number(block, "J2", where, 0.0)
    else:
        model["theta"] = 0.0
    return model


def _parse_sweep_block(block) -> list[SweepAxis]:
    axes_raw = block if isinstance(block, list) else [block]
    if len(axes_raw) > 2:
        raise ConfigError("sweep: at most two axes are supported")
    axes = []
    for i, axis in enumerate(axes_raw):
        where = f"sweep[{i}]" if isinstance(block, list) else "sweep"
        if not isinstance(axis, dict):
            raise ConfigError(f"{where}: expected an object")
        _reject_unknown(axis, _SWEEP_KEYS, where)
        param = axis.get("parameter")
        values = axis.get("values")
        if param is None or values is None:
            raise ConfigError(f"{where}: parameter and values are required")
        if param not in SWEEPABLE_MODEL_FIELDS and param != "walls":
            raise ConfigError(
                f"{where}.parameter: {param!r} is not sweepable "
                f"(use one of {', '.join(SWEEPABLE_MODEL_FIELDS)}, walls)"
            )
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{where}.values: expected a non-empty list")
        if param == "walls":
            parsed = []
            for v in values:
                if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
                    raise ConfigError(f"{where}.values: wall counts must be integers, got {v!r}")
                parsed.append(int(v))
        else:
            parsed = [parse_angle(v, f"{where}.values") for v in values]
        axes.append(SweepAxis(param, parsed))
    if len(axes) == 2 and axes[0].parameter == axes[1].parameter:
        raise ConfigError("sweep: the two axes must sweep different parameters")
    return axes


def parse_scenario(text: str, *, label: str = "scenario") -> ScenarioConfig:
    """Parse and validate a scenario document from JSON text.

    Syntax errors keep the decoder's line/column diagnostics; schema
    violations are reported with a dotted field path.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return scenario_from_dict(raw, label=label)


def scenario_from_dict(raw: dict, *, label: str = "scenario") -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("scenario: expected a JSON object at the top level")
    _reject_unknown(raw, _TOP_KEYS, "scenario")
    if "model" not in raw:
        raise ConfigError("scenario: a model block is required")
    model = _parse_model_block(raw["model"])

    if "initial_state" not in raw:
        raise ConfigError("scenario: an initial_state is required")
    initial_state = raw["initial_state"]
    if not isinstance(initial_state, (str, list)):
        raise ConfigError("initial_state: expected a pattern string, directive, or list")

    evo_block = raw.get("evolution", {}) or {}
    _reject_unknown(evo_block, _EVOLUTION_KEYS, "evolution")
    method = evo_block.get("method", "auto")
    if method not in ("auto", "dense", "krylov"):
        raise ConfigError(f"evolution.method: expected auto|dense|krylov, got {method!r}")
    if "times" in evo_block and evo_block["times"] is not None:
        if "t_max" in evo_block or "dt" in evo_block:
            raise ConfigError("evolution: give either times or t_max/dt, not both")
        times = evo_block["times"]
        if not isinstance(times, list) or not times:
            raise ConfigError("evolution.times: expected a non-empty list")
        times = [parse_angle(t, "evolution.times") for t in times]
        if times[0] != 0.0:
            raise ConfigError("evolution.times: the grid must start at 0")
        if any(b < a for a, b in zip(times, times[1:])):
            raise ConfigError("evolution.times: the grid must be non-decreasing")
    else:
        times = None
    evolution = EvolutionSettings(
        method=method,
        t_max=_get_number(evo_block, "t_max", "evolution", 500.0, minimum=0.0),
        dt=_get_number(evo_block, "dt", "evolution", 0.5),
        times=times,
        krylov_dim=_get_number(evo_block, "krylov_dim", "evolution", 30, integer=True, minimum=2),
        step_tolerance=_get_number(evo_block, "step_tolerance", "evolution", 1e-10),
        max_substeps=_get_number(evo_block, "max_substeps", "evolution", 10_000, integer=True, minimum=1),
    )
    if evolution.dt <= 0:
        raise ConfigError("evolution.dt: must be positive")

    obs_block = raw.get("observables", {}) or {}
    _reject_unknown(obs_block, _OBSERVABLE_KEYS, "observables")
    window = obs_block.get("window", [400.0, 500.0])
    if not (isinstance(window, list) and len(window) == 2):
        raise ConfigError("observables.window: expected [t_lo, t_hi]")
    window = (parse_angle(window[0], "observables.window"), parse_angle(window[1], "observables.window"))
    if window[0] > window[1]:
        raise ConfigError("observables.window: t_lo must not exceed t_hi")
    grid = evolution.time_grid()
    if window[0] > grid[-1]:
        raise ConfigError(
            f"observables.window: window starts at {window[0]} but the grid ends at {grid[-1]}"
        )
    entropy_cut = _get_number(obs_block, "entropy_cut", "observables", None, integer=True, minimum=1)
    if entropy_cut is not None and entropy_cut >= model["L"]:
        raise ConfigError(f"observables.entropy_cut: must be below L={model['L']}")
    for flag in ("spectral", "dos"):
        if flag in obs_block and not isinstance(obs_block[flag], bool):
            raise ConfigError(f"observables.{flag}: expected true or false")
    observables = ObservableSettings(
        entropy_cut=entropy_cut,
        window=window,
        degeneracy_tolerance=_get_number(obs_block, "degeneracy_tolerance", "observables", None),
        dos_sigma=_get_number(obs_block, "dos_sigma", "observables", None),
        spectral=obs_block.get("spectral", True),
        dos=obs_block.get("dos", False),
    )

    sweep = _parse_sweep_block(raw["sweep"]) if raw.get("sweep") else []
    if any(axis.parameter == "walls" for axis in sweep) and not isinstance(initial_state, str):
        raise ConfigError("sweep: a walls sweep replaces initial_state, which must stay a string")

    guards_block = raw.get("guards", {}) or {}
    _reject_unknown(guards_block, _GUARD_KEYS, "guards")
    guards = Guards(
        max_states=_get_number(guards_block, "max_states", "guards", DEFAULT_ENUMERATION_GUARD, integer=True, minimum=2),
        dense_dim=_get_number(guards_block, "dense_dim", "guards", DEFAULT_DENSE_GUARD, integer=True, minimum=1),
        max_nnz=_get_number(guards_block, "max_nnz", "guards", DEFAULT_NNZ_GUARD, integer=True, minimum=1),
    )

    out_block = raw.get("output", {}) or {}
    _reject_unknown(out_block, _OUTPUT_KEYS, "output")
    out_label = out_block.get("label", label)
    if not isinstance(out_label, str) or not out_label:
        raise ConfigError("output.label: expected a non-empty string")
    export_operator = out_block.get("export_operator", False)
    if not isinstance(export_operator, bool):
        raise ConfigError("output.export_operator: expected true or false")

    cfg = ScenarioConfig(
        model=model,
        initial_state=initial_state,
        evolution=evolution,
        observables=observables,
        sweep=sweep,
        guards=guards,
        label=out_label,
        export_operator=export_operator,
        description=raw.get("description", ""),
    )
    # surface pattern mistakes at parse time when no sweep rewrites the state
    if not any(axis.parameter == "walls" for axis in cfg.sweep):
        resolve_initial_pattern(cfg.initial_state, model["L"], model["two_s"])
    return cfg


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), label=path.stem)


def _split_sizes(total: int, parts: int) -> list[int]:
    base, rem = divmod(total, parts)
    return [base + 1] * rem + [base] * (parts - rem)


def single_island_pattern(L: int, two_s: int, length: int, center: int | None = None) -> np.ndarray:
    """All sites down except a block of ``length`` up spins.

    Without an explicit center the island sits in the middle of the chain;
    otherwise it covers center - (length-1)//2 .. center + length//2
    (1-based sites).
    """
    if not 1 <= length <= L:
        raise ConfigError(f"single_island: length must be in 1..{L}, got {length}")
    if center is None:
        start = (L - length) // 2 + 1
    else:
        if not 1 <= center <= L:
            raise ConfigError(f"single_island: center must be in 1..{L}, got {center}")
        start = center - (length - 1) // 2
    if start < 1 or start + length - 1 > L:
        raise ConfigError("single_island: the island does not fit on the chain")
    pattern = np.full(L, -two_s, dtype=np.int16)
    pattern[start - 1 : start - 1 + length] = two_s
    return pattern


def n_walls_pattern(L: int, two_s: int, walls: int) -> np.ndarray:
    """Alternating fully polarized blocks with the requested number of domain
    walls, balanced so the total Sz is zero.  Blocks start down, sizes as
    equal as possible within each sign."""
    if walls < 1 or walls + 1 > L:
        raise ConfigError(f"n_walls: wall count must be in 1..{L - 1}, got {walls}")
    if L % 2:
        raise ConfigError("n_walls: the chain length must be even to balance the sector")
    blocks = walls + 1
    n_down = (blocks + 1) // 2
    n_up = blocks // 2
    half = L // 2
    if n_down > half or n_up > half:
        raise ConfigError(f"n_walls: {walls} walls do not fit on {L} sites with zero total Sz")
    down_sizes = _split_sizes(half, n_down)
    up_sizes = _split_sizes(half, n_up)
    pattern = []
    for i in range(blocks):
        if i % 2 == 0:
            pattern += [-two_s] * down_sizes[i // 2]
        else:
            pattern += [two_s] * up_sizes[i // 2]
    return np.asarray(pattern, dtype=np.int16)


def resolve_initial_pattern(spec, L: int, two_s: int) -> np.ndarray:
    """Turn an initial_state entry into a validated pattern of doubled projections."""
    if isinstance(spec, (list, tuple, np.ndarray)):
        values = list(spec)
    elif isinstance(spec, str):
        m = _DIRECTIVE_RE.match(spec)
        if m:
            name, argtext = m.group(1), m.group(2)
            try:
                args = [int(a.strip()) for a in argtext.split(",") if a.strip()]
            except ValueError as exc:
                raise ConfigError(f"initial_state: bad arguments in {spec!r}") from exc
            if name == "single_island":
                if len(args) not in (1, 2):
                    raise ConfigError("single_island takes (length) or (length, center)")
                return single_island_pattern(L, two_s, args[0], args[1] if len(args) == 2 else None)
            if len(args) != 1:
                raise ConfigError("n_walls takes exactly one argument")
            return n_walls_pattern(L, two_s, args[0])
        try:
            values = [int(tok.strip()) for tok in spec.split(",")]
        except ValueError as exc:
            raise ConfigError(f"initial_state: cannot parse pattern {spec!r}") from exc
    else:
        raise ConfigError(f"initial_state: unsupported value {spec!r}")
    if len(values) != L:
        raise ConfigError(f"initial_state: pattern has {len(values)} sites, expected {L}")
    pattern = np.asarray(values, dtype=np.int16)
    bad = [
        (j + 1, int(v))
        for j, v in enumerate(pattern)
        if abs(int(v)) > two_s or (int(v) + two_s) % 2 != 0
    ]
    if bad:
        j, v = bad[0]
        raise ConfigError(
            f"initial_state: m={v} at site {j} is not admissible for two_s={two_s}"
        )
    return pattern


def build_initial_state(pattern, basis: SpinBasis) -> StateVector:
    """Product state with the given doubled projections, as a basis vector."""
    pattern = np.asarray(pattern, dtype=np.int16)
    try:
        ordinal = basis.ordinal(pattern)
    except KeyError as exc:
        raise ConfigError(
            f"initial_state: pattern with doubled total Sz {int(pattern.sum())} "
            f"does not belong to {basis!r}"
        ) from exc
    return StateVector.basis_state(basis, ordinal)


@dataclass
class RunRecord:
    """One completed sweep point."""

    label: str
    params: dict
    pattern: list[int]
    two_sz_total: int
    basis_size: int
    method: str
    times: np.ndarray
    imbalance: np.ndarray
    entropy: np.ndarray
    magnetization: np.ndarray
    entropy_cut: int
    window: tuple[float, float]
    imbalance_avg: float
    entropy_avg: float
    thermal_imbalance: float
    participation: float | None
    wall_time_s: float
    csv_path: str | None = None
    dos_csv_path: str | None = None


def _format_value(v) -> str:
    if isinstance(v, int):
        return str(v)
    return f"{v:.6g}"


def _point_label(label: str, assignment: list[tuple[str, object]]) -> str:
    if not assignment:
        return label
    toks = [f"{name}-{_format_value(v)}" for name, v in assignment]
    return label + "_" + "_".join(toks)


def _resolve_point(cfg: ScenarioConfig, assignment: list[tuple[str, object]]):
    model = dict(cfg.model)
    state_spec = cfg.initial_state
    for name, value in assignment:
        if name == "walls":
            state_spec = f"n_walls({value})"
        else:
            model[name] = value
    params = ModelParams(**model)
    pattern = resolve_initial_pattern(state_spec, params.L, params.two_s)
    return params, pattern


def _choose_method(requested: str, dim: int, guards: Guards) -> str:
    if requested != "auto":
        return requested
    return "dense" if dim <= min(DENSE_AUTO_LIMIT, guards.dense_dim) else "krylov"


def run_point(cfg: ScenarioConfig, assignment=None, *, method_override: str | None = None) -> RunRecord:
    """Execute one sweep point in memory (no files written)."""
    from .observables import thermal_imbalance as _thermal

    assignment = assignment or []
    t0 = time.perf_counter()
    params, pattern = _resolve_point(cfg, assignment)
    two_sz_total = int(pattern.sum())
    basis = enumerate_sector(params.L, params.two_s, two_sz_total, max_states=cfg.guards.max_states)
    H = build_hamiltonian(params, basis, max_nnz=cfg.guards.max_nnz)
    psi0 = build_initial_state(pattern, basis)

    method = _choose_method(method_override or cfg.evolution.method, basis.size, cfg.guards)
    evo = EvolutionConfig(
        time_grid=cfg.evolution.time_grid(),
        method=method,
        krylov_dim=cfg.evolution.krylov_dim,
        step_tolerance=cfg.evolution.step_tolerance,
        max_substeps=cfg.evolution.max_substeps,
        dense_guard=cfg.guards.dense_dim,
    )
    cut = cfg.observables.entropy_cut or params.L // 2
    profile0 = magnetization_profile(psi0, basis)

    n_t = evo.time_grid.size
    times = np.empty(n_t)
    imb = np.empty(n_t)
    ent = np.empty(n_t)
    mag = np.empty((n_t, params.L))
    for i, (t, psi) in enumerate(evolve_stream(H, psi0, evo)):
        times[i] = t
        mag[i] = magnetization_profile(psi, basis)
        imb[i] = imbalance_from_profiles(mag[i], profile0, params.L, params.two_s)
        ent[i] = entanglement_entropy(psi, cut, basis)

    participation = None
    if method == "dense" and cfg.observables.spectral:
        decomp = decompose_state(
            H, psi0, max_dim=cfg.guards.dense_dim, degeneracy_tol=cfg.observables.degeneracy_tolerance
        )
        participation = participation_entropy(decomp)

    label = _point_label(cfg.label, assignment)
    record = RunRecord(
        label=label,
        params={
            "L": params.L,
            "two_s": params.two_s,
            "J0": params.J0,
            "theta": params.theta,
            "J1": params.J1,
            "J2": params.J2,
            "h0": params.h0,
            "gamma": params.gamma,
            "D": params.D,
            **{name: value for name, value in assignment},
        },
        pattern=[int(v) for v in pattern],
        two_sz_total=two_sz_total,
        basis_size=basis.size,
        method=method,
        times=times,
        imbalance=imb,
        entropy=ent,
        magnetization=mag,
        entropy_cut=cut,
        window=cfg.observables.window,
        imbalance_avg=time_average(times, imb, cfg.observables.window),
        entropy_avg=time_average(times, ent, cfg.observables.window),
        thermal_imbalance=_thermal(params.L, params.two_s, two_sz_total),
        participation=participation,
        wall_time_s=time.perf_counter() - t0,
    )
    if cfg.observables.dos and method == "dense":
        sigma = cfg.observables.dos_sigma or 0.05 * abs(params.J0) or 0.05
        vals, _ = full_spectrum(H, max_dim=cfg.guards.dense_dim, vectors=False)
        record.dos = density_of_states(vals, sigma)  # attached lazily; written by the caller
    return record


def sweep_assignments(cfg: ScenarioConfig) -> list[list[tuple[str, object]]]:
    """Cross product of the sweep axes, first axis outermost; [[]] if no sweep."""
    if not cfg.sweep:
        return [[]]
    if len(cfg.sweep) == 1:
        axis = cfg.sweep[0]
        return [[(axis.parameter, v)] for v in axis.values]
    a, b = cfg.sweep
    return [[(a.parameter, va), (b.parameter, vb)] for va in a.values for vb in b.values]


def _write_series_csv(path: Path, record: RunRecord):
    cols = [f"sz_{j}" for j in range(1, len(record.magnetization[0]) + 1)]
    header = ",".join(["t", "imbalance", f"entropy_cut{record.entropy_cut}"] + cols)
    lines = [header]
    for i in range(record.times.size):
        row = [record.times[i], record.imbalance[i], record.entropy[i], *record.magnetization[i]]
        lines.append(",".join(f"{x:.17g}" for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def _record_summary(record: RunRecord) -> dict:
    return {
        "label": record.label,
        "params": {k: v for k, v in record.params.items()},
        "pattern": record.pattern,
        "two_sz_total": record.two_sz_total,
        "basis_size": record.basis_size,
        "method": record.method,
        "entropy_cut": record.entropy_cut,
        "window": list(record.window),
        "imbalance_avg": record.imbalance_avg,
        "entropy_avg": record.entropy_avg,
        "thermal_imbalance": record.thermal_imbalance,
        "participation_entropy": record.participation,
        "wall_time_s": round(record.wall_time_s, 3),
        "csv": record.csv_path,
        "dos_csv": record.dos_csv_path,
    }


def _write_dos_csv(path: Path, grid, density):
    lines = ["energy,dos"]
    lines += [f"{e:.17g},{d:.17g}" for e, d in zip(grid, density)]
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def run_scenario(
    cfg: ScenarioConfig,
    out_dir,
    *,
    method_override: str | None = None,
    threads: int = 1,
) -> tuple[list[RunRecord], list[dict]]:
    """Run every sweep point, write per-point CSVs and one summary.json.

    Failures of individual points are collected into the error manifest
    instead of aborting the scenario.  Returns (records, errors).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    assignments = sweep_assignments(cfg)

    def job(assignment):
        return run_point(cfg, assignment, method_override=method_override)

    results: list[RunRecord | None] = [None] * len(assignments)
    errors: list[dict] = []
    if threads > 1 and len(assignments) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {i: pool.submit(job, a) for i, a in enumerate(assignments)}
            for i, fut in futures.items():
                try:
                    results[i] = fut.result()
                except Exception as exc:
                    errors.append({"point": _point_label(cfg.label, assignments[i]), "error": str(exc)})
                    log.warning("point %s failed: %s", _point_label(cfg.label, assignments[i]), exc)
    else:
        for i, assignment in enumerate(assignments):
            try:
                results[i] = job(assignment)
            except Exception as exc:
                errors.append({"point": _point_label(cfg.label, assignment), "error": str(exc)})
                log.warning("point %s failed: %s", _point_label(cfg.label, assignment), exc)

    records = []
    for rec in results:
        if rec is None:
            continue
        csv_path = out / f"{rec.label}.csv"
        _write_series_csv(csv_path, rec)
        rec.csv_path = csv_path.name
        if hasattr(rec, "dos"):
            grid, density = rec.dos
            dos_path = out / f"{rec.label}_dos.csv"
            _write_dos_csv(dos_path, grid, density)
            rec.dos_csv_path = dos_path.name
        records.append(rec)
        log.info(
            "%s: size=%d method=%s avg_imbalance=%.4f avg_entropy=%.4f (%.1fs)",
            rec.label, rec.basis_size, rec.method, rec.imbalance_avg, rec.entropy_avg, rec.wall_time_s,
        )

    if cfg.export_operator and records:
        params, pattern = _resolve_point(cfg, assignments[0])
        basis = enumerate_sector(params.L, params.two_s, int(pattern.sum()), max_states=cfg.guards.max_states)
        H = build_hamiltonian(params, basis, max_nnz=cfg.guards.max_nnz)
        write_matrix_market(H, out / f"{cfg.label}_operator.mtx")

    summary = {
        "label": cfg.label,
        "description": cfg.description,
        "sweep": [{"parameter": ax.parameter, "values": list(ax.values)} for ax in cfg.sweep],
        "window": list(cfg.observables.window),
        "records": [_record_summary(r) for r in records],
        "errors": errors,
    }
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return records, errors


def run_dos(cfg: ScenarioConfig, out_dir, *, threads: int = 1) -> tuple[list[dict], list[dict]]:
    """Spectrum-only task: density of states plus spectral diagnostics per point."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    assignments = sweep_assignments(cfg)
    records: list[dict] = []
    errors: list[dict] = []
    for assignment in assignments:
        label = _point_label(cfg.label, assignment)
        try:
            t0 = time.perf_counter()
            params, pattern = _resolve_point(cfg, assignment)
            basis = enumerate_sector(
                params.L, params.two_s, int(pattern.sum()), max_states=cfg.guards.max_states
            )
            H = build_hamiltonian(params, basis, max_nnz=cfg.guards.max_nnz)
            psi0 = build_initial_state(pattern, basis)
            decomp = decompose_state(
                H, psi0, max_dim=cfg.guards.dense_dim,
                degeneracy_tol=cfg.observables.degeneracy_tolerance,
            )
            sigma = cfg.observables.dos_sigma or 0.05 * abs(params.J0) or 0.05
            grid, density = density_of_states(decomp.eigenvalues, sigma)
            dos_path = out / f"{label}_dos.csv"
            _write_dos_csv(dos_path, grid, density)
            tol = decomp.degeneracy_tol
            distinct = 1 + int(np.sum(np.diff(decomp.eigenvalues) > tol))
            records.append(
                {
                    "label": label,
                    "params": {**{k: getattr(params, k) for k in ("L", "two_s", "J0", "theta", "J1", "J2", "h0", "gamma", "D")},
                               **dict(assignment)},
                    "basis_size": basis.size,
                    "energy_min": float(decomp.eigenvalues[0]),
                    "energy_max": float(decomp.eigenvalues[-1]),
                    "distinct_levels": distinct,
                    "participation_entropy": participation_entropy(decomp),
                    "dos_sigma": sigma,
                    "dos_csv": dos_path.name,
                    "wall_time_s": round(time.perf_counter() - t0, 3),
                }
            )
            log.info("%s: %d levels (%d distinct)", label, basis.size, distinct)
        except Exception as exc:
            errors.append({"point": label, "error": str(exc)})
            log.warning("point %s failed: %s", label, exc)
    summary = {
        "label": cfg.label,
        "description": cfg.description,
        "task": "dos",
        "sweep": [{"parameter": ax.parameter, "values": list(ax.values)} for ax in cfg.sweep],
        "records": records,
        "errors": errors,
    }
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return records, errors


_SCALING_KEYS = {"L_values", "parameter_sets", "island_length", "theta"}


def run_scaling(raw: dict, out_dir, *, label: str = "scaling") -> dict:
    """Participation-entropy growth against sector size.

    raw is the scaling block: L_values (even lengths), parameter_sets
    (list of {D, h0} objects), island_length (default 2), theta (default 0).
    For each set, S2 of the island initial state is computed from the dense
    spectrum at every length and fitted linearly against ln(sector size).
    """
    if not isinstance(raw, dict):
        raise ConfigError("scaling: expected an object")
    _reject_unknown(raw, _SCALING_KEYS | {"model", "guards"}, "scaling")
    model_block = raw.get("model")
    if not isinstance(model_block, dict):
        raise ConfigError("scaling.model: a model block with two_s is required")
    base_model = dict(model_block)
    base_model.setdefault("L", 4)  # placeholder; replaced per point
    model = _parse_model_block(base_model, where="scaling.model")
    guards_block = raw.get("guards", {}) or {}
    _reject_unknown(guards_block, _GUARD_KEYS, "scaling.guards")
    guards = Guards(
        max_states=_get_number(guards_block, "max_states", "scaling.guards", DEFAULT_ENUMERATION_GUARD, integer=True),
        dense_dim=_get_number(guards_block, "dense_dim", "scaling.guards", DEFAULT_DENSE_GUARD, integer=True),
        max_nnz=_get_number(guards_block, "max_nnz", "scaling.guards", DEFAULT_NNZ_GUARD, integer=True),
    )
    L_values = raw.get("L_values")
    if not (isinstance(L_values, list) and L_values and all(isinstance(v, int) and not isinstance(v, bool) for v in L_values)):
        raise ConfigError("scaling.L_values: expected a non-empty list of integers")
    sets = raw.get("parameter_sets")
    if not (isinstance(sets, list) and sets):
        raise ConfigError("scaling.parameter_sets: expected a non-empty list")
    island = raw.get("island_length", 2)
    if not isinstance(island, int) or island < 1:
        raise ConfigError("scaling.island_length: expected a positive integer")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    fits = []
    errors = []
    for i, pset in enumerate(sets):
        if not isinstance(pset, dict):
            raise ConfigError(f"scaling.parameter_sets[{i}]: expected an object")
        _reject_unknown(pset, {"D", "h0", "gamma", "theta", "J0"}, f"scaling.parameter_sets[{i}]")
        set_model = dict(model)
        for k, v in pset.items():
            set_model[k] = parse_angle(v, f"scaling.parameter_sets[{i}].{k}")
        set_label = "_".join(f"{k}-{_format_value(set_model[k])}" for k in ("D", "h0"))
        xs, ys = [], []
        for L in L_values:
            try:
                point_model = dict(set_model)
                point_model["L"] = L
                params = ModelParams(**point_model)
                pattern = single_island_pattern(L, params.two_s, island)
                basis = enumerate_sector(L, params.two_s, int(pattern.sum()), max_states=guards.max_states)
                H = build_hamiltonian(params, basis, max_nnz=guards.max_nnz)
                psi0 = build_initial_state(pattern, basis)
                decomp = decompose_state(H, psi0, max_dim=guards.dense_dim)
                s2 = participation_entropy(decomp)
                rows.append((set_label, L, basis.size, s2))
                xs.append(math.log(basis.size))
                ys.append(s2)
                log.info("%s L=%d: dim=%d s2=%.4f", set_label, L, basis.size, s2)
            except Exception as exc:
                errors.append({"point": f"{set_label}_L-{L}", "error": str(exc)})
                log.warning("scaling point %s L=%d failed: %s", set_label, L, exc)
        fit = None
        if len(xs) >= 2:
            slope, intercept = np.polyfit(xs, ys, 1)
            fit = {"slope": float(slope), "intercept": float(intercept)}
        fits.append({"set": set_label, "points": len(xs), "fit": fit})

    csv_path = out / f"{label}.csv"
    lines = ["set,L,hilbert_dim,s2"]
    lines += [f"{s},{L},{dim},{s2:.17g}" for s, L, dim, s2 in rows]
    csv_path.write_text("\n".join(lines) + "\n", encoding="ascii")
    summary = {
        "label": label,
        "task": "scaling",
        "island_length": island,
        "L_values": list(L_values),
        "csv": csv_path.name,
        "fits": fits,
        "errors": errors,
    }
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return summary


_HP_KEYS = {"total_n", "n_max", "anisotropy_mu_sign"}


def run_hp(raw: dict, out_dir, *, label: str = "hp") -> dict:
    """Bosonized-model task: spectrum export plus the one-deviation crosscheck."""
    if not isinstance(raw, dict):
        raise ConfigError("hp config: expected an object")
    _reject_unknown(raw, {"model", "hp", "description"}, "hp config")
    model = _parse_model_block(raw.get("model", {}))
    block = raw.get("hp", {}) or {}
    _reject_unknown(block, _HP_KEYS, "hp")
    total_n = _get_number(block, "total_n", "hp", 1, integer=True, minimum=0)
    n_max = _get_number(block, "n_max", "hp", model["two_s"], integer=True, minimum=1)
    sign = _get_number(block, "anisotropy_mu_sign", "hp", +1, integer=True)
    if sign not in (1, -1):
        raise ConfigError("hp.anisotropy_mu_sign: expected 1 or -1")

    params = ModelParams(**model)
    basis = enumerate_boson_sector(params.L, n_max, total_n)
    H = build_hp_hamiltonian(params, basis, anisotropy_mu_sign=sign)
    levels = np.linalg.eigvalsh(H.todense())
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{label}_spectrum.csv"
    lines = ["index,energy"]
    lines += [f"{i},{e:.17g}" for i, e in enumerate(levels)]
    csv_path.write_text("\n".join(lines) + "\n", encoding="ascii")

    crosscheck = None
    if params.D == 0.0:
        crosscheck = one_magnon_crosscheck(params)
    summary = {
        "label": label,
        "task": "hp",
        "params": {k: getattr(params, k) for k in ("L", "two_s", "J0", "theta", "J1", "J2", "h0", "gamma", "D")},
        "total_n": total_n,
        "n_max": n_max,
        "anisotropy_mu_sign": sign,
        "basis_size": basis.size,
        "spectrum_csv": csv_path.name,
        "one_magnon_max_deviation": crosscheck,
    }
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    log.info("hp %s: %d levels, crosscheck=%s", label, basis.size, crosscheck)
    return summary
