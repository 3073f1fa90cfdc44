"""Command line front end.

Exit codes: 0 on full success, 2 when a run completed but one or more sweep
points failed (the summary's error manifest has the details), and 1 for
configuration or capacity problems and unexpected errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from importlib import resources
from pathlib import Path

from .errors import CapacityError, ConfigError
from .runner import (
    OUTPUT_ROOT_ENV,
    load_scenario,
    run_dos,
    run_hp,
    run_scaling,
    run_scenario,
    scenario_from_dict,
)

log = logging.getLogger("spinquench")


def _output_root(explicit: str | None) -> Path:
    if explicit:
        return Path(explicit)
    env = os.environ.get(OUTPUT_ROOT_ENV)
    if env:
        return Path(env)
    return Path("runs")


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--out", help="output root (default: $SPINQUENCH_OUT or ./runs)")
    parser.add_argument(
        "--method", choices=["auto", "dense", "krylov"], help="override the propagation method"
    )
    parser.add_argument("--threads", type=int, default=1, help="worker threads for sweep points")
    parser.add_argument(
        "--seed", type=int, default=None,
        help="reserved; every current pipeline is deterministic",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinquench",
        description="Quench dynamics of frustrated spin chains with on-site anisotropy",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (
        ("evolve", "run a scenario file (single point or sweep)"),
        ("sweep", "alias of evolve for sweep-style scenarios"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("scenario", help="path to a scenario JSON file")
        p.add_argument("--label", help="override the output label")
        _add_common(p)

    p = sub.add_parser("dos", help="density of states and spectral diagnostics")
    p.add_argument("scenario", help="path to a scenario JSON file")
    p.add_argument("--label", help="override the output label")
    _add_common(p)

    p = sub.add_parser("scaling", help="participation-entropy scaling across chain lengths")
    p.add_argument("config", help="path to a scaling JSON file")
    p.add_argument("--label", help="override the output label")
    _add_common(p)

    p = sub.add_parser("hp", help="bosonized-chain spectrum and one-deviation crosscheck")
    p.add_argument("config", help="path to an hp JSON file")
    p.add_argument("--label", help="override the output label")
    _add_common(p)

    p = sub.add_parser("presets", help="bundled study definitions")
    psub = p.add_subparsers(dest="presets_command", required=True)
    psub.add_parser("list", help="list bundled presets")
    pr = psub.add_parser("run", help="run one bundled preset")
    pr.add_argument("name", help="preset name (see `spinquench presets list`)")
    pr.add_argument(
        "--full", action="store_true",
        help="apply the preset's publication-scale overrides (slow)",
    )
    _add_common(pr)
    return parser


def _preset_files():
    root = resources.files("spinquench").joinpath("presets")
    return sorted(
        (entry.name[: -len(".json")], entry)
        for entry in root.iterdir()
        if entry.name.endswith(".json")
    )


def _load_preset(name: str) -> dict:
    for preset_name, entry in _preset_files():
        if preset_name == name:
            return json.loads(entry.read_text(encoding="utf-8"))
    available = ", ".join(n for n, _ in _preset_files())
    raise ConfigError(f"unknown preset {name!r} (available: {available})")


def _deep_merge(base, patch):
    if isinstance(base, dict) and isinstance(patch, dict):
        merged = dict(base)
        for k, v in patch.items():
            merged[k] = _deep_merge(base[k], v) if k in base else v
        return merged
    return patch


def _run_preset(name: str, args) -> int:
    doc = _load_preset(name)
    tasks = doc.get("tasks", [])
    if not tasks:
        raise ConfigError(f"preset {name!r} defines no tasks")
    root = _output_root(args.out) / name
    had_errors = False
    for task in tasks:
        kind = task.get("kind")
        task_name = task.get("name", kind)
        config = task.get("config")
        if kind not in ("sweep", "dos", "scaling", "hp") or config is None:
            raise ConfigError(f"preset {name!r}: malformed task {task_name!r}")
        if args.full and "full" in task:
            config = _deep_merge(config, task["full"])
        out_dir = root / task_name
        log.info("preset %s: task %s (%s) -> %s", name, task_name, kind, out_dir)
        if kind == "sweep":
            cfg = scenario_from_dict(config, label=task_name)
            _, errors = run_scenario(
                cfg, out_dir, method_override=args.method, threads=max(1, args.threads)
            )
            had_errors = had_errors or bool(errors)
        elif kind == "dos":
            cfg = scenario_from_dict(config, label=task_name)
            _, errors = run_dos(cfg, out_dir, threads=max(1, args.threads))
            had_errors = had_errors or bool(errors)
        elif kind == "scaling":
            summary = run_scaling(config, out_dir, label=task_name)
            had_errors = had_errors or bool(summary.get("errors"))
        else:
            run_hp(config, out_dir, label=task_name)
    return 2 if had_errors else 0


def _dispatch(args) -> int:
    if args.command == "presets":
        if args.presets_command == "list":
            for name, entry in _preset_files():
                doc = json.loads(entry.read_text(encoding="utf-8"))
                print(f"{name}: {doc.get('description', '')}")
            return 0
        return _run_preset(args.name, args)

    if args.command in ("evolve", "sweep"):
        cfg = load_scenario(args.scenario)
        if args.label:
            cfg.label = args.label
        out_dir = _output_root(args.out) / cfg.label
        _, errors = run_scenario(
            cfg, out_dir, method_override=args.method, threads=max(1, args.threads)
        )
        print(out_dir / "summary.json")
        return 2 if errors else 0

    if args.command == "dos":
        cfg = load_scenario(args.scenario)
        if args.label:
            cfg.label = args.label
        out_dir = _output_root(args.out) / cfg.label
        _, errors = run_dos(cfg, out_dir)
        print(out_dir / "summary.json")
        return 2 if errors else 0

    if args.command == "scaling":
        path = Path(args.config)
        raw = json.loads(path.read_text(encoding="utf-8"))
        label = args.label or path.stem
        out_dir = _output_root(args.out) / label
        summary = run_scaling(raw, out_dir, label=label)
        print(out_dir / "summary.json")
        return 2 if summary.get("errors") else 0

    if args.command == "hp":
        path = Path(args.config)
        raw = json.loads(path.read_text(encoding="utf-8"))
        label = args.label or path.stem
        out_dir = _output_root(args.out) / label
        run_hp(raw, out_dir, label=label)
        print(out_dir / "summary.json")
        return 0

    raise ConfigError(f"unknown command {args.command!r}")


def entry(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _dispatch(args)
    except (ConfigError, CapacityError, FileNotFoundError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return 1
    except Exception:
        log.exception("unexpected failure")
        return 1


if __name__ == "__main__":
    raise SystemExit(entry())
