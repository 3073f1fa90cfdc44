"""Panel rendering command.

Usage: plot <panel-spec-file> --out <path>.  Exit code 0 when every panel
rendered, 1 for spec, input, or rendering problems.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .panels import render
from .spec import PanelSpecError, load_panels

log = logging.getLogger("plotkit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render figure panels from simulation CSV/JSON output",
    )
    parser.add_argument("spec", help="panel spec JSON: one panel object or {\"panels\": [...]}")
    parser.add_argument(
        "--out",
        help="output base path for a single panel, or a directory for a multi-panel spec "
        "(.png and .svg are appended)",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parser


def entry(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        panels = load_panels(args.spec)
        multi = len(panels) > 1
        for i, panel in enumerate(panels):
            if args.out and multi:
                if not panel.output:
                    raise PanelSpecError(
                        f"panels[{i}]: multi-panel specs need per-panel output names "
                        "when --out is a directory"
                    )
                base = Path(args.out) / panel.output
            elif args.out:
                base = Path(args.out)
            else:
                base = None
            for path in render(panel, out_base=base):
                print(path)
        return 0
    except (PanelSpecError, FileNotFoundError) as exc:
        log.error("%s", exc)
        return 1
    except Exception:
        log.exception("unexpected failure")
        return 1


if __name__ == "__main__":
    raise SystemExit(entry())
