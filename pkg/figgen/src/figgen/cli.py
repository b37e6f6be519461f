"""Command-line interface: figgen shapes|error|commands.

Exit code 0 on success, 2 for usage, file, or schema problems.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .plots import FigureSpec, SchemaError, plot_commands, plot_error, plot_shapes

_PLOTTERS = {
    "shapes": plot_shapes,
    "error": plot_error,
    "commands": plot_commands,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figgen",
        description="Render figures from rodservo run logs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "shapes": "shape-evolution snapshots from a run's centerline dump",
        "error": "deformation-error curve, one line per log",
        "commands": "velocity-command traces, three subplots",
    }
    for name in _PLOTTERS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--log", action="append", required=True, metavar="PATH",
                       help="step-log CSV (repeatable)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--stride", type=int, default=3,
                       help="draw every stride-th step (shapes only)")
        p.add_argument("--format", choices=("png", "svg"), default="png",
                       dest="image_format", help="image format")
        p.add_argument("--quiet", action="store_true")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        spec = FigureSpec(
            log_paths=tuple(args.log),
            out_dir=args.out,
            stride=args.stride,
            image_format=args.image_format,
        )
        path = _PLOTTERS[args.command](spec)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"figgen {args.command}: error: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
