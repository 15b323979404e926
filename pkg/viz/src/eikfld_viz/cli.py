"""eikfld-viz: render one figure per invocation from field files."""

from __future__ import annotations

import argparse
import sys

from . import plots


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eikfld-viz", description="figures from EIKFLD01 field files"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("contours", help="overlaid iso-level contours")
    p.add_argument("fields", nargs="+", help="one or more 2D field files")
    p.add_argument("--levels", type=int, default=12)
    p.add_argument("--out", required=True)

    p = sub.add_parser("quiver", help="gradient arrows at interior nodes")
    p.add_argument("grad_x")
    p.add_argument("grad_y")
    p.add_argument("--mask", help="0/1 interior mask field")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("hist", help="value distribution of a field")
    p.add_argument("field")
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--keep-flagged", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("isosurface", help="3D level-set rendering")
    p.add_argument("field")
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--out", required=True)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "contours":
            plots.plot_contours(args.fields, args.out, levels=args.levels)
        elif args.command == "quiver":
            plots.plot_quiver(
                args.grad_x, args.grad_y, args.out,
                mask_path=args.mask, stride=args.stride,
            )
        elif args.command == "hist":
            plots.plot_histogram(
                args.field, args.out, bins=args.bins,
                drop_flagged=not args.keep_flagged,
            )
        elif args.command == "isosurface":
            plots.plot_isosurface(args.field, args.level, args.out)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
