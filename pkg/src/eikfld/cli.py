"""Command-line interface.

One process per command; exit code 0 on success, 2 on validation failures
with a single-line ``error: ...`` diagnostic on stderr. Outputs are
deterministic given identical flags and seed. ``--config file.json``
supplies defaults whose keys mirror the long flag names (dashes as
underscores); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import fieldio
from .distance import clamp_nonnegative, r_exact, s_direct, s_fft
from .derivatives import gradient, gradient_magnitude, hessian_2d
from .errors import PrecisionError, ValidationError
from .experiments import EXPERIMENT_NAMES, run_experiment
from .grid import Curve2D, GridSpec, load_mesh, load_points_csv, snap_points
from .precision import PrecisionConfig, native_tau_floor
from .sign import DEGREE_3D, WINDING_2D, classify, degree_field, signed_distance, winding_field
from .sweeping import fast_sweep


class _Parser(argparse.ArgumentParser):
    """argparse with single-line diagnostics instead of usage dumps."""

    def error(self, message):
        raise ValidationError(message)


def _require(args, *names):
    for name in names:
        if getattr(args, name.replace("-", "_"), None) is None:
            raise ValidationError(f"--{name} is required")


def _floats(text: str):
    return tuple(float(v) for v in text.split(","))


def _ints(text: str):
    return tuple(int(v) for v in text.split(","))


def _grid_from_args(args) -> GridSpec:
    if args.min is None:
        raise ValidationError("--min is required")
    lo = _floats(args.min)
    if args.counts is not None:
        counts = _ints(args.counts)
        if args.spacing is None:
            if args.max is None:
                raise ValidationError("--counts needs --spacing or --max")
            hi = _floats(args.max)
            spacing = (hi[0] - lo[0]) / (counts[0] - 1)
        else:
            spacing = args.spacing
        return GridSpec(origin=lo, spacing=spacing, counts=counts)
    if args.max is None or args.spacing is None:
        raise ValidationError("grid needs --min plus --counts or --max/--spacing")
    hi = _floats(args.max)
    counts = tuple(
        int(round((h - l) / args.spacing)) + 1 for l, h in zip(lo, hi)
    )
    return GridSpec(origin=lo, spacing=args.spacing, counts=counts)


def _precision(args, tau: float) -> PrecisionConfig:
    return PrecisionConfig.parse(getattr(args, "precision", "f64"), tau)


def _warn_tau_floor(cfg: PrecisionConfig, grid: GridSpec):
    if not cfg.is_bigfloat:
        floor = native_tau_floor(grid.diagonal)
        if cfg.tau < floor:
            print(
                f"warning: tau={cfg.tau:g} is below the native64 floor "
                f"{floor:g} for this grid; expect underflow, use --precision "
                "big:<bits>",
                file=sys.stderr,
            )


def _add_grid_flags(p):
    p.add_argument("--min", help="grid lower corner, comma-separated")
    p.add_argument("--max", help="grid upper corner, comma-separated")
    p.add_argument("--spacing", type=float, help="uniform node spacing h")
    p.add_argument("--counts", help="node counts per axis, comma-separated")


def _add_common(p):
    p.add_argument("--precision", default="f64", help="f64 or big:<bits>")
    p.add_argument("--threads", type=int, default=1, help="cap internal parallelism")
    p.add_argument("--config", help="JSON file whose keys mirror the flags")


def cmd_dt(args) -> int:
    _require(args, "points", "tau", "out")
    grid = _grid_from_args(args)
    cfg = _precision(args, args.tau)
    points = load_points_csv(args.points)
    ps = snap_points(points, grid)
    if args.method == "exact":
        field = r_exact(ps.points, grid)
        name = "R"
    elif args.method == "sweep":
        iters = args.iterations or (10 if grid.dim == 2 else 15)
        field = fast_sweep(ps, grid, iterations=iters)
        name = "R_sweep"
    elif args.method == "direct":
        field = s_direct(ps, grid, cfg)
        name = "S"
    elif args.method == "fft":
        _warn_tau_floor(cfg, grid)
        field = s_fft(ps, grid, cfg)
        name = "S"
    else:
        raise ValidationError(f"unknown method {args.method!r}")
    if args.clamp_nonneg:
        field = clamp_nonnegative(field)
    params = {
        "method": args.method,
        "points_file": args.points,
        "num_points": int(ps.size),
        "clamp_nonneg": bool(args.clamp_nonneg),
    }
    fieldio.write_field(args.out, field, name, cfg, params)
    if args.csv:
        fieldio.write_csv(args.csv, field)
    return 0


def cmd_grad(args) -> int:
    _require(args, "points", "tau", "out-prefix")
    grid = _grid_from_args(args)
    cfg = _precision(args, args.tau)
    ps = snap_points(load_points_csv(args.points), grid)
    if args.method == "fft":
        _warn_tau_floor(cfg, grid)
    vec = gradient(ps, grid, cfg, method=args.method)
    names = ["S_x", "S_y", "S_z"][: grid.dim]
    params = {"method": args.method, "points_file": args.points}
    for name, comp in zip(names, vec.components):
        fieldio.write_field(f"{args.out_prefix}{name}.fld", comp, name, cfg, params)
    if args.with_magnitude:
        mag = gradient_magnitude(vec)
        fieldio.write_field(
            f"{args.out_prefix}grad_mag.fld", mag, "grad_mag", cfg, params
        )
    return 0


def cmd_hessian(args) -> int:
    _require(args, "points", "tau", "out-prefix")
    grid = _grid_from_args(args)
    cfg = _precision(args, args.tau)
    ps = snap_points(load_points_csv(args.points), grid)
    if args.method == "fft":
        _warn_tau_floor(cfg, grid)
    sxx, syy, sxy = hessian_2d(ps, grid, cfg, method=args.method)
    params = {"method": args.method, "points_file": args.points}
    for name, fld in (("S_xx", sxx), ("S_yy", syy), ("S_xy", sxy)):
        fieldio.write_field(f"{args.out_prefix}{name}.fld", fld, name, cfg, params)
    return 0


def cmd_sign(args) -> int:
    grid = _grid_from_args(args)
    cfg = _precision(args, 1.0)
    if (args.curve is None) == (args.mesh is None):
        raise ValidationError("exactly one of --curve or --mesh is required")
    if args.curve is not None:
        curve = Curve2D(load_points_csv(args.curve))
        mu = winding_field(curve, grid, cfg)
        mode = WINDING_2D
        source = args.curve
    else:
        mesh = load_mesh(args.mesh)
        mu = degree_field(mesh, grid, cfg)
        mode = DEGREE_3D
        source = args.mesh
    mask = classify(mu, mode, threshold=args.threshold)
    params = {"geometry": source, "mode": mode, "threshold": args.threshold}
    fieldio.write_field(args.mu_out, mu, "mu", cfg, params)
    fieldio.write_field(args.mask_out, mask, "mask", cfg, params)
    if args.mask_csv:
        fieldio.write_csv(args.mask_csv, mask)
    if args.distance_field:
        _, s = fieldio.read_field(args.distance_field)
        signed = signed_distance(s, mask)
        fieldio.write_field(
            args.signed_out or "signed_S.fld", signed, "signed_S", cfg, params
        )
    return 0


def cmd_experiment(args) -> int:
    kwargs = {"seed": args.seed, "threads": args.threads}
    if args.name in ("example1", "example2"):
        if args.trials is not None:
            kwargs["trials"] = args.trials
        kwargs["method"] = args.method
        if args.method == "fft":
            cfg = PrecisionConfig.parse(args.precision, 1.0)
            if cfg.is_bigfloat:
                kwargs["precision_bits"] = cfg.bits
    elif args.name == "example3" and args.trials is not None:
        kwargs["shapes"] = args.trials
    report = run_experiment(args.name, **kwargs)
    report.write(args.out)
    return 0


def cmd_info(args) -> int:
    header = fieldio.read_header(args.path)
    json.dump(header, sys.stdout, sort_keys=True, indent=2)
    sys.stdout.write("\n")
    return 0


def _apply_config_defaults(parsers, argv):
    """Pre-scan for --config and inject its values as defaults everywhere."""
    if "--config" not in argv:
        return
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise ValidationError("--config needs a file path")
    with open(argv[idx + 1], "r", encoding="utf-8") as fh:
        values = json.load(fh)
    if not isinstance(values, dict):
        raise ValidationError("--config must hold a JSON object")
    defaults = {k.replace("-", "_"): v for k, v in values.items()}
    for parser in parsers:
        parser.set_defaults(**defaults)


def build_parser():
    parser = _Parser(
        prog="eikfld",
        description="approximate signed distance fields via FFT convolutions",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    parsers = [parser]

    p = sub.add_parser("dt", help="distance transform of a point set")
    parsers.append(p)
    p.add_argument("--points", help="CSV point file")
    _add_grid_flags(p)
    p.add_argument("--tau", type=float)
    p.add_argument(
        "--method", default="fft", choices=["fft", "direct", "exact", "sweep"]
    )
    p.add_argument("--iterations", type=int, help="sweep iterations")
    p.add_argument("--clamp-nonneg", action="store_true")
    p.add_argument("--out", help="output field file")
    p.add_argument("--csv", help="also export values as CSV")
    _add_common(p)
    p.set_defaults(func=cmd_dt)

    p = sub.add_parser("grad", help="gradient fields of the distance")
    parsers.append(p)
    p.add_argument("--points")
    _add_grid_flags(p)
    p.add_argument("--tau", type=float)
    p.add_argument("--method", default="fft", choices=["fft", "direct"])
    p.add_argument("--with-magnitude", action="store_true")
    p.add_argument("--out-prefix")
    _add_common(p)
    p.set_defaults(func=cmd_grad)

    p = sub.add_parser("hessian", help="2D second-derivative fields")
    parsers.append(p)
    p.add_argument("--points")
    _add_grid_flags(p)
    p.add_argument("--tau", type=float)
    p.add_argument("--method", default="fft", choices=["fft", "direct"])
    p.add_argument("--out-prefix")
    _add_common(p)
    p.set_defaults(func=cmd_hessian)

    p = sub.add_parser("sign", help="winding/degree field and interior mask")
    parsers.append(p)
    p.add_argument("--curve", help="2D closed curve CSV")
    p.add_argument("--mesh", help="3D mesh (CSV soup or OBJ subset)")
    _add_grid_flags(p)
    p.add_argument("--threshold", type=float, help="override the rounding rule")
    p.add_argument("--mu-out", default="mu.fld")
    p.add_argument("--mask-out", default="mask.fld")
    p.add_argument("--mask-csv")
    p.add_argument("--distance-field", help="unsigned S field to sign")
    p.add_argument("--signed-out")
    _add_common(p)
    p.set_defaults(func=cmd_sign)

    p = sub.add_parser("experiment", help="run a named protocol")
    parsers.append(p)
    p.add_argument("name", choices=list(EXPERIMENT_NAMES))
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", default="direct", choices=["direct", "fft"])
    p.add_argument("--out", default="-", help="report prefix, or - for stdout")
    _add_common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("info", help="print a field file's JSON header")
    parsers.append(p)
    p.add_argument("path")
    p.set_defaults(func=cmd_info)

    return parser, parsers


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, parsers = build_parser()
    try:
        _apply_config_defaults(parsers, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except (ValidationError, PrecisionError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
