"""Command-line front end.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import re
import sys
from dataclasses import replace

from . import __version__
from .bench import (TABLE2_PAIRS, BenchConfig, TrialFailure, TruncationConfig,
                    figure_data, run_benchmark, run_truncation_table)
from .kernel import BandParams, InvalidParams, PastSignal
from .extrapolate import extrapolate, extrapolate_highband
from .solver import NearSingular

EXIT_USAGE = 2
EXIT_NUMERIC = 3

_PI_EXPR = re.compile(r"^\s*(?:([0-9.eE+-]+)\s*\*?\s*)?pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_angle(text: str) -> float:
    """Parse a float or a multiple of pi such as ``pi/2`` or ``3*pi/4``."""
    m = _PI_EXPR.match(text.lower())
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number or multiple of pi: {text!r}") from None


def parse_pairs(text: str):
    pairs = []
    for item in text.split(","):
        try:
            a, b = item.split(":")
            pairs.append((int(a), int(b)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad pair {item!r}; expected N1:N2") from None
    return pairs


def read_signal(path):
    values = []
    handle = sys.stdin if path == "-" else open(path, newline="")
    with handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 1:
                raise UsageError(f"{path}: row {lineno}: expected one column, got {len(row)}")
            try:
                v = float(row[0])
            except ValueError:
                raise UsageError(f"{path}: row {lineno}: not a number: {row[0]!r}") from None
            if not math.isfinite(v):
                raise UsageError(f"{path}: row {lineno}: non-finite value {row[0]!r}")
            values.append(v)
    if not values:
        raise UsageError(f"{path}: no data rows")
    return values


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def write_table(out, header, fieldnames, rows):
    buf = io.StringIO()
    buf.write(f"# bandext {__version__}\n")
    for key, val in header.items():
        buf.write(f"# {key}: {val}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fieldnames)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as f:
            f.write(text)


def cmd_extrapolate(args):
    values = read_signal(args.input)
    n_trunc = args.n_trunc if args.n_trunc is not None else max(1, len(values) - 1)
    p = BandParams(omega=args.omega, rho=args.rho, n_trunc=n_trunc, horizon=args.horizon)
    fn = extrapolate_highband if args.highband else extrapolate
    ext = fn(PastSignal(values), p, method=args.method, depth=args.depth,
             allow_unregularized=args.allow_unregularized)
    d = ext.diagnostics
    header = {
        "command": "extrapolate",
        "input": args.input,
        "omega": repr(p.omega),
        "rho": repr(p.rho),
        "n_trunc": p.n_trunc,
        "horizon": p.horizon,
        "highband": args.highband,
        "method": d.method,
        "residual_norm": repr(d.residual_norm),
        "condition_estimate": repr(d.condition_estimate),
    }
    rows = [(t, v) for t, v in enumerate(ext.forecast, start=1)]
    write_table(args.out, header, ["t", "forecast"], rows)


def cmd_bench(args):
    overrides = {k: v for k, v in (("nu", args.nu), ("omega", args.omega), ("n_trunc", args.n_trunc))
                 if v is not None}
    if args.panel:
        cfg = BenchConfig.panel(args.panel, **overrides)
    else:
        missing = [f"--{k.replace('_', '-')}" for k in ("nu", "omega", "n_trunc") if k not in overrides]
        if missing:
            raise UsageError(f"bench needs --panel or explicit {', '.join(missing)}")
        cfg = BenchConfig(**overrides)
    cfg = replace(cfg, rho=args.rho, window=args.window, seed=args.seed)
    table, _ = run_benchmark(cfg, args.trials, jobs=args.jobs)
    header = {"command": "bench", "panel": args.panel or "custom", "nu": cfg.nu,
              "omega": repr(cfg.omega), "n_trunc": cfg.n_trunc, "rho": repr(cfg.rho),
              "window": cfg.window, "seed": cfg.seed, "trials": args.trials,
              "switch_prob": repr(cfg.switch_prob)}
    fields = ["L", "e_bl/e_1", "e_bl/e_2", "e_bl/e_3", "mean_e_bl", "se_e_bl",
              "mean_e_1", "se_e_1", "mean_e_2", "se_e_2", "mean_e_3", "se_e_3"]
    rows = []
    for l, r in table.rows.items():
        tail = []
        for m, s in zip(r.mean_spline, r.se_spline):
            tail += [m, s]
        rows.append([l, *r.ratios, r.mean_bl, r.se_bl, *tail])
    write_table(args.out, header, fields, rows)


def cmd_truncation(args):
    cfg = TruncationConfig(nu=args.nu, omega=args.omega, rho=args.rho, horizon=args.horizon,
                           seed=args.seed)
    try:
        rows = run_truncation_table(cfg, args.pairs, args.trials, jobs=args.jobs,
                                    allow_equal=args.allow_equal_pairs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    header = {"command": "truncation", "nu": cfg.nu, "omega": repr(cfg.omega),
              "rho": repr(cfg.rho), "horizon": cfg.horizon, "seed": cfg.seed,
              "trials": args.trials,
              "pairs": ",".join(f"{a}:{b}" for a, b in args.pairs)}
    write_table(args.out, header, ["N1", "N2", "E", "se"],
                [(r.n1, r.n2, r.mean, r.se) for r in rows])


def cmd_figure(args):
    try:
        params, cols = figure_data(args.figure, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    header = {"command": "figure", "figure": args.figure}
    header.update({k: (repr(v) if isinstance(v, float) else v) for k, v in params.items()})
    if args.figure == 2:
        header["note"] = "caption rho=0.4 used; the text around figures 1-2 states rho=0.2"
    names = list(cols)
    write_table(args.out, header, names, zip(*(cols[k] for k in names)))


def build_parser():
    parser = _Parser(prog="bandext", description="Band-limited extrapolation of one-sided sequences.")
    parser.add_argument("--version", action="version", version=f"bandext {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extrapolate", help="forecast a one-column CSV (oldest first, last row t=0)")
    p.add_argument("input", help="CSV path or - for stdin")
    p.add_argument("--omega", type=parse_angle, required=True, help="band edge in (0, pi), e.g. pi/2")
    p.add_argument("--rho", type=float, default=0.4)
    p.add_argument("--n-trunc", type=int, default=None, help="truncation horizon N (default: all rows)")
    p.add_argument("--horizon", type=int, required=True, help="forecast horizon L")
    p.add_argument("--highband", action="store_true", help="use the band around +-pi")
    p.add_argument("--method", choices=("direct", "neumann"), default="direct")
    p.add_argument("--depth", type=int, default=200, help="Neumann series depth")
    p.add_argument("--allow-unregularized", action="store_true",
                   help="solve with rho=0 even when ill-conditioned")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_extrapolate)

    p = sub.add_parser("bench", help="Monte-Carlo comparison with spline extrapolation")
    p.add_argument("--panel", choices=("a", "b"))
    p.add_argument("--nu", type=int)
    p.add_argument("--omega", type=parse_angle)
    p.add_argument("--n-trunc", type=int)
    p.add_argument("--rho", type=float, default=0.4)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("truncation", help="impact of the truncation horizon")
    p.add_argument("--pairs", type=parse_pairs, default=list(TABLE2_PAIRS))
    p.add_argument("--nu", type=int, default=8)
    p.add_argument("--omega", type=parse_angle, default=math.pi / 2)
    p.add_argument("--rho", type=float, default=0.4)
    p.add_argument("--horizon", type=int, default=12)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="-")
    p.add_argument("--allow-equal-pairs", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_truncation)

    p = sub.add_parser("figure", help="curves for the example figures as CSV")
    p.add_argument("--figure", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("trials", "jobs"):
        if getattr(args, name, 1) < 1:
            parser.error(f"--{name} must be >= 1")
    try:
        args.func(args)
    except (UsageError, InvalidParams, OSError) as exc:
        print(f"bandext: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NearSingular as exc:
        print(f"bandext: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TrialFailure as exc:
        print(f"bandext: numerical failure: {exc} (replay with the same --seed)", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
