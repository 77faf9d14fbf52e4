"""Command-line interface: ``nestfrac eval|constants|emit|tabulate-ap|verify``."""

from __future__ import annotations

import argparse
import csv
import math
import sys
import warnings
from typing import Iterable, Sequence

import numpy as np

from . import asymptotics, dp_value, envelope, genpar, trajectory, verify

E = math.e
FIGURES = ("f0corr", "f1corr", "alpha", "curves", "ap", "envelope", "dp")


class UsageError(ValueError):
    pass


def parse_n_range(text: str) -> range:
    try:
        lo, hi = (int(v) for v in text.split(".."))
    except ValueError:
        raise UsageError(f"--n-range expects LO..HI, got {text!r}") from None
    if not 1 <= lo <= hi:
        raise UsageError(f"--n-range needs 1 <= LO <= HI, got {text!r}")
    return range(lo, hi + 1)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[float]]) -> int:
    count = 0
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
                count += 1
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return count


# ----- figure data ---------------------------------------------------------


def rows_f0corr():
    us = np.linspace(2.0, 40.0, 761)
    f0 = asymptotics.amgm_envelope(us)
    corr = 0.5 * E * asymptotics.nearest_int_distance(us) ** 2 / us
    return ("u", "F0_minus_eu", "correction"), zip(us, f0 - E * us, corr)


def rows_f1corr():
    c = asymptotics.main_constants()
    us = np.linspace(2.0, 20.0, 181)
    out = []
    for u in us:
        F = envelope.envelope_value(math.exp(u)).F
        pred = -c.A + 0.5 * E * asymptotics.nearest_int_distance(u + c.b) ** 2 / u
        out.append((u, F - E * u, pred))
    return ("u", "F_minus_eu", "predicted"), out


def rows_alpha():
    out = []
    for t in np.linspace(1.0, 2.0, 501):
        s = trajectory.real_jet_series(float(t))
        out.append((t, s.alpha_inf.v, s.phi.v, s.psi.v))
    return ("t", "alpha_inf", "phi", "psi"), out


def rows_curves(n_range: range):
    out = []
    ts = np.linspace(1.0, 2.0, 401)
    for n in n_range:
        s = trajectory.evolve(ts, n)
        lx = np.log(s.xi)
        out.extend((n, t, a, b) for t, a, b in zip(ts, lx, s.eta - E * lx))
    return ("n", "t", "log_xi", "eta_minus_e_log_xi"), out


def rows_ap(x1: float):
    rows = [(r.x, r.y, r.z) for r in genpar.tabulate_ap(x1)]
    rows += [(p, E / p, genpar.ap_closed_form(float(p))) for p in np.linspace(1.05, 3.0, 40)]
    return ("p", "A_prime", "A"), rows


def rows_envelope():
    out = []
    for x in np.geomspace(1e-2, 1e6, 401):
        pt = envelope.envelope_value(float(x))
        out.append((x, pt.F, pt.n, pt.t))
    return ("x", "F", "nu", "t"), out


def figure_rows(name: str, args):
    if name == "f0corr":
        return rows_f0corr()
    if name == "f1corr":
        return rows_f1corr()
    if name == "alpha":
        return rows_alpha()
    if name == "curves":
        return rows_curves(parse_n_range(args.n_range))
    if name == "ap":
        return rows_ap(args.x1)
    if name == "envelope":
        return rows_envelope()
    raise UsageError(f"unknown figure {name!r}")


# ----- commands ------------------------------------------------------------


def dp_value_at(x: float, p: float, grid: int) -> tuple[float, int]:
    """``F^(p)(x)`` from a DP table deep enough for ``x``; also the best level."""
    levels = min(200, 10 + 4 * math.ceil(math.log1p(x / p)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", dp_value.GridBoundaryWarning)
        tab = dp_value.dp_sweep(max(2.0, 2.0 * x), levels, M=grid, p=p)
    vals = [tab.F_n(n, x) for n in range(1, levels + 1)]
    k = int(np.argmin(vals))
    return vals[k], k + 1


def cmd_eval(args) -> int:
    x, p = args.x, args.p
    if not (x > 0 and p > 0):
        raise UsageError("eval needs x > 0 and p > 0")
    if p < 1:
        F, n = dp_value_at(x, p, args.grid)
        print(f"F={F:.6f} n={n} method=dp grid={args.grid}")
        return 0
    pt = envelope.envelope_value(x / p)
    method = "envelope" if p == 1 else "scaled-envelope"
    print(f"F={pt.F:.6f} n={pt.n} t={pt.t:.12g} method={method}")
    if p == 1 and x > 1:
        u = math.log(x)
        pred = asymptotics.main_constants().prediction(x)
        print(f"prediction={pred:.10f} residual_u2={abs(pt.F - pred) * u * u:.6g}")
    return 0


def cmd_constants(args) -> int:
    checks = verify.constants_table(args.tol)
    for c in checks:
        print(c.line())
    return 0 if all(c.passed for c in checks) else 1


def cmd_emit(args) -> int:
    if args.figure == "dp":
        tab = dp_value.dp_sweep(1e4, 16, M=args.grid, p=args.p)
        tab.to_csv(args.out)
        print(f"wrote {tab.n_max * tab.grid.size} rows to {args.out}")
        return 0
    header, rows = figure_rows(args.figure, args)
    count = write_csv(args.out, header, rows)
    print(f"wrote {count} rows to {args.out}")
    return 0


def cmd_tabulate_ap(args) -> int:
    rows = genpar.tabulate_ap(args.x1, max_steps=args.max_steps, land_on=None if args.plain else 1.0)
    if args.out:
        genpar.write_ap_csv(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        print("p,A_prime,A")
        for r in rows:
            print(f"{r.x!r},{r.y!r},{r.z!r}")
    return 0


def cmd_verify(args) -> int:
    cfg = verify.Config(tol=args.tol, grid=args.grid, seed=args.seed)
    checks = verify.run_suite(args.suite, cfg)
    print(verify.format_manifest(checks))
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    def positive(kind):
        def conv(text):
            v = kind(text)
            if not v > 0:
                raise argparse.ArgumentTypeError(f"{text} is not positive")
            return v

        return conv

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=positive(float), default=None, help="override equality tolerances")
    common.add_argument("--grid", type=positive(int), default=20_000, help="DP grid size")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")

    ap = argparse.ArgumentParser(prog="nestfrac", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="evaluate F^(p)(x)")
    e.add_argument("x", type=float)
    e.add_argument("--p", type=float, default=1.0)
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("constants", parents=[common], help="print the constants table")
    c.set_defaults(func=cmd_constants)

    m = sub.add_parser("emit", parents=[common], help="write figure data as CSV")
    m.add_argument("figure", choices=FIGURES)
    m.add_argument("--out", required=True)
    m.add_argument("--n-range", default="30..32")
    m.add_argument("--p", type=positive(float), default=1.0)
    m.add_argument("--x1", type=positive(float), default=1e-6)
    m.set_defaults(func=cmd_emit)

    t = sub.add_parser("tabulate-ap", parents=[common], help="tabulate (p, A'(p), A(p)) for p <= 1")
    t.add_argument("--x1", type=positive(float), default=1e-6)
    t.add_argument("--max-steps", type=positive(int), default=200)
    t.add_argument("--plain", action="store_true", help="run from x1 without landing on p = 1")
    t.add_argument("--out")
    t.set_defaults(func=cmd_tabulate_ap)

    v = sub.add_parser("verify", parents=[common], help="run the verification manifest")
    v.add_argument("suite", nargs="?", default="all", choices=("all", *verify.SUITES))
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
