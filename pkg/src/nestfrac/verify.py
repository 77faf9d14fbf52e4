"""Verification manifest: every reproduced constant and bound as a named check."""

from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import asymptotics, contour, dp_value, envelope, genpar, jets, trajectory

__all__ = ["Check", "SUITES", "run_suite", "format_manifest", "constants_table"]

E = math.e


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    target: str
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.value:>20.12g}  {self.name} {self.target} {status}"


def _short(x: float) -> str:
    return f"{x:.1g}".replace("e-0", "e-").replace("e+0", "e+")


def near(name: str, value: float, ref: float | str, tol: float) -> Check:
    text = ref if isinstance(ref, str) else f"{ref:.12g}"
    return Check(name, float(value), f"= {text} ± {_short(tol)}", bool(abs(value - float(text)) <= tol))


def below(name: str, value: float, bound: float) -> Check:
    return Check(name, float(value), f"< {bound:g}", bool(value < bound))


def above(name: str, value: float, bound: float) -> Check:
    return Check(name, float(value), f"> {bound:g}", bool(value > bound))


def equals(name: str, value: float, ref: float) -> Check:
    return Check(name, float(value), f"= {ref:g}", bool(value == ref))


# ----- constants ----------------------------------------------------------

REFERENCE = {
    "A": ("1.7046560372", 1e-8),
    "b": ("0.6973885601", 1e-8),
    "t_a": ("1.185591828", 1e-6),
    "t_b": ("1.742084284", 1e-6),
    "t_o": ("1.447847", 1e-5),
    "alpha_inf(t_o)": ("2.673953412", 1e-7),
    "alpha_inf(1)": ("2.815572650", 1e-7),
    "alpha_inf(2)": ("2.815572650", 1e-7),
}


def constants_table(tol: float | None = None) -> list[Check]:
    c = asymptotics.main_constants()
    got = {
        "A": c.A,
        "b": c.b,
        "t_a": c.t_a,
        "t_b": c.t_b,
        "t_o": c.t_o,
        "alpha_inf(t_o)": c.alpha_inf_to,
        "alpha_inf(1)": c.alpha_inf_1,
        "alpha_inf(2)": c.alpha_inf_2,
    }
    return [near(k, got[k], ref, tol if tol is not None else t) for k, (ref, t) in REFERENCE.items()]


def _constants(cfg: "Config") -> list[Check]:
    c = asymptotics.main_constants()
    out = [Check("constants." + ch.name, ch.value, ch.target, ch.passed) for ch in constants_table(cfg.tol)]
    out.append(Check("constants.ordering alpha(t_o) < e < alpha(1)", c.alpha_inf_to, "< e < alpha(1)",
                     c.alpha_inf_to < E < c.alpha_inf_1))
    return out


# ----- identities ---------------------------------------------------------


def _identities(cfg: "Config") -> list[Check]:
    tol = cfg.tol if cfg.tol is not None else 1e-8
    out = []
    tb = asymptotics.main_constants().t_b
    for t in (1.0, 1.2, 1.5, tb, 2.0):
        out.append(below(f"identities.abel residual t={t:.6g}", abs(trajectory.abel_identity_residual(t)), tol))
    c = asymptotics.main_constants()
    out.append(below("identities.|zeta'(t_b)|", abs(c.zeta_prime_tb), tol))
    out.append(near("identities.beta''(p0^2/p0')^2 at t_b", c.a3_identity, E, tol))
    shift = max(max(trajectory.shift_identity_check(n)) for n in range(1, 21))
    out.append(below("identities.shift identities n<=20 (rel)", shift, 1e-9))
    dxe = max(trajectory.dxi_eta_residual(n, t) for n in range(1, 21) for t in (1.0, 1.3, 1.7, 2.0))
    out.append(below("identities.eta'=xi'/xi_prev n<=20 (rel)", dxe, 1e-9))
    xi7 = trajectory.evolve(jets.seed(1.0), 7).xi.d1
    out.append(below("identities.xi7'(1) rational (rel err)", abs(xi7 / (-19661554943536 / 328636389375) - 1), 1e-9))
    return out


# ----- asymptotics --------------------------------------------------------


def thm2_residuals(us: np.ndarray) -> np.ndarray:
    f0 = asymptotics.amgm_envelope(us)
    return us**2 * np.abs(f0 - E * us - 0.5 * E * asymptotics.nearest_int_distance(us) ** 2 / us)


def thm1_residuals(us: np.ndarray) -> np.ndarray:
    c = asymptotics.main_constants()
    out = []
    for u in us:
        x = math.exp(u)
        out.append(u * u * abs(envelope.envelope_value(x).F - c.prediction(x)))
    return np.array(out)


def window_trend(us: np.ndarray, r: np.ndarray, windows: int = 6) -> tuple[np.ndarray, float]:
    """Window maxima of ``r`` and the least-squares slope of those maxima against window centre."""
    parts = np.array_split(np.arange(len(us)), windows)
    peaks = np.array([r[p].max() for p in parts])
    centres = np.array([us[p].mean() for p in parts])
    slope = float(np.polyfit(centres, peaks, 1)[0])
    return peaks, slope


def _asymptotics(cfg: "Config") -> list[Check]:
    tol = cfg.tol if cfg.tol is not None else 1e-8
    out = []
    k = asymptotics.analyze(asymptotics.main_family())
    out.append(near("asymptotics.main a0", k.a0, E, tol))
    out.append(near("asymptotics.main a3", k.a3, E / 2, tol))
    out.append(below("asymptotics.main |a2|", abs(k.a2), 1e-7))
    g = asymptotics.analyze(asymptotics.amgm_family())
    out.append(near("asymptotics.amgm t0", g.t0, 1.0, tol))
    out.append(near("asymptotics.amgm a3", g.a3, E / 2, tol))
    us = np.linspace(15.0, 45.0, 600)
    out.append(below("asymptotics.thm2 max u^2|residual|", float(thm2_residuals(us).max()), 1.0))
    us1 = np.linspace(15.0, 45.0, cfg.desk_points)
    r1 = thm1_residuals(us1)
    peaks, slope = window_trend(us1, r1)
    out.append(below("asymptotics.thm1 max u^2|residual|", float(r1.max()), 3.0))
    out.append(below("asymptotics.thm1 peak growth over range", slope * 30.0, 0.1 * float(peaks.mean())))
    tab = dp_value.dp_sweep(1e4, 16, M=cfg.grid)
    for x in (10.0, 100.0, 1000.0):
        out.append(below(f"asymptotics.|F_dp-F_env| x={x:g}", abs(tab.F(x) - envelope.envelope_value(x).F), 3e-4))
    return out


# ----- envelope and value function ---------------------------------------


def _envelope(cfg: "Config") -> list[Check]:
    rng = random.Random(cfg.seed)
    out = []
    sp = [envelope.special_points(n) for n in range(1, 41)]
    out.append(Check("envelope.t0_n = 1 for n<=6", max(abs(s.t0 - 1) for s in sp[:6]), "= 0", all(s.t0 == 1 for s in sp[:6])))
    t0s = [s.t0 for s in sp[6:]]
    inc = all(1 < a < b < 2 for a, b in zip(t0s, t0s[1:]))
    out.append(Check("envelope.t0_n increasing in (1,2), 7<=n<=40", min(np.diff(t0s)), "> 0", inc))
    out.append(near("envelope.tr_6", sp[5].t_r, 1.9975, 1e-3))
    tb = asymptotics.main_constants().t_b
    dist = [max(abs(s.t_ell - tb), abs(s.t_r - tb)) for s in sp[9:]]
    out.append(Check("envelope.|t_ell,t_r - t_b| decreasing n>=10", dist[-1], "monotone -> 0",
                     all(b < a for a, b in zip(dist, dist[1:]))))
    out.append(below("envelope.n*|t_ell,t_r - t_b| at n=40", 40 * dist[-1], 5.0))
    worst = -math.inf
    for _ in range(150):
        n = rng.choice((8, 12, 20))
        s = envelope.special_points(n)
        x1 = trajectory.evolve(1.0, n).xi
        x = s.X0 + rng.uniform(0.02, 0.98) * (x1 - s.X0)
        tp = envelope.solve_branch(n, x, "plus")
        tm = envelope.solve_branch(n, x, "minus")
        worst = max(worst, trajectory.evolve(tp, n).eta - trajectory.evolve(tm, n).eta)
    out.append(below("envelope.max eta(t+)-eta(t-), 150 samples", worst, 0.0))
    xs = np.geomspace(1e-3, 1e6, 2000)
    nus = [envelope.critical_index(float(x)) for x in xs]
    out.append(Check("envelope.nu nondecreasing (2000 pts)", min(np.diff(nus)), ">= 0", bool(min(np.diff(nus)) >= 0)))
    gap = math.inf
    for _ in range(100):
        n = rng.randint(1, 30)
        t = rng.uniform(1.0, 2.0)
        s = trajectory.evolve(t, n)
        if s.xi - 1 <= 0:
            continue
        gap = min(gap, s.eta - 1 - envelope.envelope_value(s.xi - 1).F)
    out.append(above("envelope.dominance min gap (100 pts)", gap, -1e-9))
    lo_all, hi_all = math.inf, math.inf
    for x in np.geomspace(1.0, 1e4, 200):
        F = envelope.envelope_value(float(x)).F
        lo, hi = dp_value.crude_bounds(float(x))
        lo_all = min(lo_all, F - lo)
        hi_all = min(hi_all, hi - F)
    out.append(above("envelope.crude lower bound margin", lo_all, 0.0))
    out.append(above("envelope.crude upper bound margin", hi_all, 0.0))
    b1 = dp_value.crude_b1_root()
    out.append(near("envelope.crude b1", b1, 1.77, 0.01))
    out.append(near("envelope.crude a1", dp_value.crude_a1(b1), 1.78, 0.01))
    return out


# ----- shifted family -----------------------------------------------------


def _genpar(cfg: "Config") -> list[Check]:
    A = asymptotics.main_constants().A
    out = []
    rows = genpar.tabulate_ap()
    out.append(near("genpar.A(1) from table", rows[-1].z, A, 1e-4))
    out.append(near("genpar.z/x at table start", rows[0].z / rows[0].x, genpar.K0, 1e-2))
    half = genpar.tabulate_ap(x1=0.5e-6)
    out.append(below("genpar.|A(1) change| halving x1", abs(half[-1].z - rows[-1].z), 1e-5))
    out.append(below("genpar.|closed form(1+) - table(1)|", abs(genpar.ap_closed_form(1 + 1e-9) - rows[-1].z), 1e-3))
    zs = np.array([r.z for r in rows])
    out.append(Check("genpar.A increasing along table", float(np.min(np.diff(zs))), "> 0", bool(np.all(np.diff(zs) > 0))))
    lb = min(r.z - genpar.K0 * r.x for r in rows)
    out.append(Check("genpar.A(p) - k0 p along table", lb, ">= 0", lb >= 0))
    curve = genpar.ap_curve()
    for p in (0.1, 0.5):
        out.append(below(f"genpar.|feq residual| p={p}", abs(genpar.feq_residual(p, curve).residual), 1e-3))
    out.append(above("genpar.argmax u at p=1e-3", genpar.feq_residual(1e-3, curve).argmax_u, E - 0.2))
    tabp = dp_value.dp_sweep(2e4, 24, M=cfg.grid, p=2.0)
    us = np.linspace(8.0, 9.5, 31)
    c = asymptotics.fit_intercept(us, [tabp.F(math.exp(u)) for u in us])
    out.append(near("genpar.DP intercept p=2", c, A + E * math.log(2.0), 0.05))
    worst = 0.0
    tab1 = dp_value.dp_sweep(1e3, 20, M=cfg.grid)
    for p in (1.5, 2.0, E):
        tp = dp_value.dp_sweep(1e3 * p, 20, M=cfg.grid, p=p)
        for x in (10.0, 100.0):
            worst = max(worst, abs(tp.F(x) - tab1.F(x / p)))
    out.append(below("genpar.max |F^(p)(x) - F(x/p)|", worst, 1e-4))
    return out


# ----- contour ------------------------------------------------------------


def _contour(cfg: "Config") -> list[Check]:
    out = []
    for g in contour.GROUPS:
        ex = contour.arc_extrema(g)
        amin, xmax = contour.RAW_TABLE[g]
        out.append(above(f"contour.{g} min|alpha4|^1/2", ex.min_sqrt_alpha, amin))
        out.append(below(f"contour.{g} max|xi4|^-1/2", ex.max_inv_sqrt_xi, xmax))
        if g == "Gamma3":
            out.append(near("contour.Gamma3 min|alpha4|^1/2 value", ex.min_sqrt_alpha, 1.853645785, 1e-6))
            out.append(near("contour.Gamma3 max|xi4|^-1/2 value", ex.max_inv_sqrt_xi, 0.04455733765, 1e-6))
    B = contour.integral_B()
    out.append(below("contour.B", B.value, 2.48))
    out.append(below("contour.B quadrature error", B.error, 1e-3))
    budgets = {"Gamma1": 0.008, "Gamma3": 0.03, "Gamma20": 0.54, "Gamma2_rest": 0.68, "Gamma40": 0.54, "Gamma4_rest": 0.68}
    for g, cap in budgets.items():
        out.append(below(f"contour.int_{g} delta*", B.by_group[g], cap))
    out.append(below("contour.B1", contour.integral_B1().value, 4.2))
    m, _ = contour.min_t3_alpha_pp()
    out.append(above("contour.min t^3 alpha4''", m, 2.32))
    out.append(above("contour.min t^3 alpha4'' - 2^1.5 B/pi", m - 2**1.5 / math.pi * B.value, 0.08))
    out.append(below("contour.alpha4'(1)", contour.alpha_derivative(1.0), -0.7))
    out.append(above("contour.alpha4'(2)", contour.alpha_derivative(2.0), 0.48))
    for name, poly in contour.DENOMINATOR_FACTORS.items():
        out.append(equals(f"contour.winding {name}", contour.winding_number(poly), 0))
    return out


@dataclass(frozen=True)
class Config:
    tol: float | None = None
    grid: int = 20_000
    seed: int = 0
    desk_points: int = 300


SUITES: dict[str, Callable[[Config], list[Check]]] = {
    "constants": _constants,
    "identities": _identities,
    "asymptotics": _asymptotics,
    "envelope": _envelope,
    "genpar": _genpar,
    "contour": _contour,
}


def run_suite(name: str, cfg: Config | None = None) -> list[Check]:
    """Run one suite (or ``"all"``); checks come back sorted by name."""
    cfg = cfg or Config()
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise KeyError(f"unknown suite {name!r}")
    with ThreadPoolExecutor(max_workers=len(names)) as pool:
        results = list(pool.map(lambda n: SUITES[n](cfg), names))
    return sorted((c for r in results for c in r), key=lambda c: c.name)


def format_manifest(checks: Iterable[Check]) -> str:
    return "\n".join(c.line() for c in checks)
