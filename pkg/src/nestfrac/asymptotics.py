"""Asymptotic expansion of lower envelopes of families of curves.

A family assigns to every integer ``n`` a curve ``t -> (u, y)`` with

    u = p0(t) n + q0(t) + r0(t)/n + ...
    y = p1(t) n + q1(t) + r1(t)/n + ...

Its lower envelope ``f(u) = min {y : u_n(t) = u}`` behaves like

    f(u) = a0 u + a1 + (a2 + a3 <(u - q0(t0)) / p0(t0) + h>^2) / u + O(u^-2)

where ``<.>`` is the distance to the nearest integer and ``t0`` minimises
``beta = p1 / p0``.  The phase shift ``h = p0' zeta' / (b2 p0^2)``, with
``zeta = q1 - b0 q0``, comes from the O(1/u) drift of the optimal parameter
away from ``t0``; it vanishes when ``zeta'(t0) = 0``, as in both instances
below.  :func:`analyze` computes the coefficients from jets of the
six coefficient functions; :func:`brute_force_envelope` is an independent
oracle that intersects the actual curves.

Two instances are provided: the arithmetic-geometric family (``u = n t``,
``y = n e^t``) and the main family coming from the nested recurrence with
``u = log xi_n``, whose coefficients give the constants ``A`` and ``b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import jets
from .jets import Jet2, const
from .roots import RootNotBracketed, safe_newton
from .trajectory import evolve, real_jet_series

__all__ = [
    "FamilyError",
    "NoInteriorMinimumError",
    "DegenerateMinimumError",
    "FamilySpec",
    "AsymptoticCoeffs",
    "MainConstants",
    "nearest_int_distance",
    "analyze",
    "predict",
    "brute_force_envelope",
    "amgm_family",
    "amgm_envelope",
    "main_family",
    "main_constants",
    "find_to",
    "find_ta_tb",
]

E = math.e
GRID_POINTS = 201

Coeff = Callable[[Jet2], Jet2]


def _zero(t: Jet2) -> Jet2:
    return const(0.0)


class FamilyError(ValueError):
    """The family violates the positivity or monotonicity hypotheses."""


class NoInteriorMinimumError(FamilyError):
    """``beta`` has no interior minimum on the parameter interval."""


class DegenerateMinimumError(FamilyError):
    """The minimum of ``beta`` is not quadratic."""


@dataclass(frozen=True)
class FamilySpec:
    """Coefficient functions of a family on the interval ``I``.

    ``curve(n, t) -> (u, y)``, when given, evaluates the exact curves for the
    brute-force oracle.
    """

    p0: Coeff
    p1: Coeff
    interval: tuple[float, float]
    q0: Coeff = _zero
    r0: Coeff = _zero
    q1: Coeff = _zero
    r1: Coeff = _zero
    curve: Callable[[int, float], tuple[float, float]] | None = field(default=None, compare=False)
    name: str = "family"

    def beta(self, t: float) -> Jet2:
        s = jets.seed(float(t))
        return self.p1(s) / self.p0(s)


@dataclass(frozen=True)
class AsymptoticCoeffs:
    t0: float
    b0: float
    b2: float
    a0: float
    a1: float
    a2: float
    a3: float
    delta0: float
    q0_t0: float
    p0_t0: float
    phase_shift: float = 0.0

    @property
    def phase(self) -> float:
        """Offset: the correction vanishes where ``u/p0(t0) + phase`` is an integer."""
        return -self.q0_t0 / self.p0_t0 + self.phase_shift


def nearest_int_distance(x):
    """``|x - round(x)|`` with ties to even; exactly 0.5 at half-integers."""
    x = np.asarray(x, dtype=float)
    d = np.abs(x - np.rint(x))
    d = np.clip(d, 0.0, 0.5)
    return float(d) if d.ndim == 0 else d


def _check_hypotheses(fam: FamilySpec) -> None:
    lo, hi = fam.interval
    for t in np.linspace(lo, hi, GRID_POINTS):
        s = jets.seed(float(t))
        p0, p1 = fam.p0(s), fam.p1(s)
        if not p0.v > 0:
            raise FamilyError(f"p0({t:.6g}) = {p0.v:.6g} is not positive")
        if not p1.v > 0:
            raise FamilyError(f"p1({t:.6g}) = {p1.v:.6g} is not positive")
        if not p0.d1 > 0:
            raise FamilyError(f"p0'({t:.6g}) = {p0.d1:.6g} is not positive")


def _beta_minimum(fam: FamilySpec) -> float:
    lo, hi = fam.interval
    ts = np.linspace(lo, hi, GRID_POINTS)
    d = np.array([fam.beta(t).d1 for t in ts])
    changes = [i for i in range(len(ts) - 1) if d[i] < 0 <= d[i + 1]]
    others = [i for i in range(len(ts) - 1) if d[i] >= 0 > d[i + 1]]
    if not changes:
        where = "left" if d[0] >= 0 else "right"
        raise NoInteriorMinimumError(f"beta is monotone on {fam.interval}; minimum at the {where} end")
    if len(changes) > 1 or others:
        raise NoInteriorMinimumError("beta' changes sign more than once; the minimum is not unique")
    i = changes[0]

    def fdf(t):
        b = fam.beta(t)
        return b.d1, b.d2

    return safe_newton(fdf, float(ts[i]), float(ts[i + 1]))


def analyze(fam: FamilySpec) -> AsymptoticCoeffs:
    """Envelope coefficients of ``fam``."""
    _check_hypotheses(fam)
    t0 = _beta_minimum(fam)
    s = jets.seed(t0)
    p0, q0, r0 = fam.p0(s), fam.q0(s), fam.r0(s)
    p1, q1, r1 = fam.p1(s), fam.q1(s), fam.r1(s)
    beta = p1 / p0
    b0, b2 = beta.v, beta.d2
    if not b2 > 1e-10:
        raise DegenerateMinimumError(f"beta''(t0) = {b2:.3g}")
    delta0 = p0.v * r1.v - p1.v * r0.v
    dq = q1.d1 - b0 * q0.d1
    a2 = -dq * dq / (2 * b2) + delta0
    a3 = 0.5 * b2 * (p0.v * p0.v / p0.d1) ** 2
    shift = p0.d1 * (q1.d1 - b0 * q0.d1) / (b2 * p0.v * p0.v)
    return AsymptoticCoeffs(
        t0=t0,
        b0=b0,
        b2=b2,
        a0=b0,
        a1=q1.v - b0 * q0.v,
        a2=a2,
        a3=a3,
        delta0=delta0,
        q0_t0=q0.v,
        p0_t0=p0.v,
        phase_shift=shift,
    )


def predict(c: AsymptoticCoeffs, u, drift: bool = True):
    """``a0 u + a1 + (a2 + a3 <(u - q0)/p0 + h>^2) / u``.

    ``drift=False`` drops the phase shift ``h``, which leaves an O(1/u) error
    whenever ``h`` is nonzero.
    """
    u = np.asarray(u, dtype=float)
    h = c.phase_shift if drift else 0.0
    frac = nearest_int_distance((u - c.q0_t0) / c.p0_t0 + h)
    out = c.a0 * u + c.a1 + (c.a2 + c.a3 * frac**2) / u
    return float(out) if out.ndim == 0 else out


def brute_force_envelope(fam: FamilySpec, n_range: Iterable[int], u: float, samples: int = 257) -> float:
    """Minimum of ``y`` over all curve points with abscissa ``u``.

    Every sign change of ``u_n(t) - u`` on a uniform sample of ``I`` is
    refined with Brent's method; exact hits at interval ends count too.
    """
    if fam.curve is None:
        raise ValueError(f"{fam.name} has no exact curve evaluator")
    lo, hi = fam.interval
    ts = np.linspace(lo, hi, samples)
    best = math.inf
    for n in n_range:
        g = np.array([fam.curve(n, float(t))[0] - u for t in ts])
        for i in range(samples - 1):
            if g[i] == 0:
                best = min(best, fam.curve(n, float(ts[i]))[1])
            elif g[i] * g[i + 1] < 0:
                r = brentq(lambda t: fam.curve(n, t)[0] - u, ts[i], ts[i + 1], xtol=1e-15, rtol=1e-15)
                best = min(best, fam.curve(n, r)[1])
        if g[-1] == 0:
            best = min(best, fam.curve(n, float(ts[-1]))[1])
    if not math.isfinite(best):
        raise ValueError(f"no curve of {fam.name} reaches u={u}")
    return best


# ----- arithmetic-geometric instance -------------------------------------


def amgm_family() -> FamilySpec:
    """``u = n t``, ``y = n e^t``; the envelope is ``min_n n e^(u/n)``."""
    return FamilySpec(
        p0=lambda t: t,
        p1=jets.exp,
        interval=(0.5, 1.5),
        curve=lambda n, t: (n * t, n * math.exp(t)),
        name="amgm",
    )


def amgm_envelope(u):
    """``min over n >= 1 of n e^(u/n)``, the exact envelope of the AM-GM family."""
    u = np.asarray(u, dtype=float)
    base = np.maximum(np.floor(u), 1.0)
    cands = [base + k for k in (-1.0, 0.0, 1.0, 2.0)]
    vals = [np.where(n >= 1, n * np.exp(u / np.maximum(n, 1.0)), np.inf) for n in cands]
    out = np.min(vals, axis=0)
    return float(out) if out.ndim == 0 else out


# ----- main instance -------------------------------------------------------


@lru_cache(maxsize=8192)
def _main_coeffs(t: float) -> tuple[Jet2, Jet2, Jet2, Jet2]:
    s = real_jet_series(t)
    return jets.log(s.alpha_inf), s.phi, s.alpha_inf, s.psi


def _main_coeff(k: int) -> Coeff:
    def f(t: Jet2) -> Jet2:
        if t.d1 != 1.0 or t.d2 != 0.0:
            raise ValueError("main-family coefficients expect a seeded jet")
        return _main_coeffs(float(t.v))[k]

    return f


def _main_curve(n: int, t: float) -> tuple[float, float]:
    s = evolve(t, n)
    return math.log(s.xi), s.eta


@lru_cache(maxsize=None)
def find_to() -> float:
    """Minimiser of ``alpha_inf`` on ``[1, 2]``."""

    def fdf(t):
        a = real_jet_series(t).alpha_inf
        return a.d1, a.d2

    return safe_newton(fdf, 1.2, 1.7, xtol=1e-15)


@lru_cache(maxsize=None)
def find_ta_tb() -> tuple[float, float]:
    """The two solutions of ``alpha_inf(t) = e`` on ``[1, 2]``."""
    to = find_to()

    def fdf(t):
        a = real_jet_series(t).alpha_inf
        return a.v - E, a.d1

    try:
        return safe_newton(fdf, 1.0, to, xtol=1e-15), safe_newton(fdf, to, 2.0, xtol=1e-15)
    except RootNotBracketed as exc:  # pragma: no cover - would contradict alpha_inf(t_o) < e
        raise FamilyError("alpha_inf does not cross e on [1, 2]") from exc


def main_family(interval: tuple[float, float] | None = None) -> FamilySpec:
    """``u = log xi_n(t) = n log alpha_inf + phi``, ``y = eta_n(t) = n alpha_inf + psi``."""
    if interval is None:
        interval = (find_to() + 0.05, 1.95)
    return FamilySpec(
        p0=_main_coeff(0),
        q0=_main_coeff(1),
        p1=_main_coeff(2),
        q1=_main_coeff(3),
        interval=interval,
        curve=_main_curve,
        name="main",
    )


@dataclass(frozen=True)
class MainConstants:
    t_a: float
    t_b: float
    t_o: float
    alpha_inf_1: float
    alpha_inf_2: float
    alpha_inf_to: float
    A: float
    b: float
    phi_tb: float
    psi_tb: float
    zeta_tb: float
    zeta_prime_tb: float
    a3_identity: float  # beta''(t_b) (p0^2/p0')^2, equal to e

    def prediction(self, x):
        """``e u - A + (e/2) <u + b>^2 / u`` at ``u = log x``."""
        u = np.log(np.asarray(x, dtype=float))
        out = E * u - self.A + 0.5 * E * nearest_int_distance(u + self.b) ** 2 / u
        return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def main_constants() -> MainConstants:
    """Constants of the main problem computed from the trajectory series."""
    t_o = find_to()
    t_a, t_b = find_ta_tb()
    s = real_jet_series(t_b)
    a, ph, ps = s.alpha_inf, s.phi, s.psi
    la = jets.log(a)
    beta = a / la
    zeta = ps - beta * ph
    a3 = beta.d2 * (la.v * la.v / la.d1) ** 2
    return MainConstants(
        t_a=t_a,
        t_b=t_b,
        t_o=t_o,
        alpha_inf_1=real_jet_series(1.0).alpha_inf.v,
        alpha_inf_2=real_jet_series(2.0).alpha_inf.v,
        alpha_inf_to=real_jet_series(t_o).alpha_inf.v,
        A=1.0 - zeta.v,
        b=-ph.v,
        phi_tb=ph.v,
        psi_tb=ps.v,
        zeta_tb=zeta.v,
        zeta_prime_tb=zeta.d1,
        a3_identity=a3,
    )


def main_coefficients() -> AsymptoticCoeffs:
    return analyze(main_family())


def fit_intercept(us: Sequence[float], fs: Sequence[float], slope: float = E) -> float:
    """Least-squares ``c`` in ``f = slope u - c``."""
    us, fs = np.asarray(us, dtype=float), np.asarray(fs, dtype=float)
    return float(np.mean(slope * us - fs))
