"""The shifted problem ``F^(p)`` and its asymptotic intercept ``A(p)``.

For ``p > 1`` the shifted value function reduces to the unshifted one,
``F^(p)(x) = F(x/p)``, so ``A(p) = A + e log p``.  For ``0 < p <= 1`` the
intercept obeys the functional equation

    A(p) = p + max_{1 <= u <= e} [A(p/u) - u + e log u]

whose maximiser gives a three-term recurrence for ``(p, A'(p), A(p))``.  The
recurrence is started at a tiny ``p`` from the slope law ``A(p) ~ k0 p`` with
``k0 = 1/(1 - 1/e)`` and marched up to ``p = 1``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .roots import golden_min

__all__ = [
    "K0",
    "ApTableRow",
    "ApDivergenceError",
    "TableCoverageError",
    "FeqResult",
    "ApCurve",
    "theta",
    "ap_step",
    "tabulate_ap",
    "ap_closed_form",
    "ap_curve",
    "feq_residual",
    "write_ap_csv",
]

E = math.e
K0 = 1.0 / (1.0 - 1.0 / E)
X_CEILING = 3.0


class ApDivergenceError(ArithmeticError):
    """The recurrence left its domain or stopped increasing."""


class TableCoverageError(ValueError):
    """The requested argument lies outside the tabulated range."""


@dataclass(frozen=True)
class ApTableRow:
    x: float  # p
    y: float  # A'(p)
    z: float  # A(p)


def theta(s: float) -> float:
    return E * math.log(s) - s


def ap_step(row: ApTableRow) -> ApTableRow:
    s = E - row.x * row.y
    if not s > 0:
        raise ApDivergenceError(f"log argument e - x y = {s:.6g} is not positive at x={row.x:.6g}")
    x = row.x * s
    if not 0 < x < X_CEILING:
        raise ApDivergenceError(f"x left (0, {X_CEILING}) with value {x:.6g}")
    return ApTableRow(x, 1.0 - 1.0 / row.x + E / x, row.z + x + theta(s))


def _start(x1: float) -> ApTableRow:
    return ApTableRow(x1, K0, K0 * x1)


def _march(x1: float, stop: float, max_steps: int) -> list[ApTableRow]:
    """Rows while ``x <= stop``; the first row beyond ``stop`` is appended too."""
    rows = [_start(x1)]
    while rows[-1].x <= stop:
        if len(rows) > max_steps:
            raise ApDivergenceError(f"x still {rows[-1].x:.6g} after {max_steps} steps")
        nxt = ap_step(rows[-1])
        if not nxt.x > rows[-1].x:
            raise ApDivergenceError(f"orbit turned back at x={rows[-1].x:.6g}")
        rows.append(nxt)
    return rows


def _orbit_x(x1: float, steps: int) -> float:
    row = _start(x1)
    for _ in range(steps):
        nxt = ap_step(row)
        if not nxt.x > row.x:
            raise ApDivergenceError("orbit turned back")
        row = nxt
    return row.x


def _landing_start(x1: float, target: float, max_steps: int) -> tuple[float, int]:
    """Start in ``[x1, e x1]`` whose orbit reaches ``target`` exactly, and the step count.

    Starting points are scanned geometrically and the first upward crossing is
    refined, which keeps the orbit on the branch that grows monotonically.
    """
    steps, row = 0, _start(x1)
    while True:
        try:
            nxt = ap_step(row)
        except ApDivergenceError:
            break
        if not row.x < nxt.x <= target:
            break
        row, steps = nxt, steps + 1
        if steps > max_steps:
            raise ApDivergenceError(f"x still {row.x:.6g} after {max_steps} steps")

    def g(a: float) -> float:
        try:
            return _orbit_x(a, steps) - target
        except ApDivergenceError:
            return math.nan

    starts = np.geomspace(x1, x1 * E, 65)
    prev_a, prev_g = float(starts[0]), g(float(starts[0]))
    if prev_g == 0:
        return prev_a, steps
    for a in starts[1:]:
        a = float(a)
        ga = g(a)
        if prev_g < 0 <= ga:
            root = brentq(g, prev_a, a, xtol=1e-22, rtol=1e-15)
            return root, steps
        prev_a, prev_g = a, ga
    raise ApDivergenceError(f"no start in [{x1:.3g}, {E * x1:.3g}] reaches {target}")


def tabulate_ap(x1: float = 1e-6, max_steps: int = 200, land_on: float | None = 1.0) -> list[ApTableRow]:
    """Table of ``(p, A'(p), A(p))`` from ``p ~ x1`` upward.

    With ``land_on`` set, the start is moved inside ``[x1, e x1]`` so that the
    final row sits exactly at ``p = land_on``.  With ``land_on=None`` the plain
    recurrence runs from ``x1`` until ``p`` exceeds 1, and that last row (past
    the range where the recurrence is valid) is included.
    """
    if not 0 < x1 <= 1e-4:
        raise ValueError("x1 must lie in (0, 1e-4]")
    if max_steps < 10:
        raise ValueError("max_steps must be at least 10")
    if land_on is None:
        return _march(x1, 1.0, max_steps)
    if not 0 < land_on <= 1:
        raise ValueError("land_on must lie in (0, 1]")
    start, steps = _landing_start(x1, land_on, max_steps)
    rows = [_start(start)]
    for _ in range(steps):
        rows.append(ap_step(rows[-1]))
    # exact endpoint: the shooting residual is at round-off level
    last = rows[-1]
    rows[-1] = ApTableRow(land_on, last.y, last.z)
    return rows


@lru_cache(maxsize=None)
def _main_A() -> float:
    from .asymptotics import main_constants

    return main_constants().A


def ap_closed_form(p: float) -> float:
    """``A + e log p`` for ``p > 1``."""
    if not p > 1:
        raise ValueError("closed form holds only for p > 1")
    return _main_A() + E * math.log(p)


@dataclass(frozen=True)
class ApCurve:
    """Monotone cubic interpolant of ``A`` on ``[x_min, 1]``, closed form beyond 1."""

    xs: np.ndarray
    zs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "_interp", PchipInterpolator(self.xs, self.zs, extrapolate=False))

    @property
    def x_min(self) -> float:
        return float(self.xs[0])

    def __call__(self, p: float) -> float:
        if p > 1.0:
            return ap_closed_form(p)
        if p < self.xs[0]:
            raise TableCoverageError(f"p={p:.3g} below the table start {self.xs[0]:.3g}")
        return float(self._interp(p))

    def derivative(self, p: float) -> float:
        if p > 1.0:
            return E / p
        if p < self.xs[0]:
            raise TableCoverageError(f"p={p:.3g} below the table start {self.xs[0]:.3g}")
        return float(self._interp.derivative()(p))

    @classmethod
    def from_rows(cls, rows: Sequence[ApTableRow]) -> ApCurve:
        pts = sorted({(r.x, r.z) for r in rows if r.x <= 1.0})
        xs = np.array([p[0] for p in pts])
        zs = np.array([p[1] for p in pts])
        keep = np.concatenate(([True], np.diff(xs) > 1e-14 * xs[1:]))
        return cls(xs[keep], zs[keep])


@lru_cache(maxsize=8)
def ap_curve(x1: float = 1e-6, orbits: int = 16) -> ApCurve:
    """Interpolant built from ``orbits`` tables landing at ``e^(-j/orbits)``, ``j < orbits``."""
    rows: list[ApTableRow] = []
    for j in range(orbits):
        rows.extend(tabulate_ap(x1, land_on=math.exp(-j / orbits)))
    return ApCurve.from_rows(rows)


@dataclass(frozen=True)
class FeqResult:
    residual: float
    argmax_u: float


def feq_residual(p: float, curve: ApCurve | None = None) -> FeqResult:
    """``A(p) - p - max_{1<=u<=e} [A(p/u) - u + e log u]`` from the interpolant."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    curve = ap_curve() if curve is None else curve
    if p / E < curve.x_min:
        raise TableCoverageError(f"table does not cover [{p / E:.3g}, {p:.3g}]")
    h = lambda u: curve(p / u) - u + E * math.log(u)
    us = np.linspace(1.0, E, 65)
    hs = [h(float(u)) for u in us]
    k = int(np.argmax(hs))
    u = golden_min(lambda v: -h(v), float(us[max(k - 1, 0)]), float(us[min(k + 1, 64)]), 1e-12)
    best_u, best = (u, h(u)) if h(u) >= hs[k] else (float(us[k]), hs[k])
    return FeqResult(curve(p) - p - best, best_u)


def write_ap_csv(rows: Sequence[ApTableRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "A_prime", "A"])
        for r in rows:
            w.writerow([repr(r.x), repr(r.y), repr(r.z)])
