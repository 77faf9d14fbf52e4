"""The value function ``F`` as the lower envelope of the extremal curves.

Curve ``n`` is ``t -> (xi_n(t), eta_n(t))``.  In shifted coordinates
``(x + 1, F(x) + 1)`` the graph of ``F`` is the pointwise minimum of these
curves, and only their increasing ("plus") branches over ``t`` in ``[1, 2]``
matter.  Ownership of the envelope passes from curve ``n - 1`` to curve ``n``
at the crossing abscissa ``X_n``; for ``n <= 6`` this happens at the shared
endpoint ``xi_n(1) = xi_{n-1}(2)``, beyond that at a transversal crossing that
is located numerically.
"""

from __future__ import annotations

import bisect
import logging
import math
import threading
from dataclasses import dataclass

import numpy as np

from .jets import seed
from .roots import RootNotBracketed, safe_newton
from .trajectory import evolve

__all__ = [
    "NoSolutionError",
    "BranchUndefinedError",
    "CrossingError",
    "SpecialPoints",
    "EnvelopeSegment",
    "EnvelopePoint",
    "Envelope",
    "solve_branch",
    "cusp_parameter",
    "special_points",
    "envelope_value",
    "critical_index",
    "default_envelope",
]

log = logging.getLogger(__name__)

LAST_TANGENT_INDEX = 6  # curves up to this index meet their predecessor at t = 1
NEWTON_MAX_ITER = 100


class NoSolutionError(ValueError):
    """``xi_n(t) = x`` has no solution on the requested branch."""


class BranchUndefinedError(ValueError):
    """The decreasing branch was requested outside its range."""


class CrossingError(RuntimeError):
    """Consecutive curves could not be intersected."""


@dataclass(frozen=True)
class SpecialPoints:
    n: int
    t0: float
    X0: float
    t_ell: float
    t_r: float
    Xcross: float


@dataclass(frozen=True)
class EnvelopeSegment:
    n: int
    t_window: tuple[float, float]
    x_window: tuple[float, float]


@dataclass(frozen=True)
class EnvelopePoint:
    F: float
    n: int
    t: float


def cusp_parameter(n: int) -> float:
    """Minimiser ``t0`` of ``xi_n`` over ``[1, 2]``."""
    if n < 1:
        raise ValueError("curve index must be >= 1")
    if evolve(seed(1.0), n).xi.d1 >= 0:
        return 1.0

    def fdf(t):
        xi = evolve(seed(t), n).xi
        return xi.d1, xi.d2

    return safe_newton(fdf, 1.0, 2.0)


def _log_xi_residual(n: int, x: float):
    lx = math.log(x)

    def fdf(t):
        xi = evolve(seed(t), n).xi
        return math.log(xi.v) - lx, xi.d1 / xi.v

    return fdf


def solve_branch(n: int, x: float, branch: str = "plus", t0: float | None = None) -> float:
    """Parameter ``t`` on curve ``n`` with ``xi_n(t) = x``.

    The plus branch has ``t >= t0`` (and may extend past 2), the minus branch
    ``1 <= t <= t0``.
    """
    if branch not in ("plus", "minus"):
        raise ValueError(f"unknown branch {branch!r}")
    t0 = cusp_parameter(n) if t0 is None else t0
    X0 = evolve(t0, n).xi
    if x < X0:
        raise NoSolutionError(f"x={x!r} lies below the cusp value {X0!r} of curve {n}")
    if x == X0:
        return t0
    fdf = _log_xi_residual(n, x)
    if branch == "plus":
        hi = 2.0
        while evolve(hi, n).xi < x:
            hi *= 2.0
            if hi > 1e300:
                raise NoSolutionError(f"x={x!r} out of range for curve {n}")
        return safe_newton(fdf, t0, hi)
    x1 = evolve(1.0, n).xi
    if x > x1:
        raise BranchUndefinedError(f"minus branch of curve {n} only reaches {x1!r}")
    return safe_newton(fdf, 1.0, t0)


@dataclass(frozen=True)
class _Crossing:
    n: int
    t_ell: float  # on curve n
    t_r_prev: float  # on curve n - 1
    X: float


class Envelope:
    """Incrementally built, memoised envelope data; safe to share between threads."""

    def __init__(self) -> None:
        self._lock = threading.RLock()
        self._t0: list[float] = [math.nan]  # index 0 unused
        self._crossings: list[_Crossing] = [_Crossing(1, 1.0, math.nan, 1.0)]
        self._X: list[float] = [1.0]  # X_1, X_2, ... (index n - 1)

    # ----- construction -------------------------------------------------
    def t0(self, n: int) -> float:
        if n < len(self._t0):
            return self._t0[n]
        with self._lock:
            while len(self._t0) <= n:
                self._t0.append(cusp_parameter(len(self._t0)))
        return self._t0[n]

    def _ensure(self, n: int) -> None:
        if n <= len(self._crossings):
            return
        with self._lock:
            while len(self._crossings) < n:
                c = self._next_crossing(len(self._crossings) + 1)
                if c.X <= self._crossings[-1].X:
                    raise CrossingError(f"crossing abscissas not increasing at n={c.n}")
                self._crossings.append(c)
                self._X.append(c.X)

    def _next_crossing(self, n: int) -> _Crossing:
        if n <= LAST_TANGENT_INDEX:
            return _Crossing(n, 1.0, 2.0, evolve(1.0, n).xi)
        if n > LAST_TANGENT_INDEX + 1:
            prev = self._crossings[-1]
            c = self._newton_crossing(n, prev.t_ell, prev.t_r_prev)
            if c is not None:
                return c
            log.info("Newton crossing failed at n=%d, bracketing instead", n)
        return self._bracketed_crossing(n)

    def _newton_crossing(self, n: int, a: float, b: float) -> _Crossing | None:
        t0n, t0m = self.t0(n), self.t0(n - 1)
        for _ in range(NEWTON_MAX_ITER):
            sa = evolve(seed(a), n)
            sb = evolve(seed(b), n - 1)
            g1 = math.log(sa.xi.v) - math.log(sb.xi.v)
            g2 = sa.eta.v - sb.eta.v
            j11, j12 = sa.xi.d1 / sa.xi.v, -sb.xi.d1 / sb.xi.v
            j21, j22 = sa.eta.d1, -sb.eta.d1
            det = j11 * j22 - j12 * j21
            if det == 0 or not math.isfinite(det):
                return None
            da = (g1 * j22 - g2 * j12) / det
            db = (j11 * g2 - j21 * g1) / det
            a, b = a - da, b - db
            if not (t0n < a < 2.0 and t0m < b <= 2.0):
                return None
            if abs(da) <= 4e-16 * a and abs(db) <= 4e-16 * b:
                break
        else:
            return None
        X = evolve(a, n).xi
        return _Crossing(n, a, b, X)

    def _bracketed_crossing(self, n: int) -> _Crossing:
        t0n, t0m = self.t0(n), self.t0(n - 1)
        lo = evolve(t0n, n).xi
        hi = evolve(2.0, n - 1).xi

        def fdf(X):
            tn = solve_branch(n, X, t0=t0n)
            tm = solve_branch(n - 1, X, t0=t0m)
            sn, sm = evolve(tn, n - 1), evolve(tm, n - 2)
            d = evolve(tn, n).eta - evolve(tm, n - 1).eta
            return d, 1.0 / sn.xi - 1.0 / sm.xi

        try:
            X = safe_newton(fdf, lo, hi)
        except RootNotBracketed as exc:
            raise CrossingError(f"curves {n - 1} and {n} do not cross on the plus branches") from exc
        return _Crossing(n, solve_branch(n, X, t0=t0n), solve_branch(n - 1, X, t0=t0m), X)

    # ----- queries ------------------------------------------------------
    def crossing_abscissa(self, n: int) -> float:
        self._ensure(n)
        return self._crossings[n - 1].X

    def special_points(self, n: int) -> SpecialPoints:
        if n < 1:
            raise ValueError("curve index must be >= 1")
        self._ensure(n + 1)
        c, nxt = self._crossings[n - 1], self._crossings[n]
        t0 = self.t0(n)
        return SpecialPoints(n, t0, evolve(t0, n).xi, c.t_ell, nxt.t_r_prev, c.X)

    def segment(self, n: int) -> EnvelopeSegment:
        sp = self.special_points(n)
        return EnvelopeSegment(n, (sp.t_ell, sp.t_r), (sp.Xcross, self.crossing_abscissa(n + 1)))

    def _index_for_shifted(self, X: float) -> int:
        # nu = n for X in (X_n, X_{n+1}]
        n = len(self._X)
        while self._X[-1] < X:
            n = max(2 * n, 8)
            self._ensure(n)
        return max(bisect.bisect_left(self._X, X), 1)

    def critical_index(self, x: float) -> int:
        if not x > 0:
            raise ValueError("x must be positive")
        return self._index_for_shifted(x + 1.0)

    def value(self, x: float) -> EnvelopePoint:
        """``F(x)`` together with the owning curve and its parameter."""
        if not x > 0:
            raise ValueError("x must be positive")
        if x <= 1.0:
            return EnvelopePoint(float(x), 1, float(x) + 1.0)
        X = x + 1.0
        n = self._index_for_shifted(X)
        t = solve_branch(n, X, t0=self.t0(n))
        return EnvelopePoint(evolve(t, n).eta - 1.0, n, t)

    def slope(self, x: float) -> float:
        """``F'(x)`` inside a segment, ``1 / xi_{n-1}(t)``."""
        p = self.value(x)
        return 1.0 / evolve(p.t, p.n - 1).xi

    def junction_slopes(self, n: int) -> tuple[float, float]:
        """One-sided derivatives of ``F`` where ownership passes to curve ``n`` (``n >= 2``)."""
        if n < 2:
            raise ValueError("junctions start at n = 2")
        self._ensure(n)
        c = self._crossings[n - 1]
        return 1.0 / evolve(c.t_r_prev, n - 2).xi, 1.0 / evolve(c.t_ell, n - 1).xi

    def values(self, xs) -> np.ndarray:
        return np.array([self.value(float(x)).F for x in np.asarray(xs, dtype=float)])


default_envelope = Envelope()


def special_points(n: int) -> SpecialPoints:
    return default_envelope.special_points(n)


def envelope_value(x: float) -> EnvelopePoint:
    return default_envelope.value(x)


def critical_index(x: float) -> int:
    return default_envelope.critical_index(x)
