"""Trajectories of the nested recurrence and their limits.

Starting from ``alpha_0 = t - 1`` and ``xi_0 = eta_0 = 1`` the state evolves as::

    alpha_{n+1} = alpha_n + 1 / xi_n
    xi_{n+1}    = alpha_{n+1} * xi_n
    eta_{n+1}   = eta_n + alpha_n

so that ``alpha_1 = xi_1 = eta_1 = t``.  ``t`` may be a float, a complex number,
a numpy array or a :class:`~nestfrac.jets.Jet2`; derivatives in ``t`` come for
free by seeding a jet.

For large ``n`` the sequence ``alpha_n`` converges geometrically to
``alpha_inf(t)``.  Series built from the defects ``delta_j = alpha_inf - alpha_j``
give the two slowly varying corrections ``phi`` and ``psi`` that govern the
asymptotics of the value function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any

import numpy as np

from . import jets
from .jets import Jet2, value

__all__ = [
    "TrajectoryState",
    "TailEstimate",
    "Series",
    "SingularTrajectoryError",
    "TailConvergenceError",
    "initial_state",
    "step",
    "evolve",
    "trajectory",
    "tail_estimate",
    "series",
    "alpha_inf",
    "phi",
    "psi",
    "beta",
    "zeta",
    "shift_identity_check",
    "dxi_eta_residual",
    "abel_identity_residual",
]

MAX_TERMS = 200
MAX_ANCHOR = 50
EXTRA_TERMS = 20  # beyond the value tolerance, so derivative tails are negligible too


class SingularTrajectoryError(ArithmeticError):
    """``xi_n`` vanished (or nearly so) along the trajectory."""


class TailConvergenceError(RuntimeError):
    """The geometric tail condition never held, so the limit cannot be certified."""


def _modulus(x) -> float:
    v = value(x)
    if isinstance(v, np.ndarray):
        return float(np.min(np.abs(v))) if v.size else math.inf
    return abs(v)


def _max_modulus(x) -> float:
    v = value(x)
    if isinstance(v, np.ndarray):
        return float(np.max(np.abs(v))) if v.size else 0.0
    return abs(v)


@dataclass(frozen=True)
class TrajectoryState:
    n: int
    alpha: Any
    xi: Any
    eta: Any


def initial_state(t) -> TrajectoryState:
    one = t * 0 + 1
    return TrajectoryState(0, t - 1, one, one)


def step(s: TrajectoryState) -> TrajectoryState:
    if _modulus(s.xi) < 1e-300:
        raise SingularTrajectoryError(f"xi_{s.n} vanishes")
    a = s.alpha + 1 / s.xi
    return TrajectoryState(s.n + 1, a, a * s.xi, s.eta + s.alpha)


def trajectory(t, n: int) -> list[TrajectoryState]:
    """States ``0..n`` for parameter ``t``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    out = [initial_state(t)]
    for _ in range(n):
        out.append(step(out[-1]))
    return out


def evolve(t, n: int) -> TrajectoryState:
    s = initial_state(t)
    if n < 0:
        raise ValueError("n must be non-negative")
    for _ in range(n):
        s = step(s)
    return s


@dataclass(frozen=True)
class TailEstimate:
    """Certified bound ``|alpha_inf - alpha_n| <= bound`` anchored at index ``n0``."""

    n0: int
    n: int
    a: float
    bound: float


def admissible_ratio(s: TrajectoryState) -> tuple[float, float]:
    """Interval ``[lo, hi)`` of admissible geometric ratios at anchor ``s``.

    The tail estimate is valid for any ``a`` with ``lo <= a < hi``; the interval
    is empty when ``lo >= hi``.  For array states the worst point decides.
    """
    lo = 1.0 + _max_modulus(s.xi) ** -0.5
    hi = _modulus(s.alpha) ** 0.5
    return lo, hi


def tail_estimate(anchor: TrajectoryState, n: int | None = None, a: float | None = None) -> TailEstimate:
    """Bound on ``|alpha_inf - alpha_n|`` for ``n >= anchor.n``.

    With ``a`` omitted the ratio is taken just below the largest admissible one.
    """
    n = anchor.n if n is None else n
    if n < anchor.n:
        raise ValueError("tail estimate needs n >= anchor index")
    lo, hi = admissible_ratio(anchor)
    if not lo < hi:
        raise TailConvergenceError(
            f"tail condition fails at n0={anchor.n}: 1+|xi|^-1/2={lo:.6g} >= |alpha|^1/2={hi:.6g}"
        )
    if a is None:
        a = lo + 0.99 * (hi - lo)
    elif not lo <= a < hi:
        raise TailConvergenceError(f"ratio a={a} outside admissible [{lo:.6g}, {hi:.6g})")
    bound = a ** (anchor.n - n) / (_modulus(anchor.xi) * (1.0 - 1.0 / a))
    return TailEstimate(anchor.n, n, float(a), float(bound))


@dataclass(frozen=True)
class Series:
    """Truncated limit data for one parameter value."""

    alpha_inf: Any
    phi: Any
    psi: Any
    states: tuple[TrajectoryState, ...]
    tail: TailEstimate

    @property
    def terms(self) -> int:
        return self.tail.n


def _truncation(t, tol: float) -> list[TrajectoryState]:
    states = [initial_state(t)]
    while True:
        s = states[-1]
        if s.n >= 1:
            lo, hi = admissible_ratio(s)
            if lo < hi and tail_estimate(s).bound < tol:
                break
            if s.n >= MAX_ANCHOR and not lo < hi:
                raise TailConvergenceError(f"tail condition still fails at n0={s.n}")
        if s.n >= MAX_TERMS:
            raise TailConvergenceError(f"no certified truncation within {MAX_TERMS} terms")
        states.append(step(s))
    for _ in range(EXTRA_TERMS):
        states.append(step(states[-1]))
    return states


def series(t, tol: float = 1e-14) -> Series:
    """``alpha_inf``, ``phi`` and ``psi`` at ``t`` truncated once the tail bound is below ``tol``.

    The defects use the last computed ``alpha_N`` in place of the limit, and
    ``tail`` certifies ``|alpha_inf - alpha_N|``.
    """
    states = _truncation(t, tol)
    last = states[-1]
    a_inf = last.alpha
    phi_sum = 0
    delta_sum = 0
    for s in states[1:-1]:
        d = a_inf - s.alpha
        delta_sum = delta_sum + d
        phi_sum = phi_sum + jets.log(1 - d / a_inf)
    psi_val = t - a_inf - delta_sum
    return Series(a_inf, phi_sum, psi_val, tuple(states), tail_estimate(last))


def alpha_inf(t, tol: float = 1e-14):
    return series(t, tol).alpha_inf


def phi(t, tol: float = 1e-14):
    return series(t, tol).phi


def psi(t, tol: float = 1e-14):
    return series(t, tol).psi


@lru_cache(maxsize=4096)
def _real_jet_series(t: float, tol: float) -> Series:
    return series(jets.seed(t), tol)


def real_jet_series(t: float, tol: float = 1e-14) -> Series:
    """Cached series of a real seeded jet; components are (value, d/dt, d2/dt2)."""
    return _real_jet_series(float(t), float(tol))


def beta(t, tol: float = 1e-14):
    """``alpha_inf / log alpha_inf``."""
    a = alpha_inf(t, tol)
    return a / jets.log(a)


def zeta(t, tol: float = 1e-14):
    """``psi - beta * phi``."""
    s = series(t, tol)
    return s.psi - s.alpha_inf / jets.log(s.alpha_inf) * s.phi


def shift_identity_check(n: int) -> tuple[float, float, float]:
    """Residuals of ``xi_n(1) = xi_{n-1}(2)``, ``eta_n(1) = eta_{n-1}(2)`` and
    ``alpha_n(1) = alpha_{n-1}(2)``, relative to the magnitude of each side (``n >= 1``)."""
    if n < 1:
        raise ValueError("shift identities need n >= 1")
    a, b = evolve(1.0, n), evolve(2.0, n - 1)
    return tuple(
        abs(x - y) / max(1.0, abs(y))
        for x, y in ((a.xi, b.xi), (a.eta, b.eta), (a.alpha, b.alpha))
    )


def dxi_eta_residual(n: int, t: float) -> float:
    """Relative residual of ``eta_n' = xi_n' / xi_{n-1}`` at ``t``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    st = trajectory(jets.seed(t), n)
    lhs = st[n].eta.d1
    rhs = st[n].xi.d1 / st[n - 1].xi.v
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def abel_identity_residual(t: float, tol: float = 1e-14) -> float:
    """Signed residual of ``sum_j delta_j alpha_j' / alpha_j = 1 - alpha_inf'``."""
    s = real_jet_series(t, tol)
    a_inf = s.alpha_inf
    total = 0.0
    for st in s.states[1:-1]:
        total += (a_inf.v - st.alpha.v) * st.alpha.d1 / st.alpha.v
    return total - (1.0 - a_inf.d1)
