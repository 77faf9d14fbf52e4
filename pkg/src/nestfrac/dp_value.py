"""Value functions of the nested-fraction sums by dynamic programming.

For a tuple ``t_1, ..., t_{n-1}`` and terminal value ``x = t_n`` the objective is

    S^(p) = t_1 + t_2/(t_1 + p) + ... + x/(t_{n-1} + p)

and ``F^(p)_n(x)`` is its infimum over non-negative tuples.  Minimising over the
last interior variable gives the recursion

    F_n(x) = min_{y >= 0} F_{n-1}(y) + x/(y + p),      F_1(x) = x,

which is solved on a log-spaced grid.  For each level the candidates
``y -> F_{n-1}(y) + x/(y + p)`` are straight lines in ``x`` with decreasing
slopes, so the exact grid minimum for every grid ``x`` comes from one sweep
over their lower hull.  A golden-section pass on the linear interpolant of
the previous level then polishes each minimiser inside its bracketing cells.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .roots import golden_min_vec, scan_min

__all__ = [
    "GridBoundaryWarning",
    "ValueTable",
    "objective",
    "objective_additive",
    "additive_to_tuple",
    "tuple_to_additive",
    "dp_sweep",
    "amgm_value",
    "crude_b1_root",
    "crude_a1",
    "crude_bounds",
]

log = logging.getLogger(__name__)

E = math.e
Y_MIN = 1e-6


class GridBoundaryWarning(RuntimeWarning):
    """A minimiser sits at the top of the grid, so the horizon is too short."""


def objective(t: Sequence[float], x: float, p: float = 1.0) -> float:
    """``t_1 + sum_j t_j / (t_{j-1} + p)`` with ``t_n = x``; ``t`` holds the interior entries."""
    if p < 0:
        raise ValueError("p must be non-negative")
    seq = [float(v) for v in t] + [float(x)]
    if any(v < 0 for v in seq):
        raise ValueError("tuple entries must be non-negative")
    total = seq[0]
    for prev, cur in zip(seq, seq[1:]):
        d = prev + p
        if d == 0:
            raise ZeroDivisionError("zero denominator: p = 0 with a vanishing entry")
        total += cur / d
    return total


def _check_simplex(u: Sequence[float]) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size < 1:
        raise ValueError("need a non-empty vector")
    if np.any(u <= 0):
        raise ValueError("simplex entries must be positive")
    if abs(u.sum() - 1.0) > 1e-9:
        raise ValueError(f"entries sum to {u.sum()!r}, not 1")
    return u


def objective_additive(u: Sequence[float], x: float) -> float:
    """``sum_{j<n} u_j/u_{j+1} + x u_n`` on the simplex."""
    u = _check_simplex(u)
    return float(np.sum(u[:-1] / u[1:]) + x * u[-1])


def additive_to_tuple(u: Sequence[float]) -> list[float]:
    """Interior tuple ``t_j = (u_1 + ... + u_j) / u_{j+1}`` for a simplex point."""
    u = _check_simplex(u)
    s = np.cumsum(u)
    return [float(v) for v in s[:-1] / u[1:]]


def tuple_to_additive(t: Sequence[float]) -> list[float]:
    """Inverse of :func:`additive_to_tuple`."""
    t = [float(v) for v in t]
    if any(v < 0 for v in t):
        raise ValueError("tuple entries must be non-negative")
    n = len(t) + 1
    u = [0.0] * n
    # s_j = t_j u_{j+1} and s_j = s_{j-1} + u_j give u_j = t_j u_{j+1} / (1 + t_{j-1})
    u[n - 1] = 1.0 / (1.0 + t[n - 2]) if n > 1 else 1.0
    for j in range(n - 2, 0, -1):
        u[j] = t[j] * u[j + 1] / (1.0 + t[j - 1])
    if n > 1:
        u[0] = t[0] * u[1]
    return u


def amgm_value(n: int, x):
    """``n x^(1/n)``, the value function of the shift-free sum."""
    return n * np.power(x, 1.0 / n)


@dataclass(frozen=True)
class ValueTable:
    """Grid values of ``F_1 .. F_{n_max}`` for one shift ``p``.

    ``values[k]`` and ``argmin_index[k]`` / ``argmin_y[k]`` belong to level
    ``k + 1``; level 1 has no minimiser (index -1, ``nan``).
    """

    p: float
    grid: np.ndarray
    values: np.ndarray
    argmin_index: np.ndarray
    argmin_y: np.ndarray
    initial: str = "identity"

    @property
    def n_max(self) -> int:
        return self.values.shape[0]

    def level(self, n: int) -> np.ndarray:
        if not 1 <= n <= self.n_max:
            raise ValueError(f"level {n} not in 1..{self.n_max}")
        return self.values[n - 1]

    def F_n(self, n: int, x):
        out = np.interp(x, self.grid, self.level(n))
        return float(out) if np.ndim(out) == 0 else out

    def F(self, x):
        """Infimum over the computed levels, interpolated."""
        out = np.interp(x, self.grid, self.values.min(axis=0))
        return float(out) if np.ndim(out) == 0 else out

    def minimizer_chain(self, n: int, i: int) -> list[int]:
        """Grid indices ``t_1 .. t_{n-1}`` of the discrete minimiser for ``F_n`` at ``grid[i]``."""
        chain = []
        k = i
        for level in range(n, 1, -1):
            k = int(self.argmin_index[level - 1, k])
            chain.append(k)
        return chain[::-1]

    def rows(self):
        for k in range(self.n_max):
            for x, f, y in zip(self.grid, self.values[k], self.argmin_y[k]):
                yield k + 1, x, f, y

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "x", "F_n", "argmin_y"])
            for n, x, f, y in self.rows():
                w.writerow([n, repr(float(x)), repr(float(f)), "" if math.isnan(y) else repr(float(y))])


def _hull_minimum(slopes: np.ndarray, intercepts: np.ndarray, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact ``min_i c_i + s_i x`` for increasing ``xs``; slopes strictly decreasing.

    Ties go to the smallest index.  Lines with infinite intercept are ignored.
    """
    s = slopes.tolist()
    c = intercepts.tolist()
    hull: list[int] = []
    for i in range(len(s)):
        ci = c[i]
        if not math.isfinite(ci):
            continue
        while len(hull) >= 2:
            j, k = hull[-2], hull[-1]
            # k never strictly wins if line i overtakes j no later than k does
            if (ci - c[j]) * (s[j] - s[k]) <= (c[k] - c[j]) * (s[j] - s[i]):
                hull.pop()
            else:
                break
        hull.append(i)
    vals = np.empty(len(xs))
    idx = np.empty(len(xs), dtype=np.int64)
    ptr = 0
    last = len(hull) - 1
    for q, x in enumerate(xs.tolist()):
        h = hull[ptr]
        best = c[h] + s[h] * x
        while ptr < last:
            h2 = hull[ptr + 1]
            v2 = c[h2] + s[h2] * x
            if v2 < best:
                ptr += 1
                best = v2
            else:
                break
        vals[q] = best
        idx[q] = hull[ptr]
    return vals, idx


def make_grid(x_max: float, M: int) -> np.ndarray:
    """``0`` followed by ``M`` log-spaced points on ``[1e-6, x_max]``, with ``1`` on the grid."""
    g = np.geomspace(Y_MIN, x_max, M)
    g[np.argmin(np.abs(g - 1.0))] = 1.0
    return np.concatenate(([0.0], g))


def dp_sweep(
    x_max: float,
    n_max: int,
    M: int = 20_000,
    p: float = 1.0,
    initial: str = "identity",
    refine: bool = True,
) -> ValueTable:
    """Tabulate ``F^(p)_1 .. F^(p)_{n_max}`` on ``[0, x_max]``.

    ``initial="identity"`` starts from ``F_1(x) = x``; ``"clamped"`` keeps
    ``F_1`` only on ``x <= 1`` (infinite beyond), the variant whose levels
    restrict every interior entry to the region where the first one is small.
    """
    if not x_max > 1:
        raise ValueError("x_max must exceed 1")
    if M < 1000:
        raise ValueError("grid needs at least 1000 points")
    if not p > 0:
        raise ValueError("p must be positive")
    if n_max < 1:
        raise ValueError("n_max must be positive")
    if initial not in ("identity", "clamped"):
        raise ValueError(f"unknown initial condition {initial!r}")

    grid = make_grid(x_max, M)
    size = grid.size
    values = np.empty((n_max, size))
    arg_idx = np.full((n_max, size), -1, dtype=np.int64)
    arg_y = np.full((n_max, size), np.nan)
    first = grid.copy()
    if initial == "clamped":
        first[grid > 1.0] = np.inf
    values[0] = first
    slopes = 1.0 / (grid + p)
    warned = False

    for k in range(1, n_max):
        prev = values[k - 1]
        best, idx = _hull_minimum(slopes, prev, grid)
        ybest = grid[idx].astype(float)
        if refine:
            best, ybest = _polish(grid, prev, p, idx, best, ybest)
        if p >= 1.0:
            # F_n <= F_{n-1} holds exactly for p >= 1 (take t_1 = 0); clip round-off
            best = np.minimum(best, prev)
        values[k] = best
        arg_idx[k] = idx
        arg_y[k] = ybest
        top = np.nonzero(idx == size - 1)[0]
        if top.size and not warned:
            warnings.warn(
                f"level {k + 1}: minimiser at the top grid point for x >= {grid[top[0]]:.6g}; "
                "raise x_max for trustworthy values there",
                GridBoundaryWarning,
                stacklevel=2,
            )
            warned = True
    return ValueTable(p, grid, values, arg_idx, arg_y, initial)


def _polish(grid, prev, p, idx, best, ybest):
    finite = np.isfinite(prev)
    safe_prev = np.where(finite, prev, np.nan)
    size = grid.size
    lo = grid[np.maximum(idx - 1, 0)]
    hi = grid[np.minimum(idx + 1, size - 1)]
    xs = grid

    def f(y):
        v = np.interp(y, grid, safe_prev) + xs / (y + p)
        return np.where(np.isnan(v), np.inf, v)

    y, v = golden_min_vec(f, lo, hi, iters=40)
    better = v < best
    return np.where(better, v, best), np.where(better, y, ybest)


def crude_b1_root(tol: float = 1e-14) -> float:
    """Smaller root of ``2 log((b+1)/2) = b/e``, by bisection on ``(1, 2)``."""
    g = lambda b: 2.0 * math.log((b + 1.0) / 2.0) - b / E
    lo, hi = 1.0, 2.0
    if not g(lo) < 0 < g(hi):
        raise ArithmeticError("root not bracketed on (1, 2)")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def crude_a1(b1: float | None = None) -> float:
    """``max over x in [0, 1] of e log(x+1) + b1/(x+1) - x``."""
    b1 = crude_b1_root() if b1 is None else b1
    f = lambda x: E * math.log(x + 1.0) + b1 / (x + 1.0) - x
    x = scan_min(lambda x: -f(x), 0.0, 1.0)
    return f(x)


def crude_bounds(x, a1: float = 1.79):
    """Lower and upper bracket ``e log(x+1) - a1`` and ``e log(x+1) - b2 + b2/(x+1)``."""
    x = np.asarray(x, dtype=float)
    b2 = E / (E - 1.0)
    lower = E * np.log1p(x) - a1
    upper = E * np.log1p(x) - b2 + b2 / (x + 1.0)
    return lower, upper
