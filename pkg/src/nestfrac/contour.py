"""Complex-plane bounds behind the convexity of ``alpha_inf``.

The loop ``Gamma`` encloses ``[1, 2]``: an inner arc ``|z| = 0.25``, the ray
``arg z = -pi/4`` out to ``|z| = 3.5``, the outer arc ``|z| = 3.5`` and the
conjugate ray back in.  On it we bound ``|alpha_n(z)|`` from below and
``|xi_n(z)|`` from above, integrate the majorant ``delta*_n(z) = sum_{j>=n}
1/|xi_j(z)|`` (plus a certified geometric tail), and check by winding numbers
that the denominators of ``alpha_n`` do not vanish inside.

Indices in this module count from ``xi(z) = z`` at index 0, one less than in
:mod:`nestfrac.trajectory` (where ``xi = z`` at index 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .jets import seed
from .roots import golden_min, scan_min
from .trajectory import evolve, step

__all__ = [
    "ConditionError",
    "QuadratureError",
    "NearZeroError",
    "Piece",
    "GROUPS",
    "DESIGNATED_RATIO",
    "RAW_TABLE",
    "contour_pieces",
    "state",
    "arc_extrema",
    "delta_star",
    "integral",
    "integral_B",
    "integral_B1",
    "min_t3_alpha_pp",
    "A_contour",
    "delta_direct",
    "cauchy_bound",
    "alpha_derivative_sign_changes",
    "alpha_derivative",
    "winding_number",
    "DENOMINATOR_FACTORS",
]

INDEX_SHIFT = 1
R_IN, R_OUT = 0.25, 3.5
R_SUB = (1.15, 2.3)
QUARTER = math.pi / 4

GROUPS = ("Gamma1", "Gamma3", "Gamma20", "Gamma2_rest", "Gamma40", "Gamma4_rest")

# lower bound for |alpha_4|^(1/2), upper bound for |xi_4|^(-1/2)
RAW_TABLE = {
    "Gamma1": (2.2, 0.1),
    "Gamma3": (1.85, 0.05),
    "Gamma20": (1.31, 0.28),
    "Gamma2_rest": (1.47, 0.27),
    "Gamma40": (1.31, 0.28),
    "Gamma4_rest": (1.47, 0.27),
}

DESIGNATED_RATIO = {
    "Gamma1": 2.2,
    "Gamma3": 1.85,
    "Gamma20": 1.3,
    "Gamma2_rest": 1.47,
    "Gamma40": 1.3,
    "Gamma4_rest": 1.47,
}


class ConditionError(ArithmeticError):
    """The geometric tail condition fails at a contour point."""


class QuadratureError(RuntimeError):
    """Panel doubling did not reach the requested accuracy."""


class NearZeroError(ArithmeticError):
    """The function nearly vanishes on the contour, so its winding number is undefined."""


@dataclass(frozen=True)
class Piece:
    """A ray segment (``kind="ray"``: radius ``a -> b`` at angle ``c``) or an arc
    (``kind="arc"``: angle ``a -> b`` at radius ``c``), traversed for ``s`` in ``[0, 1]``."""

    name: str
    group: str
    kind: str
    a: float
    b: float
    c: float

    def z(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "ray":
            return (self.a + (self.b - self.a) * s) * np.exp(1j * self.c)
        return self.c * np.exp(1j * (self.a + (self.b - self.a) * s))

    def speed(self) -> float:
        """``|dz/ds|``, constant on every piece."""
        if self.kind == "ray":
            return abs(self.b - self.a)
        return self.c * abs(self.b - self.a)

    @property
    def length(self) -> float:
        return self.speed()


@lru_cache(maxsize=None)
def contour_pieces() -> tuple[Piece, ...]:
    """Pieces of ``Gamma`` in positive (counter-clockwise) order."""
    r1, r2 = R_SUB
    return (
        Piece("G2a", "Gamma2_rest", "ray", R_IN, r1, -QUARTER),
        Piece("G20", "Gamma20", "ray", r1, r2, -QUARTER),
        Piece("G2b", "Gamma2_rest", "ray", r2, R_OUT, -QUARTER),
        Piece("G3", "Gamma3", "arc", -QUARTER, QUARTER, R_OUT),
        Piece("G4b", "Gamma4_rest", "ray", R_OUT, r2, QUARTER),
        Piece("G40", "Gamma40", "ray", r2, r1, QUARTER),
        Piece("G4a", "Gamma4_rest", "ray", r1, R_IN, QUARTER),
        Piece("G1", "Gamma1", "arc", QUARTER, -QUARTER, R_IN),
    )


def _pieces(group: str) -> list[Piece]:
    if group not in GROUPS:
        raise ValueError(f"unknown arc group {group!r}; choose from {GROUPS}")
    return [p for p in contour_pieces() if p.group == group]


def state(z, n: int = 4):
    """Trajectory state with index ``n`` in this module's counting."""
    return evolve(z, n + INDEX_SHIFT)


@dataclass(frozen=True)
class ArcExtrema:
    group: str
    min_sqrt_alpha: float
    at_alpha: complex
    max_inv_sqrt_xi: float
    at_xi: complex


def _extremum(piece: Piece, h: Callable[[np.ndarray], np.ndarray], nodes: int) -> tuple[float, float]:
    """Minimum of ``h`` over a piece: discrete scan, then golden section in the winning cells."""
    s = np.linspace(0.0, 1.0, nodes)
    vals = h(s)
    k = int(np.argmin(vals))
    lo, hi = s[max(k - 1, 0)], s[min(k + 1, nodes - 1)]
    sr = golden_min(lambda v: float(h(np.array([v]))[0]), float(lo), float(hi), 1e-13)
    vr = float(h(np.array([sr]))[0])
    return (vr, sr) if vr < vals[k] else (float(vals[k]), float(s[k]))


def arc_extrema(group: str, n: int = 4, nodes: int = 2001) -> ArcExtrema:
    """``min |alpha_n|^(1/2)`` and ``max |xi_n|^(-1/2)`` over an arc group."""
    best_a = (math.inf, 0j)
    best_x = (-math.inf, 0j)
    for piece in _pieces(group):
        sqrt_alpha = lambda s: np.abs(state(piece.z(s), n).alpha) ** 0.5
        neg_inv_sqrt_xi = lambda s: -(np.abs(state(piece.z(s), n).xi) ** -0.5)
        va, sa = _extremum(piece, sqrt_alpha, nodes)
        vx, sx = _extremum(piece, neg_inv_sqrt_xi, nodes)
        if va < best_a[0]:
            best_a = (va, complex(piece.z(sa)))
        if -vx > best_x[0]:
            best_x = (-vx, complex(piece.z(sx)))
    return ArcExtrema(group, best_a[0], best_a[1], best_x[0], best_x[1])


def delta_star(z, n0: int = 4, a: float | None = None, tol: float = 1e-13, max_terms: int = 200):
    """Majorant ``sum_{j >= n0} 1/|xi_j(z)|``: partial sum plus the geometric tail bound.

    ``a`` is the growth ratio used for the tail; it must satisfy
    ``1 + |xi_n0|^(-1/2) <= a < |alpha_n0|^(1/2)`` at every point.  When omitted,
    each point uses ratio just below its own upper limit.
    """
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    s = state(zs, n0)
    lo = 1.0 + np.abs(s.xi) ** -0.5
    hi = np.abs(s.alpha) ** 0.5
    if a is None:
        if np.any(lo >= hi):
            bad = zs[np.argmax(lo - hi)]
            raise ConditionError(f"tail condition fails at z={bad:.6g}")
        ratio = lo + 0.99 * (hi - lo)
    else:
        ok = (lo <= a) & (a < hi)
        if not np.all(ok):
            bad = zs[np.argmin(ok)]
            raise ConditionError(f"ratio a={a} not admissible at z={bad:.6g}")
        ratio = np.full(zs.shape, float(a))
    anchor = np.abs(s.xi)
    total = np.zeros(zs.shape)
    for k in range(max_terms):
        tail = ratio ** (-k) / (anchor * (1.0 - 1.0 / ratio))
        if np.max(tail) < tol:
            break
        total += 1.0 / np.abs(s.xi)
        s = step(s)
    else:
        raise ConditionError(f"tail above {tol} after {max_terms} terms")
    out = total + tail
    return float(out[0]) if np.ndim(z) == 0 else out


_GL_NODES = 8


def _gauss_legendre(f: Callable[[np.ndarray], np.ndarray], panels: int) -> float:
    x, w = np.polynomial.legendre.leggauss(_GL_NODES)
    edges = np.linspace(0.0, 1.0, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    s = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    return float(np.sum(ws * f(s)))


@dataclass(frozen=True)
class ContourIntegral:
    value: float
    error: float
    by_group: dict


def integral(
    weight: Callable[[np.ndarray], np.ndarray] | None = None,
    n0: int = 4,
    panels: int = 32,
    tol: float = 1e-3,
    max_panels: int = 1024,
    ratios: dict | None = None,
) -> ContourIntegral:
    """``int_Gamma delta*_n0(z) w(z) |dz|`` by composite Gauss-Legendre per piece.

    The panel count is doubled until successive values differ by less than
    ``tol``; that difference is reported as the error.  ``ratios`` overrides
    the tail ratio of individual arc groups.
    """
    chosen = {**DESIGNATED_RATIO, **(ratios or {})}
    by_group = {g: 0.0 for g in GROUPS}
    err = 0.0
    for piece in contour_pieces():
        a = chosen[piece.group]

        def f(s, piece=piece, a=a):
            z = piece.z(s)
            v = delta_star(z, n0, a) * piece.speed()
            return v if weight is None else v * weight(z)

        p = panels
        coarse = _gauss_legendre(f, p)
        while True:
            fine = _gauss_legendre(f, 2 * p)
            if abs(fine - coarse) < tol / len(contour_pieces()):
                break
            p *= 2
            if 2 * p > max_panels:
                raise QuadratureError(f"{piece.name}: no convergence with {max_panels} panels")
            coarse = fine
        by_group[piece.group] += fine
        err += abs(fine - coarse)
    return ContourIntegral(sum(by_group.values()), err, by_group)


def integral_B(**kw) -> ContourIntegral:
    return integral(None, **kw)


def integral_B1(**kw) -> ContourIntegral:
    return integral(lambda z: 1.0 / np.abs(z - 1.0) ** 2, **kw)


def alpha_derivative(t: float, n: int = 4) -> float:
    return state(seed(float(t)), n).alpha.d1


def min_t3_alpha_pp(n: int = 4) -> tuple[float, float]:
    """Minimum of ``t^3 alpha_n''(t)`` over ``[1, 2]`` and where it is attained."""
    f = lambda t: t**3 * state(seed(t), n).alpha.d2
    t = scan_min(f, 1.0, 2.0, n=201)
    return f(t), t


def A_contour(n: int = 4) -> float:
    """The constant ``min t^3 alpha_n''`` on ``[1, 2]``; distinct from the main intercept ``A``."""
    return min_t3_alpha_pp(n)[0]


def winding_number(f: Callable[[np.ndarray], np.ndarray], nodes: int = 4000, max_nodes: int = 256_000) -> int:
    """Winding number of ``f(Gamma)`` around 0, by accumulated argument.

    Sampling is refined until every argument increment is below ``pi/4``.
    """
    while True:
        zs = np.concatenate([p.z(np.linspace(0.0, 1.0, nodes, endpoint=False)) for p in contour_pieces()])
        zs = np.append(zs, zs[0])
        w = f(zs)
        if np.min(np.abs(w)) < 1e-9:
            raise NearZeroError(f"|f| = {np.min(np.abs(w)):.3g} on the contour")
        inc = np.angle(w[1:] / w[:-1])
        if np.max(np.abs(inc)) < QUARTER:
            return int(round(float(np.sum(inc)) / (2 * math.pi)))
        nodes *= 2
        if nodes > max_nodes:
            raise NearZeroError("argument varies too fast to resolve")


DENOMINATOR_FACTORS: dict[str, np.polynomial.Polynomial] = {
    "z(z^2+1)": np.polynomial.Polynomial([0, 1, 0, 1]),
    "z^4+2z^2+z+1": np.polynomial.Polynomial([1, 1, 2, 0, 1]),
    "z^8+4z^6+2z^5+7z^4+4z^3+6z^2+2z+1": np.polynomial.Polynomial([1, 2, 6, 4, 7, 2, 4, 0, 1]),
}


def delta_direct(z, n0: int = 4, terms: int = 60):
    """Plain truncated sum ``sum_{n0 <= j < n0 + terms} 1/|xi_j(z)|`` (no tail)."""
    s = state(np.atleast_1d(np.asarray(z, dtype=complex)), n0)
    total = np.zeros(s.xi.shape)
    for _ in range(terms):
        total += 1.0 / np.abs(s.xi)
        s = step(s)
    return float(total[0]) if np.ndim(z) == 0 else total


def cauchy_bound(t: float, B: float) -> float:
    """``2^(3/2) B / (pi t^3)``, the majorant for second derivatives on ``[1, 2]``."""
    return 2**1.5 * B / (math.pi * t**3)


def alpha_derivative_sign_changes(n: int = 4, samples: int = 401) -> int:
    ts = np.linspace(1.0, 2.0, samples)
    d = state(seed(ts), n).alpha.d1
    return int(np.sum(np.sign(d[1:]) != np.sign(d[:-1])))

