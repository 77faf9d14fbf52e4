"""Bracketed scalar root finding and minimisation."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

__all__ = ["RootNotBracketed", "safe_newton", "golden_min", "golden_min_vec", "scan_min"]

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class RootNotBracketed(ValueError):
    """Function values at the interval ends do not differ in sign."""


def safe_newton(
    fdf: Callable[[float], tuple[float, float]],
    lo: float,
    hi: float,
    xtol: float = 4e-16,
    max_iter: int = 200,
) -> float:
    """Root of ``f`` in ``[lo, hi]`` by Newton steps guarded with bisection.

    ``fdf(x)`` returns ``(f(x), f'(x))``.  The bracket shrinks every iteration,
    so the method converges whenever ``f(lo)`` and ``f(hi)`` differ in sign.
    """
    flo, _ = fdf(lo)
    fhi, _ = fdf(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise RootNotBracketed(f"f({lo})={flo:.3g} and f({hi})={fhi:.3g} share a sign")
    if flo > 0:
        lo, hi = hi, lo  # keep f(lo) < 0
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx, dfx = fdf(x)
        if fx == 0:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        step_ok = dfx != 0 and math.isfinite(dfx)
        if step_ok:
            xn = x - fx / dfx
            step_ok = min(lo, hi) < xn < max(lo, hi)
        if not step_ok:
            xn = 0.5 * (lo + hi)
        tol = xtol * max(1.0, abs(xn))
        if abs(xn - x) <= tol or abs(hi - lo) <= tol:
            return xn
        x = xn
    return x


def golden_min(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """Minimiser of a unimodal ``f`` on ``[lo, hi]`` by golden-section search."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol * max(1.0, abs(a) + abs(b)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return c if fc <= fd else d


def golden_min_vec(
    f: Callable[[np.ndarray], np.ndarray], lo: np.ndarray, hi: np.ndarray, iters: int = 60
) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise golden-section search; ``f`` maps an array of abscissas to values.

    Returns the final abscissas and their values.
    """
    a = np.asarray(lo, dtype=float).copy()
    b = np.asarray(hi, dtype=float).copy()
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc <= fd
        # left: minimum in [a, d]; right: minimum in [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        nc = np.where(left, b - INV_PHI * (b - a), d)
        nd = np.where(left, c, a + INV_PHI * (b - a))
        fnew = f(np.where(left, nc, nd))
        fc, fd = np.where(left, fnew, fd), np.where(left, fc, fnew)
        c, d = nc, nd
    x = np.where(fc <= fd, c, d)
    return x, np.minimum(fc, fd)


def scan_min(f: Callable[[float], float], lo: float, hi: float, n: int = 65, tol: float = 1e-12) -> float:
    """Global minimiser on a uniform scan, polished by golden section in the winning cell."""
    xs = np.linspace(lo, hi, n)
    fs = [f(float(x)) for x in xs]
    k = int(np.argmin(fs))
    a = xs[max(k - 1, 0)]
    b = xs[min(k + 1, n - 1)]
    x = golden_min(f, float(a), float(b), tol)
    return x if f(x) <= fs[k] else float(xs[k])
