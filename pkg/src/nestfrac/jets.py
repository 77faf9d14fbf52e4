"""Second-order forward-mode differentiation in one variable.

A :class:`Jet2` carries a value together with its first and second derivative
with respect to a single seed variable.  Components may be real floats, complex
numbers or numpy arrays; arithmetic follows the ordinary chain rule so that any
expression built from ``+ - * /``, integer powers, ``log``, ``exp`` and
``sqrt`` yields exact derivatives up to rounding.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

__all__ = ["Jet2", "seed", "const", "log", "exp", "sqrt", "apply_log", "value", "lift"]


def _is_complex(x: Any) -> bool:
    if isinstance(x, np.ndarray):
        return np.iscomplexobj(x)
    return isinstance(x, complex)


def _log(x):
    if isinstance(x, np.ndarray):
        return np.log(x)
    if isinstance(x, complex):
        return cmath.log(x)
    if x <= 0:
        raise ValueError(f"log of non-positive real {x!r}")
    return math.log(x)


def _exp(x):
    if isinstance(x, np.ndarray):
        return np.exp(x)
    if isinstance(x, complex):
        return cmath.exp(x)
    return math.exp(x)


def _sqrt(x):
    if isinstance(x, np.ndarray):
        return np.sqrt(x)
    if isinstance(x, complex):
        return cmath.sqrt(x)
    if x < 0:
        raise ValueError(f"sqrt of negative real {x!r}")
    return math.sqrt(x)


def _is_zero(x) -> bool:
    if isinstance(x, np.ndarray):
        return bool(np.any(x == 0))
    return x == 0


@dataclass(frozen=True, slots=True)
class Jet2:
    """Value ``v`` with raw first and second derivatives ``d1`` and ``d2``."""

    v: Any
    d1: Any = 0.0
    d2: Any = 0.0

    @property
    def is_complex(self) -> bool:
        return _is_complex(self.v) or _is_complex(self.d1) or _is_complex(self.d2)

    def __add__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.v + other.v, self.d1 + other.d1, self.d2 + other.d2)
        return Jet2(self.v + other, self.d1, self.d2)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.v, -self.d1, -self.d2)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.v - other.v, self.d1 - other.d1, self.d2 - other.d2)
        return Jet2(self.v - other, self.d1, self.d2)

    def __rsub__(self, other):
        return Jet2(other - self.v, -self.d1, -self.d2)

    def __mul__(self, other):
        if isinstance(other, Jet2):
            return Jet2(
                self.v * other.v,
                self.d1 * other.v + self.v * other.d1,
                self.d2 * other.v + 2 * self.d1 * other.d1 + self.v * other.d2,
            )
        return Jet2(self.v * other, self.d1 * other, self.d2 * other)

    __rmul__ = __mul__

    def reciprocal(self) -> Jet2:
        if _is_zero(self.v):
            raise ZeroDivisionError("reciprocal of a jet with zero value")
        r = 1 / self.v
        r2 = r * r
        return Jet2(r, -self.d1 * r2, (2 * self.d1 * self.d1 * r - self.d2) * r2)

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            return self * other.reciprocal()
        if _is_zero(other):
            raise ZeroDivisionError("jet divided by zero")
        return Jet2(self.v / other, self.d1 / other, self.d2 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("Jet2 supports integer powers only; use exp/log")
        if k == 0:
            return Jet2(self.v * 0 + 1, self.d1 * 0, self.d2 * 0)
        if k < 0:
            return self.reciprocal() ** (-k)
        vk1 = self.v ** (k - 1)
        vk2 = self.v ** (k - 2) if k >= 2 else 0
        return Jet2(
            vk1 * self.v,
            k * vk1 * self.d1,
            k * vk1 * self.d2 + k * (k - 1) * vk2 * self.d1 * self.d1,
        )

    def conjugate(self) -> Jet2:
        return Jet2(np.conj(self.v), np.conj(self.d1), np.conj(self.d2))

    def __repr__(self) -> str:
        return f"Jet2({self.v!r}, {self.d1!r}, {self.d2!r})"


def seed(t) -> Jet2:
    """Independent variable ``t`` (derivative one)."""
    one = t * 0 + 1
    return Jet2(t, one, t * 0)


def const(c) -> Jet2:
    return Jet2(c, c * 0, c * 0)


def lift(x) -> Jet2:
    return x if isinstance(x, Jet2) else const(x)


def value(x):
    """Plain value of a jet, or ``x`` itself."""
    return x.v if isinstance(x, Jet2) else x


def log(x):
    if not isinstance(x, Jet2):
        return _log(x)
    if _is_zero(x.v):
        raise ValueError("log of a jet with zero value")
    r = 1 / x.v
    return Jet2(_log(x.v), x.d1 * r, (x.d2 - x.d1 * x.d1 * r) * r)


def exp(x):
    if not isinstance(x, Jet2):
        return _exp(x)
    e = _exp(x.v)
    return Jet2(e, e * x.d1, e * (x.d2 + x.d1 * x.d1))


def sqrt(x):
    if not isinstance(x, Jet2):
        return _sqrt(x)
    s = _sqrt(x.v)
    if _is_zero(s):
        raise ValueError("sqrt of a jet is not differentiable at zero")
    h = 1 / (2 * s)
    return Jet2(s, x.d1 * h, (x.d2 - x.d1 * x.d1 * h * h * 2) * h)


apply_log = log
