"""Sato-Tate angles, the semicircle measure and Chebyshev polynomials U_n."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DeligneViolation

#: Endpoint tolerance for interval membership, biased toward inclusion.
MEMBERSHIP_TOL = 1e-12


def deligne_ok(p: int, a: int, k: int) -> bool:
    return a * a <= 4 * p ** (k - 1)


@dataclass(frozen=True)
class AngleSample:
    p: int
    a: int
    t: float
    theta: float


@dataclass(frozen=True)
class Interval:
    """Closed subinterval [lo, hi] of [-1, 1]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"interval endpoints must be finite: [{self.lo}, {self.hi}]")
        if not -1.0 <= self.lo <= self.hi <= 1.0:
            raise ValueError(f"need -1 <= lo <= hi <= 1, got [{self.lo}, {self.hi}]")

    def contains(self, t):
        """Membership with :data:`MEMBERSHIP_TOL` slack at both ends; works on arrays."""
        return (t >= self.lo - MEMBERSHIP_TOL) & (t <= self.hi + MEMBERSHIP_TOL)


def normalized_t(p: int, a: int, k: int) -> float:
    """cos(theta_p) = a / (2 p^((k-1)/2)), after an exact Deligne check."""
    if not deligne_ok(p, a, k):
        raise DeligneViolation(p, a, k)
    if a == 0:
        return 0.0
    if k == 2:
        return a / (2.0 * math.sqrt(p))
    # log domain: p^((k-1)/2) overflows floats for large weight
    mag = math.exp(math.log(abs(a)) - math.log(2.0) - 0.5 * (k - 1) * math.log(p))
    t = math.copysign(mag, a)
    return min(1.0, max(-1.0, t))


def normalize(p: int, a: int, k: int) -> AngleSample:
    t = normalized_t(p, a, k)
    return AngleSample(p=p, a=a, t=t, theta=math.acos(t))


def st_cdf(t):
    """Sato-Tate distribution function F(t) = 1/2 + (t sqrt(1-t^2) + arcsin t)/pi."""
    t = np.clip(t, -1.0, 1.0)
    return 0.5 + (t * np.sqrt(1.0 - t * t) + np.arcsin(t)) / np.pi


def _st_primitive(t: float) -> float:
    # pi * (F(t) - 1/2); dropping the constant keeps short intervals free of cancellation
    t = min(1.0, max(-1.0, t))
    return t * math.sqrt(1.0 - t * t) + math.asin(t)


def mu_st(interval: Interval) -> float:
    """Sato-Tate measure of a closed interval, from the closed-form antiderivative."""
    if interval.lo == -1.0 and interval.hi == 1.0:
        return 1.0
    if interval.lo == -interval.hi:
        return 2.0 * _st_primitive(interval.hi) / math.pi
    return (_st_primitive(interval.hi) - _st_primitive(interval.lo)) / math.pi


def mu_st_central(delta: float) -> float:
    """Measure of [-delta, delta]; approximately (4/pi) delta for small delta."""
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    return mu_st(Interval(-delta, delta))


def chebyshev_u(n: int, t: float) -> float:
    """U_n(t) by the three-term recurrence."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n == 0:
        return 1.0
    prev, cur = 1.0, 2.0 * t
    for _ in range(n - 1):
        prev, cur = cur, 2.0 * t * cur - prev
    return cur


def chebyshev_u_rows(n_max: int, t: np.ndarray):
    """Yield (n, U_n(t)) for n = 0..n_max, vectorized over the array ``t``."""
    t = np.asarray(t, dtype=float)
    prev = np.ones_like(t)
    yield 0, prev
    if n_max == 0:
        return
    cur = 2.0 * t
    yield 1, cur
    for n in range(2, n_max + 1):
        prev, cur = cur, 2.0 * t * cur - prev
        yield n, cur
