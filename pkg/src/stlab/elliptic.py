"""Trace of Frobenius a_p = p + 1 - #E(F_p) for curves over Q.

Two routes: :func:`ec_ap_naive` enumerates the affine points, and
:func:`ec_ap` finds the group order inside the Hasse interval by
baby-step/giant-step on random points (Shanks-Mestre), also using the
quadratic twist when a point's order is too small to pin the answer.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .errors import BadReductionError, StlabError

#: Below this prime :func:`ec_ap` just enumerates points.
CROSSOVER = 256
#: Random points tried (alternating curve and twist) before giving up.
MAX_RETRIES = 64


@dataclass(frozen=True)
class EllipticCurve:
    """Long Weierstrass model y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6."""

    a1: int = 0
    a2: int = 0
    a3: int = 0
    a4: int = 0
    a6: int = 0
    discriminant: int = field(init=False)

    def __post_init__(self):
        b2, b4, b6, b8 = self.b_invariants
        disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        if disc == 0:
            raise ValueError(f"singular curve {self.coefficients}: discriminant is 0")
        object.__setattr__(self, "discriminant", disc)

    @property
    def coefficients(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b_invariants(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.coefficients
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def c_invariants(self) -> tuple[int, int]:
        b2, b4, b6, _ = self.b_invariants
        return b2 * b2 - 24 * b4, -(b2**3) + 36 * b2 * b4 - 216 * b6

    def short_model(self, p: int) -> tuple[int, int]:
        """(A, B) mod p with y^2 = x^3 + Ax + B isomorphic to this curve; p >= 5."""
        c4, c6 = self.c_invariants
        return (-27 * c4) % p, (-54 * c6) % p

    def has_good_reduction(self, p: int) -> bool:
        return self.discriminant % p != 0


def _check_good(curve: EllipticCurve, p: int) -> None:
    if curve.discriminant % p == 0:
        raise BadReductionError(p, curve.discriminant)


def ec_ap_naive(curve: EllipticCurve, p: int) -> int:
    """a_p by counting every affine point of the long model over F_p."""
    _check_good(curve, p)
    a1, a2, a3, a4, a6 = (c % p for c in curve.coefficients)
    xs = np.arange(p, dtype=np.int64)
    if p <= 3:
        x, y = np.meshgrid(xs, xs, indexing="ij")
        lhs = (y * y + a1 * x * y + a3 * y) % p
        rhs = (x * x * x + a2 * x * x + a4 * x + a6) % p
        affine = int(np.count_nonzero(lhs == rhs))
    else:
        # (2y + a1 x + a3)^2 = 4 rhs(x) + (a1 x + a3)^2, and y -> 2y + a1 x + a3 is a bijection
        roots = np.bincount(xs * xs % p, minlength=p)
        lin = (a1 * xs + a3) % p
        cubic = (((xs + a2) * xs % p + a4) * xs + a6) % p
        disc = (4 * cubic + lin * lin) % p
        affine = int(roots[disc].sum())
    return p + 1 - (affine + 1)


def sqrt_mod(n: int, p: int) -> int:
    """A square root of a quadratic residue ``n`` modulo an odd prime ``p`` (Tonelli-Shanks)."""
    n %= p
    if n == 0:
        return 0
    if p % 4 == 3:
        return pow(n, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(n, q, p), pow(n, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


# Points are (x, y) tuples; None is the point at infinity.


def _add(P, Q, A, p):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + A) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return x3, (lam * (x1 - x3) - y1) % p


def _neg(P, p):
    return None if P is None else (P[0], -P[1] % p)


def _mul(k, P, A, p):
    if k < 0:
        return _mul(-k, _neg(P, p), A, p)
    R = None
    while k:
        if k & 1:
            R = _add(R, P, A, p)
        P = _add(P, P, A, p)
        k >>= 1
    return R


def _random_point(A, B, p, rng):
    while True:
        x = rng.randrange(p)
        rhs = (x * x * x + A * x + B) % p
        if rhs == 0:
            return x, 0
        if pow(rhs, (p - 1) // 2, p) == 1:
            y = sqrt_mod(rhs, p)
            return x, y if rng.random() < 0.5 else (-y) % p


def _orders_in_interval(P, A, p, lo, hi):
    """All m in [lo, hi] with mP = O, or None when P's order is below the baby-step range."""
    width = hi - lo
    s = math.isqrt(width) + 1
    baby = {}
    R = None
    for r in range(s):
        if R in baby:
            return None
        baby[R] = r
        R = _add(R, P, A, p)
    giant = _neg(_mul(s, P, A, p), p)
    cur = _neg(_mul(lo, P, A, p), p)  # want jP = -lo*P
    found = []
    for i in range(s + 1):
        r = baby.get(cur)
        if r is not None:
            j = i * s + r
            if j <= width:
                found.append(lo + j)
        cur = _add(cur, giant, A, p)
    return found


def _nonresidue(p: int) -> int:
    d = 2
    while pow(d, (p - 1) // 2, p) != p - 1:
        d += 1
    return d


def ec_ap(curve: EllipticCurve, p: int, *, crossover: int = CROSSOVER, max_retries: int = MAX_RETRIES) -> int:
    """a_p for a prime of good reduction; agrees with :func:`ec_ap_naive`."""
    _check_good(curve, p)
    if p < max(crossover, 5):
        return ec_ap_naive(curve, p)
    A, B = curve.short_model(p)
    d = _nonresidue(p)
    twist = (A * d * d % p, B * d * d * d % p)
    h = math.isqrt(4 * p)
    lo, hi = p + 1 - h, p + 1 + h
    rng = random.Random(p * 1_000_003 + A * 1009 + B)
    for attempt in range(max_retries):
        on_twist = attempt % 2 == 1
        a_coef, b_coef = twist if on_twist else (A, B)
        P = _random_point(a_coef, b_coef, p, rng)
        found = _orders_in_interval(P, a_coef, p, lo, hi)
        if found is None or len(found) != 1:
            continue
        order = found[0]
        if on_twist:
            order = 2 * p + 2 - order
        return p + 1 - order
    raise StlabError(f"group order at p={p} still ambiguous after {max_retries} random points")
