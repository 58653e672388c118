"""Ramanujan's tau function by NTT powering of the Jacobi cube series.

``q * prod (1 - q^n)^24`` is obtained from the sparse series

    prod (1 - q^n)^3 = sum_{k>=0} (-1)^k (2k+1) q^{k(k+1)/2}

by squaring three times (3 -> 6 -> 12 -> 24) modulo each prime in
:data:`stlab.ntt.MODULI`, then recombining the residues by CRT.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import CapacityError
from .ntt import MODULI, Transform, crt_balanced
from .parallel import map_ordered

#: Default upper limit for :func:`tau_table`.
TAU_CAP = 4_000_000


def jacobi_cube_residues(length: int, p: int) -> np.ndarray:
    """Coefficients of prod (1-q^n)^3 up to q^(length-1), reduced mod p."""
    out = np.zeros(length, dtype=np.uint64)
    k = 0
    while k * (k + 1) // 2 < length:
        c = (2 * k + 1) % p
        out[k * (k + 1) // 2] = c if k % 2 == 0 else (p - c) % p
        k += 1
    return out


def _eta24_residues(args: tuple[int, int]) -> np.ndarray:
    length, p = args
    size = 1
    while size < 2 * length - 1:
        size *= 2
    tr = Transform(max(size, 2), p)
    series = jacobi_cube_residues(length, p)
    for _ in range(3):
        series = tr.square_truncated(series, length)
    return series


def tau_bound(n: int) -> int:
    """Crude bound |tau(m)| <= 2 m^6 for all m <= n (Deligne with d(m) <= 2 sqrt(m))."""
    return 2 * n**6


def tau_table(n_max: int, *, cap: int = TAU_CAP, workers: int = 1) -> list[int]:
    """Exact values of tau(n) for 0 <= n <= n_max, with ``tau[0] = 0``.

    The five moduli are processed independently and may be spread over
    ``workers`` processes; the result does not depend on ``workers``.
    """
    if n_max < 1:
        raise CapacityError(f"n_max must be >= 1, got {n_max}")
    if n_max > cap:
        raise CapacityError(f"n_max={n_max} exceeds tau cap {cap}")
    # tau(n) is the coefficient of q^(n-1) in prod (1-q^m)^24
    residues = map_ordered(_eta24_residues, [(n_max, p) for p in MODULI], workers=workers, processes=True)
    values = crt_balanced(residues, MODULI, bound=tau_bound(n_max))
    return [0] + values


def tau_schoolbook(n_max: int) -> list[int]:
    """Reference expansion of q * prod_{m<=n_max} (1-q^m)^24 by schoolbook products.

    Quadratic in ``n_max``; used to check :func:`tau_table`.
    """
    length = n_max
    euler = [0] * length
    euler[0] = 1
    for m in range(1, length):
        for j in range(length - 1, m - 1, -1):
            euler[j] -= euler[j - m]
    base = np.array(euler, dtype=object)

    def mul(a, b):
        out = np.zeros(length, dtype=object)
        for i in range(length):
            if a[i]:
                out[i:] += a[i] * b[: length - i]
        return out

    p2 = mul(base, base)
    p4 = mul(p2, p2)
    p8 = mul(p4, p4)
    p16 = mul(p8, p8)
    p24 = mul(p16, p8)
    return [0] + [int(v) for v in p24]


def hecke_violations(tau: list[int], limit: int = 20) -> list[str]:
    """Check tau(mn) = tau(m) tau(n) for coprime m, n and tau(p^2) = tau(p)^2 - p^11.

    ``tau`` is indexed as returned by :func:`tau_table`. At most ``limit``
    failures are described.
    """
    from math import gcd

    from .primes import sieve_primes

    n_max = len(tau) - 1
    bad: list[str] = []
    if n_max >= 1 and tau[1] != 1:
        bad.append(f"tau(1) = {tau[1]}")
    for m in range(2, n_max // 2 + 1):
        for n in range(m + 1, n_max // m + 1):
            if gcd(m, n) == 1 and tau[m * n] != tau[m] * tau[n]:
                bad.append(f"tau({m * n}) != tau({m}) tau({n})")
                if len(bad) >= limit:
                    return bad
    for p in sieve_primes(2, math.isqrt(n_max)):
        if tau[p * p] != tau[p] ** 2 - p**11:
            bad.append(f"tau({p}^2) != tau({p})^2 - {p}^11")
            if len(bad) >= limit:
                break
    return bad
