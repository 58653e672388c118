"""Segmented sieve of Eratosthenes and dyadic-window prime counts."""

from __future__ import annotations

import math

import numpy as np

from .errors import CapacityError

#: Largest ``hi`` accepted by :func:`sieve_primes` unless overridden.
SIEVE_LIMIT = 10**12
#: Numbers covered by one sieve segment.
SEGMENT_SIZE = 1 << 18


def _small_primes(limit: int) -> np.ndarray:
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def iter_segments(lo: int, hi: int, segment_size: int = SEGMENT_SIZE, limit: int = SIEVE_LIMIT):
    """Yield int64 arrays of the primes in ``[lo, hi]``, one per segment, ascending."""
    if hi > limit:
        raise CapacityError(f"sieve bound {hi} exceeds configured limit {limit}")
    lo = max(lo, 2)
    if lo > hi:
        return
    base = _small_primes(math.isqrt(hi))
    start = lo
    while start <= hi:
        stop = min(start + segment_size, hi + 1)  # exclusive
        mask = np.ones(stop - start, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= stop:
                break
            first = max(p * p, -(-start // p) * p)
            mask[first - start :: p] = False
        yield np.flatnonzero(mask).astype(np.int64) + start
        start = stop


def sieve_primes(lo: int, hi: int, *, segment_size: int = SEGMENT_SIZE, limit: int = SIEVE_LIMIT) -> list[int]:
    """Return the primes in ``[lo, hi]`` in ascending order.

    Memory use is bounded by ``segment_size`` plus the base primes up to
    ``sqrt(hi)``. An empty list is returned when ``lo > hi``.

    >>> sieve_primes(2, 10)
    [2, 3, 5, 7]
    """
    out: list[int] = []
    for seg in iter_segments(lo, hi, segment_size, limit):
        out.extend(seg.tolist())
    return out


def prime_array(lo: int, hi: int, **kwargs) -> np.ndarray:
    segs = list(iter_segments(lo, hi, **kwargs))
    return np.concatenate(segs) if segs else np.empty(0, dtype=np.int64)


def count_primes(lo: int, hi: int, **kwargs) -> int:
    return sum(int(seg.size) for seg in iter_segments(lo, hi, **kwargs))


def prime_window_count(x: int, **kwargs) -> int:
    """Number of primes ``p`` with ``x < p <= 2x``, i.e. pi(2x) - pi(x)."""
    if x < 2:
        raise CapacityError(f"window base x must be >= 2, got {x}")
    return count_primes(x + 1, 2 * x, **kwargs)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all 64-bit ``n``."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True
