"""Number-theoretic transforms over word-size primes and CRT reconstruction.

Each modulus is below 2**31 so that a product of two residues fits in an
unsigned 64-bit word. Five moduli give a reconstruction range of about
2**152, which is ample for signed 128-bit coefficient targets.
"""

from __future__ import annotations

import numba
import numpy as np

from .errors import ReconstructionOverflow

#: NTT-friendly primes c*2^e + 1 with e >= 24, all below 2**31.
MODULI = (2013265921, 2113929217, 1811939329, 2130706433, 998244353)


def _factor_small(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def primitive_root(p: int) -> int:
    factors = _factor_small(p - 1)
    g = 2
    while any(pow(g, (p - 1) // f, p) == 1 for f in factors):
        g += 1
    return g


def max_transform_size(p: int) -> int:
    return (p - 1) & -(p - 1)


def _root_table(n: int, p: int, w: int) -> np.ndarray:
    """Powers w^0 .. w^(n/2 - 1) mod p."""
    half = max(n // 2, 1)
    out = np.empty(half, dtype=np.uint64)
    out[0] = 1
    k = 1
    while k < half:
        out[k : 2 * k] = out[:k] * np.uint64(pow(w, k, p)) % np.uint64(p)
        k *= 2
    return out


@numba.njit(cache=True)
def _dif(a, p, w):
    # decimation in frequency: natural order in, bit-reversed out
    n = a.size
    h = n // 2
    step = 1
    while h >= 1:
        for start in range(0, n, 2 * h):
            for j in range(h):
                x = a[start + j]
                y = a[start + j + h]
                s = x + y
                if s >= p:
                    s -= p
                a[start + j] = s
                a[start + j + h] = (x + p - y) * w[j * step] % p
        h //= 2
        step *= 2


@numba.njit(cache=True)
def _dit(a, p, w):
    # decimation in time: bit-reversed in, natural order out
    n = a.size
    h = 1
    step = n // 2
    while h < n:
        for start in range(0, n, 2 * h):
            for j in range(h):
                x = a[start + j]
                y = a[start + j + h] * w[j * step] % p
                s = x + y
                if s >= p:
                    s -= p
                d = x + p - y
                if d >= p:
                    d -= p
                a[start + j] = s
                a[start + j + h] = d
        h *= 2
        step //= 2


class Transform:
    """Forward/inverse NTT of a fixed power-of-two size modulo one prime."""

    def __init__(self, size: int, p: int):
        if size & (size - 1) or size < 2:
            raise ValueError(f"transform size must be a power of two >= 2, got {size}")
        if max_transform_size(p) < size:
            raise ValueError(f"modulus {p} does not support transforms of size {size}")
        g = primitive_root(p)
        w = pow(g, (p - 1) // size, p)
        self.size = size
        self.p = p
        self._fwd = _root_table(size, p, w)
        self._inv = _root_table(size, p, pow(w, -1, p))
        self._n_inv = np.uint64(pow(size, -1, p))

    def square_truncated(self, a: np.ndarray, length: int) -> np.ndarray:
        """First ``length`` coefficients of a*a mod p (a is a residue vector)."""
        if 2 * a.size - 1 > self.size:
            raise ValueError("transform too small for an exact square")
        buf = np.zeros(self.size, dtype=np.uint64)
        buf[: a.size] = a
        pp = np.uint64(self.p)
        _dif(buf, pp, self._fwd)
        buf = buf * buf % pp
        _dit(buf, pp, self._inv)
        out = buf[:length] * self._n_inv % pp
        return out

    def multiply_truncated(self, a: np.ndarray, b: np.ndarray, length: int) -> np.ndarray:
        if a.size + b.size - 1 > self.size:
            raise ValueError("transform too small for an exact product")
        pp = np.uint64(self.p)
        fa = np.zeros(self.size, dtype=np.uint64)
        fb = np.zeros(self.size, dtype=np.uint64)
        fa[: a.size] = a
        fb[: b.size] = b
        _dif(fa, pp, self._fwd)
        _dif(fb, pp, self._fwd)
        fa = fa * fb % pp
        _dit(fa, pp, self._inv)
        return fa[:length] * self._n_inv % pp


def crt_balanced(residues: list[np.ndarray], moduli: tuple[int, ...], bound: int | None = None) -> list[int]:
    """Reconstruct signed integers from residues by Garner's algorithm.

    Values are returned in the balanced range ``(-M/2, M/2]`` with ``M`` the
    product of ``moduli``. When ``bound`` is given, ``2*bound < M`` is
    required up front and every result is checked against it afterwards;
    either failure raises :class:`ReconstructionOverflow`.
    """
    m_total = 1
    for m in moduli:
        m_total *= m
    if bound is not None and 2 * bound >= m_total:
        raise ReconstructionOverflow(
            f"CRT range {m_total.bit_length()} bits cannot hold values up to {bound.bit_length()} bits"
        )
    digits: list[np.ndarray] = []
    for i, mi in enumerate(moduli):
        mm = np.uint64(mi)
        t = residues[i].astype(np.uint64) % mm
        for j in range(i):
            dj = digits[j] % mm
            t = (t + mm - dj) % mm
            t = t * np.uint64(pow(moduli[j], -1, mi)) % mm
        digits.append(t)
    # mixed radix -> integer, innermost digit first
    value = digits[-1].astype(object)
    for i in range(len(moduli) - 2, -1, -1):
        value = value * moduli[i] + digits[i].astype(object)
    half = m_total // 2
    out = [int(v) - m_total if v > half else int(v) for v in value]
    if bound is not None:
        for n, v in enumerate(out):
            if abs(v) > bound:
                raise ReconstructionOverflow(f"reconstructed value at index {n} exceeds bound {bound}")
    return out
