"""Counting statistics over coefficient tables and the bound shapes they are compared with.

Every count works on a dyadic window x < p <= 2x unless it says otherwise.
Implied constants of the asymptotic bounds default to 1 and are recorded in
the report parameters; reports give observed/bound ratios and never claim a
bound is verified.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .angles import Interval, chebyshev_u_rows, mu_st, st_cdf
from .errors import DomainError
from .forms import CoefficientTable
from .parallel import map_ordered
from .primes import count_primes, prime_window_count
from .report_io import format_number

log = logging.getLogger(__name__)

#: Relative width of the band in which float threshold comparisons are redone in high precision.
GUARD_BAND = 1e-9
#: Table entries per reduction chunk; fixed so results never depend on worker count.
CHUNK = 1 << 15
DYADIC = "dyadic"
CUMULATIVE = "cumulative"


def _param(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, str):
        return value
    return format_number(value)


@dataclass
class CensusReport:
    form_label: str
    x: int
    mode: str
    observed: int
    bound_shape: float
    params: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.observed < 0:
            raise ValueError("observed count must be >= 0")
        self.bound_shape = float(self.bound_shape)
        self.params = {str(k): _param(v) for k, v in self.params.items()}

    @property
    def ratio(self) -> float | None:
        return self.observed / self.bound_shape if self.bound_shape > 0 else None

    def to_dict(self) -> dict:
        return {
            "form_label": self.form_label,
            "window": {"x": self.x, "mode": self.mode},
            "observed": self.observed,
            "bound_shape": self.bound_shape,
            "ratio": self.ratio,
            "params": dict(self.params),
        }


def _report(table: CoefficientTable, x: int, mode: str, observed: int, bound_shape: float, **params) -> CensusReport:
    base = {"k": table.weight, "q": table.level, "squarefree_level": table.spec.squarefree_level,
            "max_prime": table.max_prime}
    if table.warnings:
        base["warnings"] = "; ".join(table.warnings)
    base.update(params)
    return CensusReport(table.label, x, mode, int(observed), bound_shape, base)


def _chunks(i: int, j: int) -> list[tuple[int, int]]:
    return [(s, min(s + CHUNK, j)) for s in range(i, j, CHUNK)]


def _reduce_int(fn, i, j, workers):
    return sum(map_ordered(fn, _chunks(i, j), workers=workers))


def kq_log(k: int, q: int, x: float) -> float:
    """log(k q log x), the recurring scale factor of the uniform bounds."""
    return math.log(k * q * math.log(x))


# -- interval counts -------------------------------------------------------


def pi_f_I(table: CoefficientTable, x: int, interval: Interval, *, workers: int = 1) -> int:
    """#{x < p <= 2x : p not dividing q, cos(theta_p) in interval}."""
    i, j = table.window(x)
    t = table.t
    return _reduce_int(lambda c: int(np.count_nonzero(interval.contains(t[c[0]:c[1]]))), i, j, workers)


def sato_tate_report(table: CoefficientTable, x: int, interval: Interval, *, workers: int = 1) -> CensusReport:
    """Observed interval count against (window size) * mu_ST(interval).

    The window size is the number of primes in (x, 2x] not dividing the
    level; ``pi_window`` records pi(2x) - pi(x) over all primes.
    """
    observed = pi_f_I(table, x, interval, workers=workers)
    i, j = table.window(x)
    window = j - i
    measure = mu_st(interval)
    expected = window * measure
    k, q = table.weight, table.level
    return _report(
        table, x, DYADIC, observed, expected,
        interval_lo=interval.lo, interval_hi=interval.hi, mu_st=measure,
        window_primes=window, pi_window=prime_window_count(x),
        error_scale=kq_log(k, q, x) / math.sqrt(math.log(x)),
        deviation=abs(observed - expected) / window if window else None,
    )


# -- Atkin-Serre -------------------------------------------------------------


def atkin_serre_threshold(p: float) -> float:
    """log log p / sqrt(log p): the per-prime smallness threshold for cos(theta_p)."""
    lp = math.log(p)
    return math.log(lp) / math.sqrt(lp)


def proof_threshold(k: int, q: int, x: float) -> float:
    """log(kq log x)/sqrt(log x): the window-wide threshold used in the counting argument."""
    return kq_log(k, q, x) / math.sqrt(math.log(x))


def _exact_small(a: int, p: int, k: int, variant: str, k_q_x) -> bool:
    """High-precision decision of |a| <= 2 p^((k-1)/2) L for comparisons inside the guard band."""
    with mpmath.workdps(60):
        lhs = abs(mpmath.mpf(a))
        scale = 2 * mpmath.power(p, mpmath.mpf(k - 1) / 2)
        if variant == "theorem":
            lp = mpmath.log(p)
            return lhs * mpmath.sqrt(lp) <= scale * mpmath.log(lp)
        kk, qq, xx = k_q_x
        lx = mpmath.log(xx)
        return lhs * mpmath.sqrt(lx) <= scale * mpmath.log(kk * qq * lx)


def atkin_serre_census(table: CoefficientTable, x: int, variant: str = "theorem", *, c1: float = 1.0,
                       workers: int = 1) -> CensusReport:
    """Count window primes with a small coefficient.

    ``variant="theorem"`` uses |a_f(p)| <= 2 p^((k-1)/2) log log p / sqrt(log p);
    ``variant="proof"`` uses |cos theta_p| <= log(kq log x)/sqrt(log x) for the
    whole window. The bound shape is c1 * x log(kq log x) / (log x)^(3/2).
    """
    if variant not in ("theorem", "proof"):
        raise DomainError(f"variant must be 'theorem' or 'proof', got {variant!r}")
    if x < 16:
        raise DomainError(f"x must be ≥ 16 (got {x})")
    if c1 <= 0:
        raise DomainError("c1 must be > 0")
    k, q = table.weight, table.level
    i, j = table.window(x)
    t = np.abs(table.t)
    primes = table.primes
    coeffs = table.coefficients
    fixed = proof_threshold(k, q, x)

    def chunk(c):
        lo, hi = c
        if variant == "theorem":
            lp = np.log(primes[lo:hi].astype(float))
            thr = np.log(lp) / np.sqrt(lp)
        else:
            thr = np.full(hi - lo, fixed)
        tt = t[lo:hi]
        small = tt <= thr
        band = np.flatnonzero(np.abs(tt - thr) <= GUARD_BAND * thr)
        for b in band:
            idx = lo + int(b)
            small[b] = _exact_small(coeffs[idx], int(primes[idx]), k, variant, (k, q, x))
        return int(np.count_nonzero(small)), len(band)

    parts = map_ordered(chunk, _chunks(i, j), workers=workers)
    observed = sum(c for c, _ in parts)
    band_hits = sum(b for _, b in parts)
    if band_hits:
        log.warning("%d threshold comparisons fell inside the %g guard band and were decided in high precision",
                    band_hits, GUARD_BAND)
    window = j - i
    bound = c1 * x * kq_log(k, q, x) / math.log(x) ** 1.5
    return _report(
        table, x, DYADIC, observed, bound,
        variant=variant, c1=c1, window_primes=window,
        bound_over_window=bound / window if window else None,
        bound_vacuous=window > 0 and bound >= window,
        guard_band=GUARD_BAND, guard_band_hits=band_hits,
        threshold_at_x=atkin_serre_threshold(x) if variant == "theorem" else fixed,
    )


def atkin_serre_density(table: CoefficientTable, X: int, eps: float, c: float = 1.0, *,
                        workers: int = 1) -> CensusReport:
    """Count p <= X with |a_f(p)| >= c p^((k-3)/2 - eps); the ratio is the fraction of all primes."""
    if X < 16:
        raise DomainError(f"X must be ≥ 16 (got {X})")
    if eps <= 0 or c <= 0:
        raise DomainError("eps and c must be > 0")
    k = table.weight
    i, j = table.upto(X)
    expo = (k - 3) / 2 - eps
    primes = table.primes
    coeffs = table.coefficients
    log_c = math.log(c)

    def chunk(cb):
        lo, hi = cb
        hits = band = 0
        for idx in range(lo, hi):
            a = coeffs[idx]
            if a == 0:
                continue
            p = int(primes[idx])
            diff = math.log(abs(a)) - (log_c + expo * math.log(p))
            if abs(diff) <= GUARD_BAND:
                band += 1
                with mpmath.workdps(60):
                    ok = abs(mpmath.mpf(a)) >= c * mpmath.power(p, expo)
            else:
                ok = diff >= 0
            hits += ok
        return hits, band

    parts = map_ordered(chunk, _chunks(i, j), workers=workers)
    observed = sum(h for h, _ in parts)
    pi_x = count_primes(2, X)
    max_threshold = c * 2.0**expo if expo <= 0 else math.inf
    return _report(
        table, X, CUMULATIVE, observed, float(pi_x),
        eps=eps, c=c, exponent=expo, pi_X=pi_x, table_primes=j - i,
        fraction=observed / pi_x, failures=(j - i) - observed,
        threshold_at_most_one=max_threshold <= 1.0,
        guard_band_hits=sum(b for _, b in parts),
    )


# -- extremal primes ---------------------------------------------------------


def floor_extremal_value(p: int, k: int) -> int:
    """floor(2 p^((k-1)/2)) as the exact integer square root of 4 p^(k-1)."""
    return math.isqrt(4 * p ** (k - 1))


def extremal_conjecture_value(X: float) -> float:
    """(8/(3 pi)) X^(1/4) / log X, the predicted count of p <= X with a_E(p) = floor(2 sqrt p)."""
    return 8.0 / (3.0 * math.pi) * X**0.25 / math.log(X)


def extremal_census(table: CoefficientTable, x: int | None = None, *, upto: int | None = None,
                    c3: float = 1.0) -> CensusReport:
    """Count primes with |a_f(p)| = floor(2 p^((k-1)/2)).

    Give exactly one of ``x`` (dyadic window, bound c3 x (log(kq log x))^2/(log x)^2)
    or ``upto`` (all p <= upto; for weight 2 compared with the conjectured count).
    """
    if (x is None) == (upto is None):
        raise DomainError("give exactly one of x (dyadic) or upto (cumulative)")
    k, q = table.weight, table.level
    mask = table.extremal
    if x is not None:
        if x < 16:
            raise DomainError(f"x must be ≥ 16 (got {x})")
        i, j = table.window(x)
        observed = int(np.count_nonzero(mask[i:j]))
        bound = c3 * x * kq_log(k, q, x) ** 2 / math.log(x) ** 2
        return _report(table, x, DYADIC, observed, bound, c3=c3, window_primes=j - i)
    if upto < 2:
        raise DomainError(f"upto must be >= 2 (got {upto})")
    i, j = table.upto(upto)
    observed = int(np.count_nonzero(mask[i:j]))
    positive = sum(1 for idx in range(i, j) if mask[idx] and table.coefficients[idx] > 0)
    params = {"table_primes": j - i, "observed_positive": positive}
    if k == 2:
        conj = extremal_conjecture_value(upto)
        params.update(conjecture_value=conj, ratio_positive=positive / conj)
        bound = conj
    else:
        params["conjecture_value"] = None
        bound = 0.0
    return _report(table, upto, CUMULATIVE, observed, bound, **params)


# -- Chebyshev sums -----------------------------------------------------------


def chebyshev_sums(table: CoefficientTable, x: int, n_max: int, *, workers: int = 1) -> list[float]:
    """[S_0, ..., S_n_max] with S_n = sum over the window of U_n(cos theta_p)."""
    if n_max < 0:
        raise DomainError(f"n must be >= 0, got {n_max}")
    i, j = table.window(x)
    t = table.t

    def chunk(c):
        return [math.fsum(row) for _, row in chebyshev_u_rows(n_max, t[c[0]:c[1]])]

    parts = map_ordered(chunk, _chunks(i, j), workers=workers)
    if not parts:
        return [0.0] * (n_max + 1)
    return [math.fsum(part[n] for part in parts) for n in range(n_max + 1)]


def chebyshev_sum(table: CoefficientTable, x: int, n: int, *, workers: int = 1) -> float:
    return chebyshev_sums(table, x, n, workers=workers)[n]


def lemma22_range(x: float, k: int, q: int) -> float:
    """sqrt(log x)/sqrt(log(kq log x)), the largest n for which the sum bound is stated."""
    return math.sqrt(math.log(x)) / math.sqrt(kq_log(k, q, x))


def lemma22_bound(x: float, n: int, k: int, q: int, c5: float = 1.0, c6: float = 1.0) -> float:
    """(x/log x) n^2 (x^(-1/(c5 n)) + exp(-c6 log x/(n^2 log(kqn))) + exp(-c6 sqrt(log x / n)))."""
    if x < 3:
        raise DomainError(f"x must be >= 3 (got {x})")
    if n < 1:
        raise DomainError(f"n must be >= 1 (got {n})")
    if c5 <= 0 or c6 <= 0:
        raise DomainError("c5 and c6 must be > 0")
    if n > lemma22_range(x, k, q):
        warnings.warn(f"n={n} exceeds the stated range sqrt(log x)/sqrt(log(kq log x)) at x={x}", stacklevel=2)
    lx = math.log(x)
    inner = (x ** (-1.0 / (c5 * n))
             + math.exp(-c6 * lx / (n * n * math.log(k * q * n)))
             + math.exp(-c6 * math.sqrt(lx) / math.sqrt(n)))
    return x / lx * n * n * inner


# -- interval caps near +-1 -------------------------------------------------------


def auto_cap_n(x: float, k: int, q: int) -> int:
    """floor(sqrt(log x) / log(kq log x)); tiny at any computable x."""
    return math.floor(math.sqrt(math.log(x)) / kq_log(k, q, x))


def _resolve_n(table: CoefficientTable, x: int, N, strict: bool) -> tuple[int, int | None, bool]:
    if N is None or N == "auto":
        raw = auto_cap_n(x, table.weight, table.level)
        if raw >= 3:
            return raw, raw, False
        if strict:
            raise DomainError(f"x={x} is too small: automatic N = {raw} < 3")
        return 3, raw, True
    N = int(N)
    if N < 3:
        raise DomainError(f"N must be >= 3, got {N}")
    return N, None, False


def cap_intervals(N: int) -> tuple[Interval, Interval]:
    c = math.cos(1.0 / N)
    return Interval(c, 1.0), Interval(-1.0, -c)


def cap_hypothesis(x: float, N: int) -> bool:
    """cos(1/N) <= 1 - x^(-1/2)."""
    return math.cos(1.0 / N) <= 1.0 - x**-0.5


def interval_cap_rhs(table: CoefficientTable, x: int, N="auto", *, strict: bool = False,
                     workers: int = 1) -> CensusReport:
    """Primes with cos(theta_p) in [cos(1/N), 1] or [-1, -cos(1/N)] against W/N^2 + sum |S_n|/N^2.

    With ``N="auto"`` the value floor(sqrt(log x)/log(kq log x)) is used when it
    is at least 3; otherwise N = 3 is substituted and flagged, or a
    :class:`DomainError` is raised when ``strict``.
    """
    n_cap, raw, clamped = _resolve_n(table, x, N, strict)
    if clamped:
        log.warning("automatic N=%d < 3 at x=%d; using N=3", raw, x)
    upper, lower = cap_intervals(n_cap)
    observed = pi_f_I(table, x, upper, workers=workers) + pi_f_I(table, x, lower, workers=workers)
    sums = chebyshev_sums(table, x, n_cap, workers=workers)
    window = sums[0]
    bound = window / n_cap**2 + math.fsum(abs(s) for s in sums[1:]) / n_cap**2
    return _report(
        table, x, DYADIC, observed, bound,
        N=n_cap, auto_N_raw=raw, N_clamped=clamped, cos_inv_N=upper.lo,
        hypothesis_holds=cap_hypothesis(x, n_cap), window_primes=int(round(window)),
        implied_constant="1 (diagnostic only)",
    )


def extremal_angle_check(table: CoefficientTable, x: int, N="auto", *, strict: bool = False) -> tuple[bool, list[int]]:
    """Check every extremal prime in (x, 2x] has cos(theta_p) in one of the two caps.

    Requires cos(1/N) <= 1 - x^(-1/2). Returns ``(ok, violating_primes)``.
    """
    n_cap, _, _ = _resolve_n(table, x, N, strict)
    if not cap_hypothesis(x, n_cap):
        raise DomainError(f"cos(1/N) <= 1 - x^(-1/2) fails for N={n_cap}, x={x}")
    upper, lower = cap_intervals(n_cap)
    i, j = table.window(x)
    idx = i + np.flatnonzero(table.extremal[i:j])
    t = table.t[idx]
    inside = upper.contains(t) | lower.contains(t)
    violations = [int(p) for p in table.primes[idx][~inside]]
    return not violations, violations


# -- discrepancy ------------------------------------------------------------


def ks_statistic(sample) -> float:
    """sup_t |empirical CDF(t) - F(t)| for the Sato-Tate distribution function F."""
    s = np.sort(np.asarray(sample, dtype=float))
    n = s.size
    if n < 2:
        raise DomainError(f"need at least 2 sample points, got {n}")
    f = st_cdf(s)
    ranks = np.arange(1, n + 1)
    return float(max(np.max(ranks / n - f), np.max(f - (ranks - 1) / n)))


def discrepancy(table: CoefficientTable, X: int) -> float:
    i, j = table.upto(X)
    return ks_statistic(table.t[i:j])
