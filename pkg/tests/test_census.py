import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

import oracles
from stlab import census
from stlab.angles import Interval, mu_st, st_cdf
from stlab.errors import CapacityError, DomainError
from stlab.forms import CoefficientTable, NewformSpec, build_table
from stlab.primes import prime_window_count, sieve_primes
from stlab.report_io import report_json


def synthetic(coeff, max_prime, k=2, q=1):
    spec = NewformSpec.external("synthetic", k, q)
    entries = tuple((p, coeff(p)) for p in sieve_primes(2, max_prime) if q % p)
    return CoefficientTable(spec, max_prime, entries)


@pytest.fixture(params=["tau", "ec"])
def table(request, tau_small, ec_small):
    return tau_small if request.param == "tau" else ec_small


# -- pi_f_I / Sato-Tate ---------------------------------------------------------


def test_full_interval_counts_window(tau_small, ec_small):
    assert census.pi_f_I(tau_small, 1000, Interval(-1, 1)) == prime_window_count(1000)
    # 37 lies in (20, 40] but is excluded from the level-37 table
    assert census.pi_f_I(ec_small, 20, Interval(-1, 1)) == prime_window_count(20) - 1


@pytest.mark.parametrize("x", [1000, 10_000, 100_000])
@pytest.mark.parametrize("lo,hi", [(0, 1), (-1, 1), (-0.5, 0.5), (-1, -0.9), (0.3, 0.31)])
def test_pi_f_I_matches_recount(table, x, lo, hi):
    assert census.pi_f_I(table, x, Interval(lo, hi)) == oracles.pi_f_I(table, x, lo, hi)


def test_empty_window():
    table = synthetic(lambda p: 1, 4, q=3)
    assert census.pi_f_I(table, 2, Interval(-1, 1)) == 0
    rep = census.sato_tate_report(table, 2, Interval(-1, 1))
    assert (rep.observed, rep.bound_shape, rep.ratio) == (0, 0.0, None)


def test_sato_tate_report(tau_small, ec_small):
    rep = census.sato_tate_report(tau_small, 1000, Interval(-1, 1))
    assert float(rep.params["deviation"]) == 0.0
    rep = census.sato_tate_report(ec_small, 20, Interval(-1, 1))
    assert float(rep.params["deviation"]) == 0.0
    assert rep.params["pi_window"] == "4" and rep.params["window_primes"] == "3"
    rep = census.sato_tate_report(tau_small, 100_000, Interval(0, 1))
    assert rep.observed == oracles.pi_f_I(tau_small, 100_000, 0, 1)
    assert rep.bound_shape == pytest.approx(int(rep.params["window_primes"]) * 0.5)
    # the uniform error term is far above the observed deviation at this size
    assert float(rep.params["deviation"]) < float(rep.params["error_scale"])


def test_capacity_error_names_required_max_prime(tau_small):
    with pytest.raises(CapacityError, match="max_prime >= 400000"):
        census.pi_f_I(tau_small, 200_000, Interval(0, 1))


@settings(max_examples=60, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_pi_f_I_monotone_and_additive(tau_small, a, b, c):
    a, b, c = sorted((a, b, c))
    x = 10_000
    whole = census.pi_f_I(tau_small, x, Interval(a, c))
    left = census.pi_f_I(tau_small, x, Interval(a, b))
    right = census.pi_f_I(tau_small, x, Interval(b, c))
    shared = census.pi_f_I(tau_small, x, Interval(b, b))
    assert left + right - shared == whole
    assert left <= whole and right <= whole


# -- Atkin-Serre ---------------------------------------------------------------


@pytest.mark.parametrize("x", [1000, 10_000, 100_000])
@pytest.mark.parametrize("variant", ["theorem", "proof"])
def test_atkin_serre_matches_recount(table, x, variant):
    assert census.atkin_serre_census(table, x, variant).observed == oracles.atkin_serre(table, x, variant)


def test_atkin_serre_extreme_coefficients_are_not_small():
    table = synthetic(lambda p: math.isqrt(4 * p), 5000)
    assert census.atkin_serre_census(table, 16, "theorem").observed == 0
    assert census.atkin_serre_census(table, 2000, "theorem").observed == 0


@pytest.mark.parametrize("x", [2000, 10_000, 50_000, 100_000])
def test_atkin_serre_sandwich(table, x):
    obs = census.atkin_serre_census(table, x, "theorem").observed
    lo_thr = census.atkin_serre_threshold(2 * x)
    hi_thr = census.atkin_serre_threshold(x)
    assert census.pi_f_I(table, x, Interval(-lo_thr, lo_thr)) <= obs <= census.pi_f_I(table, x, Interval(-hi_thr, hi_thr))


def test_atkin_serre_domain(tau_small):
    with pytest.raises(DomainError, match="x must be ≥ 16"):
        census.atkin_serre_census(tau_small, 10)
    with pytest.raises(DomainError):
        census.atkin_serre_census(tau_small, 100, "other")


def test_atkin_serre_bound_shape(tau_small):
    rep = census.atkin_serre_census(tau_small, 1000, c1=2.0)
    assert rep.bound_shape == pytest.approx(2.0 * 1000 * math.log(12 * math.log(1000)) / math.log(1000) ** 1.5)
    assert rep.params["c1"] == "2"


def test_guard_band_uses_high_precision(monkeypatch):
    # a guard band wide enough to catch everything must not change the count
    table = synthetic(lambda p: (p % 7) - 3, 3000)
    plain = census.atkin_serre_census(table, 1000).observed
    monkeypatch.setattr(census, "GUARD_BAND", 10.0)
    rep = census.atkin_serre_census(table, 1000)
    assert rep.observed == plain == oracles.atkin_serre(table, 1000, "theorem")
    assert int(rep.params["guard_band_hits"]) == int(rep.params["window_primes"])


# -- density --------------------------------------------------------------------------


@pytest.mark.parametrize("X", [1000, 10_000, 100_000])
@pytest.mark.parametrize("eps,c", [(0.1, 1.0), (0.5, 1.0), (0.25, 3.0)])
def test_density_matches_recount(table, X, eps, c):
    assert census.atkin_serre_density(table, X, eps, c).observed == oracles.density(table, X, eps, c)


def test_density_weight_two_fails_only_at_zero(ec_small):
    rep = census.atkin_serre_density(ec_small, 100_000, 0.5, 1.0)
    zeros = sum(1 for p, a in ec_small.entries if p <= 100_000 and a == 0)
    assert int(rep.params["failures"]) == zeros
    assert rep.params["threshold_at_most_one"] == "true"
    assert rep.bound_shape == len(sieve_primes(2, 100_000))


def test_density_large_eps_passes_all_nonzero(tau_small):
    rep = census.atkin_serre_density(tau_small, 10_000, 5.5, 1.0)
    nonzero = sum(1 for p, a in tau_small.entries if p <= 10_000 and a)
    assert rep.observed == nonzero


# -- extremal ---------------------------------------------------------------------------


def test_floor_extremal_examples():
    assert census.floor_extremal_value(5, 2) == 4
    assert census.floor_extremal_value(2, 12) == 90
    assert census.floor_extremal_value(7, 2) == 5


@given(st.sampled_from(sieve_primes(2, 10**4)), st.sampled_from([2, 4, 12, 24]))
def test_floor_extremal_is_floor(p, k):
    v = census.floor_extremal_value(p, k)
    assert v * v <= 4 * p ** (k - 1) < (v + 1) ** 2


def test_extremal_synthetic_a7():
    table = synthetic(lambda p: -5 if p == 7 else 0, 40)
    assert table.extremal[list(table.primes).index(7)]
    assert census.extremal_census(table, upto=40).observed == 1


def test_tau_two_not_extremal(tau_small):
    assert abs(tau_small.entries[0][1]) == 24 != census.floor_extremal_value(2, 12)


@pytest.mark.parametrize("x", [1000, 10_000, 100_000])
def test_extremal_matches_recount(table, x):
    assert census.extremal_census(table, x).observed == oracles.extremal_dyadic(table, x)
    assert census.extremal_census(table, upto=2 * x).observed == oracles.extremal_upto(table, 2 * x)


def test_extremal_cumulative_comparator(ec_small, tau_small):
    rep = census.extremal_census(ec_small, upto=100_000)
    conj = 8 / (3 * math.pi) * 100_000**0.25 / math.log(100_000)
    assert float(rep.params["conjecture_value"]) == pytest.approx(conj)
    positives = sum(1 for p, a in ec_small.entries if p <= 100_000 and a == math.isqrt(4 * p))
    assert int(rep.params["observed_positive"]) == positives
    assert census.extremal_census(tau_small, upto=1000).ratio is None


def test_extremal_domain(tau_small):
    with pytest.raises(DomainError):
        census.extremal_census(tau_small, 10)
    with pytest.raises(DomainError):
        census.extremal_census(tau_small, 100, upto=100)


# -- Chebyshev sums ----------------------------------------------------------------------


def test_s0_counts_window(table):
    i, j = table.window(10_000)
    assert census.chebyshev_sum(table, 10_000, 0) == j - i


def test_chebyshev_matches_trig_form(table):
    x = 10_000
    i, j = table.window(x)
    sums = census.chebyshev_sums(table, x, 20)
    for n in range(21):
        assert abs(sums[n] - oracles.chebyshev_trig(table, x, n)) <= 1e-9 * (j - i)
        assert abs(sums[n]) <= (n + 1) * (j - i)


def test_chebyshev_empty_window():
    table = synthetic(lambda p: 1, 4, q=3)
    assert census.chebyshev_sum(table, 2, 3) == 0.0


def test_lemma22_bound_second_evaluation():
    x, n, k, q = 1e6, 1, 12, 1
    lx = math.log(x)
    independent = (x / lx) * (n**2 * x ** (-1 / n) + n**2 * (math.exp(-lx / (n**2 * math.log(k * q * n)))
                                                            + math.exp(-math.sqrt(lx) / math.sqrt(n))))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert census.lemma22_bound(x, n, k, q) == pytest.approx(independent, rel=1e-14)


def test_lemma22_bound_monotonicity():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for n in (1, 2, 3):
            # normalized by x/log x the shape decreases in x
            vals = [census.lemma22_bound(x, n, 12, 1) * math.log(x) / x for x in (1e4, 1e6, 1e8)]
            assert vals[0] > vals[1] > vals[2]
        for c6 in (0.5, 1, 2, 4):
            assert census.lemma22_bound(1e6, 2, 2, 37, c6=c6) >= census.lemma22_bound(1e6, 2, 2, 37, c6=2 * c6)


def test_lemma22_range_warning():
    with pytest.warns(UserWarning, match="stated range"):
        census.lemma22_bound(1e6, 5, 12, 1)


# -- interval caps ----------------------------------------------------------------------------


def test_cap_all_zero_table():
    table = synthetic(lambda p: 0, 2000)
    assert census.interval_cap_rhs(table, 500, 3).observed == 0


@pytest.mark.parametrize("x", [1000, 10_000, 100_000])
def test_cap_matches_recount(table, x):
    rep = census.interval_cap_rhs(table, x)
    N = int(rep.params["N"])
    assert rep.observed == oracles.cap_count(table, x, N)
    window = int(rep.params["window_primes"])
    assert rep.bound_shape >= window / N**2


def test_auto_n_clamping_and_strict(tau_small):
    assert census.auto_cap_n(1e5, 12, 1) == 0
    rep = census.interval_cap_rhs(tau_small, 100_000)
    assert rep.params["N_clamped"] == "true" and rep.params["auto_N_raw"] == "0"
    with pytest.raises(DomainError, match="too small"):
        census.interval_cap_rhs(tau_small, 100_000, strict=True)
    with pytest.raises(DomainError):
        census.interval_cap_rhs(tau_small, 100_000, 2)


def test_cap_bound_formula(ec_small):
    x, N = 10_000, 5
    rep = census.interval_cap_rhs(ec_small, x, N)
    sums = census.chebyshev_sums(ec_small, x, N)
    assert rep.bound_shape == pytest.approx(sums[0] / N**2 + sum(abs(s) for s in sums[1:]) / N**2)
    assert rep.params["hypothesis_holds"] == "true"


@pytest.mark.parametrize("x", [10_000, 100_000])
def test_extremal_angle_check(table, x):
    ok, violations = census.extremal_angle_check(table, x)
    assert ok and violations == []
    N_max = 3
    while census.cap_hypothesis(x, N_max + 1):
        N_max += 1
    assert census.extremal_angle_check(table, x, N_max) == (True, [])


@pytest.mark.parametrize("x,expected", [(1500, [2437, 2671]), (20_000, [26699])])
def test_extremal_angle_check_nonvacuous_windows(ec_small, x, expected):
    i, j = ec_small.window(x)
    assert ec_small.primes[i:j][ec_small.extremal[i:j]].tolist() == expected
    for N in range(3, 40):
        if census.cap_hypothesis(x, N):
            assert census.extremal_angle_check(ec_small, x, N) == (True, [])


def test_extremal_angle_check_hypothesis(ec_small):
    with pytest.raises(DomainError, match="fails"):
        census.extremal_angle_check(ec_small, 10_000, 1000)


def test_extremal_angle_check_no_extremal_primes():
    table = synthetic(lambda p: 0, 3000)
    assert census.extremal_angle_check(table, 1000, 3) == (True, [])


def test_extremal_angle_check_detects_violation(monkeypatch, ec_small):
    # corrupt the cached angles to make sure violations are actually reported
    t = ec_small.t.copy()
    i, j = ec_small.window(20_000)
    idx = i + int(np.flatnonzero(ec_small.extremal[i:j])[0])
    assert int(ec_small.primes[idx]) == 26699
    t[idx] = 0.0
    fake = CoefficientTable(ec_small.spec, ec_small.max_prime, ec_small.entries)
    fake.__dict__["t"] = t
    ok, violations = census.extremal_angle_check(fake, 20_000, 3)
    assert not ok and violations == [int(ec_small.primes[idx])]


# -- discrepancy -----------------------------------------------------------------------


def test_ks_at_quantiles():
    from scipy.optimize import brentq

    n = 200
    qs = [brentq(lambda t, u=(i + 0.5) / n: st_cdf(t) - u, -1, 1, xtol=1e-15) for i in range(n)]
    assert census.ks_statistic(qs) <= 1 / n


def test_ks_degenerate_sample():
    assert census.ks_statistic([1.0] * 10) == pytest.approx(1.0)
    assert census.ks_statistic([0.0, 0.0]) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        census.ks_statistic([0.3])


def test_discrepancy_against_scipy(table):
    i, j = table.upto(100_000)
    sample = table.t[i:j]
    ref = stats.kstest(sample, lambda v: 0.5 + (v * np.sqrt(1 - v * v) + np.arcsin(v)) / np.pi).statistic
    assert census.discrepancy(table, 100_000) == pytest.approx(ref, abs=1e-12)


# -- determinism ---------------------------------------------------------------------------


def test_reports_identical_across_workers(tau_small, monkeypatch):
    monkeypatch.setattr(census, "CHUNK", 997)

    def run(w):
        return [
            report_json(census.sato_tate_report(tau_small, 50_000, Interval(-0.3, 0.7), workers=w)),
            report_json(census.atkin_serre_census(tau_small, 50_000, workers=w)),
            report_json(census.atkin_serre_density(tau_small, 100_000, 0.2, workers=w)),
            report_json(census.interval_cap_rhs(tau_small, 50_000, 4, workers=w)),
            repr(census.chebyshev_sums(tau_small, 50_000, 12, workers=w)),
        ]

    assert run(1) == run(2) == run(8)
