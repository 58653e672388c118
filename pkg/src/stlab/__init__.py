"""Sato-Tate statistics for prime-indexed Fourier coefficients of newforms."""

from .angles import AngleSample, Interval, chebyshev_u, mu_st, mu_st_central, normalize
from .census import (
    CensusReport,
    atkin_serre_census,
    atkin_serre_density,
    chebyshev_sum,
    discrepancy,
    extremal_angle_check,
    extremal_census,
    floor_extremal_value,
    interval_cap_rhs,
    lemma22_bound,
    pi_f_I,
    sato_tate_report,
)
from .elliptic import EllipticCurve, ec_ap, ec_ap_naive
from .forms import CoefficientTable, NewformSpec, Source, build_table
from .primes import prime_window_count, sieve_primes
from .report_io import load_cache, report_json, save_cache
from .tau import tau_table

__version__ = "0.1.0"
