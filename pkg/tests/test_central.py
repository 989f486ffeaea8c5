import math

import mpmath
import numpy as np
import pytest

from quadcentral import central as ce
from quadcentral import ntheory as nt
from quadcentral.errors import BudgetError, DomainError


# ---------------------------------------------------------------------------
# Truncation control
# ---------------------------------------------------------------------------

def test_truncation_length_monotone_in_d():
    for j in (1, 2, 3):
        prev = 0
        for d in (1, 5, 21, 105, 1001, 9999):
            n = ce.truncation_length(j, d, 1e-12)
            assert n > prev
            prev = n


def test_truncation_length_small_d():
    assert ce.truncation_length(1, 1, 1e-12) <= 200
    n100 = ce.truncation_length(1, 100, 1e-12)
    assert 100 <= n100 <= 5000


def test_truncation_domain():
    with pytest.raises(DomainError):
        ce.truncation_length(4, 5, 1e-12)
    with pytest.raises(DomainError):
        ce.truncation_length(1, 5, 1e-3)


def test_tail_estimate_is_honest(kernel1):
    # doubling the series length changes L by less than the tail bound
    for d in (15, 105, 1001):
        cv = ce.central_value(d)
        N2 = 2 * cv.truncation_N
        arg = math.sqrt(math.pi / (8.0 * d))
        from quadcentral import _fastmath as fm
        spf = ce._spf(N2)
        ones = ce._dj_table(1, N2)
        C = kernel1.coeffs
        L2 = 2.0 * fm.afe_sum(8 * d, N2, arg, ones, spf, kernel1.t0, kernel1.dt,
                              C[0], C[1], C[2], C[3], kernel1.xi_floor,
                              kernel1.xi_cutoff)
        assert abs(L2 - cv.L) <= cv.tail_estimate + 1e-15
        assert cv.tail_estimate < 1e-10 * max(1.0, abs(cv.L))


# ---------------------------------------------------------------------------
# Functional-equation values vs the Hurwitz oracle
# ---------------------------------------------------------------------------

def test_a_value_domain():
    with pytest.raises(DomainError):
        ce.a_value(1, 2)
    with pytest.raises(DomainError):
        ce.a_value(1, 9)


def test_hurwitz_zeta_against_mpmath():
    mpmath.mp.dps = 30
    xs = np.array([0.001, 0.0625, 0.25, 0.5, 0.75, 1.0])
    mine = ce.hurwitz_zeta(0.5, xs)
    for x, v in zip(xs, mine):
        ref = float(mpmath.zeta(mpmath.mpf("0.5"), mpmath.mpf(repr(float(x)))))
        assert abs(float(v) - ref) < 1e-13, x
    mine2 = ce.hurwitz_zeta(2.0, xs)
    for x, v in zip(xs, mine2):
        ref = float(mpmath.zeta(2, float(x)))
        assert abs(float(v) - ref) < 1e-12, x


def test_oracle_pinned_and_real():
    v = ce.oracle_central(1)
    assert isinstance(v, float)
    assert v == pytest.approx(2.0 * ce.a_value(1, 1), abs=1e-8)


def test_oracle_budget():
    with pytest.raises(BudgetError, match="QC_ORACLE_MAX_CONDUCTOR"):
        ce.oracle_central(30001)


def test_oracle_agreement_small_range():
    for d in nt.sieve_odd_squarefree(1, 120):
        d = int(d)
        assert abs(2.0 * ce.a_value(1, d) - ce.oracle_central(d)) <= 1e-8, d


def test_power_consistency_small_sample():
    rng = np.random.default_rng(17)
    pool = nt.sieve_odd_squarefree(1, 1500)
    for d in rng.choice(pool, size=12, replace=False):
        d = int(d)
        l1 = 2.0 * ce.a_value(1, d)
        l2 = 2.0 * ce.a_value(2, d)
        assert abs(l1 * l1 - l2) <= 1e-8 * abs(l2), d
    pool3 = nt.sieve_odd_squarefree(1, 400)
    for d in rng.choice(pool3, size=6, replace=False):
        d = int(d)
        l1 = 2.0 * ce.a_value(1, d)
        l3 = 2.0 * ce.a_value(3, d)
        assert abs(l1 ** 3 - l3) <= 1e-6 * abs(l3), d


# ---------------------------------------------------------------------------
# Sweeps, determinism, census
# ---------------------------------------------------------------------------

def test_sweep_deterministic_across_thread_counts():
    ds = nt.sieve_odd_squarefree(1, 3000)
    L1, N1, T1 = ce.sweep_values(ds, threads=1, block=64)
    L4, N4, T4 = ce.sweep_values(ds, threads=4, block=64)
    assert np.array_equal(L1, L4)
    assert np.array_equal(N1, N4)


def test_lvalue_cache_consistency(l_cache):
    ds = nt.sieve_odd_squarefree(50, 200)
    L_direct, _, _ = ce.sweep_values(ds)
    L_cached = l_cache.get(ds)
    assert np.array_equal(L_direct, L_cached)
    # second call hits the memo and returns identical values
    assert np.array_equal(l_cache.get(ds), L_cached)


def test_census_empty_range():
    s = ce.census(10, 5)
    assert s.count_total == 0 and s.count_nonvanishing == 0


def test_census_small_range(l_cache, tmp_path):
    out = tmp_path / "census.csv"
    s = ce.census(1, 500, cache=l_cache, out_csv=out)
    assert s.count_total == len(nt.sieve_odd_squarefree(1, 500))
    assert s.proportion == 1.0
    assert s.min_abs_L > 1e-8
    assert s.negative_count == 0
    assert s.below_threshold == []
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "d,L,N"
    assert len(lines) == s.count_total + 1
    d0, L0, N0 = lines[1].split(",")
    assert int(d0) == 1 and abs(float(L0) - ce.oracle_central(1)) < 1e-8
