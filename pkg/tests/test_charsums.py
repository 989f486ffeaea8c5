import math

import numpy as np
import pytest

from quadcentral import charsums as cs
from quadcentral import ntheory as nt
from quadcentral.errors import BudgetError, DomainError


# ---------------------------------------------------------------------------
# tau and the closed form
# ---------------------------------------------------------------------------

def test_tau_pinned_values():
    assert cs.tau_brute(5, 1) == pytest.approx(1.0)          # empty modulus
    assert cs.tau_brute(1, 3) == pytest.approx(1j * math.sqrt(3), abs=1e-12)
    assert cs.tau_brute(0, 9) == pytest.approx(6.0, abs=1e-12)  # phi(9)


def test_tau_domain_and_budget():
    with pytest.raises(DomainError):
        cs.tau_brute(1, 4)
    with pytest.raises(BudgetError, match="QC_TAU_MAX_MODULUS"):
        cs.tau_brute(1, 10 ** 6 + 1)


def test_gauss_closed_pinned_values():
    assert cs.gauss_closed(7, 1).value == 1.0
    assert cs.gauss_closed(7, 1).witness == ()
    assert cs.gauss_closed(1, 3).value == pytest.approx(math.sqrt(3))
    assert cs.gauss_closed(3, 9).value == pytest.approx(-3.0)
    # all five table cases appear for suitable (k, p^beta):
    assert cs.gauss_closed(9, 27).value == pytest.approx(9 * math.sqrt(3))
    assert cs.gauss_closed(9, 27).witness == (cs.CASE_SQRT,)
    assert cs.gauss_closed(3, 27).witness == (cs.CASE_ZERO_HIGH,)
    assert cs.gauss_closed(27, 27).witness == (cs.CASE_ZERO_ODD,)
    assert cs.gauss_closed(9, 9).witness == (cs.CASE_PHI_EVEN,)
    assert cs.gauss_closed(3, 9).witness == (cs.CASE_NEG_PALPHA,)


def test_gauss_zero_iff_witness_zero():
    rng = np.random.default_rng(10)
    for _ in range(300):
        n = 2 * int(rng.integers(1, 500)) + 1
        k = int(rng.integers(-50, 50))
        g = cs.gauss_closed(k, n)
        assert (g.value == 0) == g.is_zero


def test_gauss_at_zero_frequency():
    # G_0(n) = phi(n) on squares, 0 otherwise
    for n in (1, 9, 25, 81, 225):
        assert cs.gauss_closed(0, n).value == pytest.approx(nt.phi(n))
    for n in (3, 15, 45, 99):
        assert cs.gauss_closed(0, n).value == 0


def test_gauss_from_tau_pinned():
    assert cs.gauss_from_tau(1, 5) == pytest.approx(math.sqrt(5), abs=1e-12)
    assert cs.gauss_from_tau(2, 15) == pytest.approx(math.sqrt(15), abs=1e-12)
    assert abs(cs.gauss_from_tau(0, 3)) < 1e-12


def test_gauss_squarefree_is_kronecker_times_sqrt():
    rng = np.random.default_rng(4)
    squarefree = [int(d) for d in nt.sieve_odd_squarefree(1, 400)]
    for n in rng.choice(squarefree, size=40, replace=False):
        n = int(n)
        k = int(rng.integers(-30, 30))
        expect = nt.kronecker(k, n) * math.sqrt(n)
        assert cs.gauss_closed(k, n).value == pytest.approx(expect, abs=1e-9)


def test_gauss_closed_vs_brute_sample():
    kset = np.array(list(range(-20, 21)) + [25, 49, 121], dtype=np.int64)
    for n in range(1, 402, 4):  # odd subsample; the full range runs in acceptance
        brute = cs.gauss_brute_batch(n, kset)
        for k, b in zip(kset, brute):
            g = cs.gauss_closed(int(k), n)
            assert abs(g.value - b) <= 1e-9 * math.sqrt(n), (k, n)
            if g.is_zero:
                assert abs(b) <= 1e-9 * math.sqrt(n)


def test_gauss_multiplicative_in_coprime_moduli():
    rng = np.random.default_rng(9)
    for _ in range(200):
        m = 2 * int(rng.integers(1, 250)) + 1
        n = 2 * int(rng.integers(1, 250)) + 1
        if math.gcd(m, n) != 1:
            continue
        k = int(rng.integers(-40, 40))
        lhs = cs.gauss_closed(k, m * n).value
        rhs = cs.gauss_closed(k, m).value * cs.gauss_closed(k, n).value
        assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs)), (k, m, n)


def test_gauss_negation_and_doubling_relations():
    rng = np.random.default_rng(21)
    for _ in range(200):
        n = 2 * int(rng.integers(1, 400)) + 1
        k = int(rng.integers(-60, 60))
        g = cs.gauss_closed(k, n).value
        # G_k(n) = (-1/n) G_{-k}(n)
        assert g == pytest.approx(nt.kronecker(-1, n)
                                  * cs.gauss_closed(-k, n).value, abs=1e-9)
        # G_k(n) = (2/n) G_{2k}(n)
        assert g == pytest.approx(nt.kronecker(2, n)
                                  * cs.gauss_closed(2 * k, n).value, abs=1e-9)


def test_gauss_modulus_squared_is_integer():
    rng = np.random.default_rng(33)
    for _ in range(300):
        n = 2 * int(rng.integers(1, 700)) + 1
        k = int(rng.integers(-100, 100))
        v = cs.gauss_closed(k, n).value
        m2 = abs(v) ** 2
        assert abs(m2 - round(m2)) <= 1e-6 * max(1.0, m2)


# ---------------------------------------------------------------------------
# Poisson summation, both sides
# ---------------------------------------------------------------------------

def test_poisson_principal_character_case(weight):
    # n = 1, Y = 1: pure Poisson summation over odd integers
    lhs, rhs, gap = cs.poisson_check(1, 500.0, 1, weight)
    assert gap <= 1e-6
    assert lhs == pytest.approx(rhs, abs=1e-6)


def test_poisson_square_and_nonsquare(weight):
    lhs9, rhs9, gap9 = cs.poisson_check(9, 500.0, 5, weight)
    assert gap9 <= 1e-6
    assert lhs9 > 0.1  # square modulus: principal-term dominated
    lhs15, rhs15, gap15 = cs.poisson_check(15, 500.0, 5, weight)
    assert gap15 <= 1e-6
    assert abs(lhs15) < 0.05  # nonprincipal character: cancellation


def test_poisson_with_bump_weight():
    # the softer bump profile decays much faster, so the dual sum is short
    from quadcentral.smoothing import standard_bump
    W = standard_bump()
    for n in (1, 9, 45):
        _, _, gap = cs.poisson_check(n, 200.0, 5, W)
        assert gap <= 1e-6, n


def test_poisson_domain_guards(weight):
    with pytest.raises(DomainError):
        cs.poisson_check(4, 500.0, 5, weight)
    with pytest.raises(DomainError):
        cs.poisson_check(3, 10.0, 5, weight)
    with pytest.raises(DomainError):
        cs.poisson_check(3, 500.0, 0, weight)
