"""Gauss-type character sums and the two-sided Poisson-summation check.

For odd n define

    tau_k(n) = sum_{a mod n} (a/n) e(ak/n),
    G_k(n)   = ((1-i)/2 + (-1/n)(1+i)/2) tau_k(n).

G_k is multiplicative in n over coprime factors and has a closed form at
prime powers p^beta in terms of alpha = ord_p(k) (alpha = infinity at
k = 0):

    beta <= alpha, beta odd   -> 0
    beta <= alpha, beta even  -> phi(p^beta)
    beta = alpha + 1 even     -> -p^alpha
    beta = alpha + 1 odd      -> (k p^-alpha / p) p^alpha sqrt(p)
    beta >= alpha + 2         -> 0

tau_brute / gauss_from_tau evaluate the literal sums and serve as the
oracle for gauss_closed.

poisson_check evaluates both sides of the summation identity

    (1/X) sum_{d odd} M_Y(d) (d/n) F(d/X)
      = (1/2n)(2/n) sum_{alpha <= Y, (alpha,2n)=1} mu(alpha)/alpha^2
          sum_k (-1)^k G_k(n) F~(kX / (2 alpha^2 n))

for a smooth F supported in (1, 2): the left side directly, the right
side with G_k from the closed form (periodic in k mod n, so one period of
signed values is tiled) and F~ in bulk per alpha via the chirp-z batch.
The k-sum is truncated where the F~ envelope stays below a tolerance.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _fastmath as fm
from .errors import BudgetError, DomainError
from .ntheory import FactoredInteger, factorize, kronecker, mobius, phi
from .smoothing import SmoothWeight, tilde_batch, tilde_decay_cutoff, weight_eval

__all__ = [
    "CASE_ZERO_ODD",
    "CASE_PHI_EVEN",
    "CASE_NEG_PALPHA",
    "CASE_SQRT",
    "CASE_ZERO_HIGH",
    "GaussSumValue",
    "tau_brute",
    "gauss_from_tau",
    "gauss_brute_batch",
    "gauss_closed",
    "poisson_check",
]

_TAU_BUDGET = int(os.environ.get("QC_TAU_MAX_MODULUS", 10 ** 6))

CASE_ZERO_ODD = "zero_odd"
CASE_PHI_EVEN = "phi_even"
CASE_NEG_PALPHA = "neg_palpha"
CASE_SQRT = "sqrt_case"
CASE_ZERO_HIGH = "zero_high"


@dataclass(frozen=True)
class GaussSumValue:
    """G_k(n) with the per-prime-power case labels as a witness.

    value lies in Z adjoined square roots of primes, so |value|^2 is an
    integer; value is exactly zero iff some witness label is zero_odd or
    zero_high.
    """

    value: complex
    witness: tuple[str, ...]

    @property
    def is_zero(self) -> bool:
        return CASE_ZERO_ODD in self.witness or CASE_ZERO_HIGH in self.witness


def _require_odd(n: int, who: str) -> None:
    if n < 1 or n % 2 == 0:
        raise DomainError(f"{who}: modulus must be odd positive, got {n}")


def tau_brute(k: int, n: int) -> complex:
    """The literal sum over residues; oracle-scale only (n <= 10^6)."""
    _require_odd(n, "tau_brute")
    if n > _TAU_BUDGET:
        raise BudgetError(
            f"tau_brute: n = {n} exceeds budget {_TAU_BUDGET} "
            "(raise with QC_TAU_MAX_MODULUS)")
    return complex(fm.tau_table(n, np.array([k], dtype=np.int64))[0])


def _prefactor(n: int) -> complex:
    return 0.5 * ((1 - 1j) + kronecker(-1, n) * (1 + 1j))


def gauss_from_tau(k: int, n: int) -> complex:
    """G_k(n) from the brute-force tau sum; the oracle for gauss_closed."""
    return _prefactor(n) * tau_brute(k, n)


def gauss_brute_batch(n: int, ks: np.ndarray) -> np.ndarray:
    """G_k(n) for many k at once (one Jacobi row + root-of-unity table)."""
    _require_odd(n, "gauss_brute_batch")
    if n > _TAU_BUDGET:
        raise BudgetError(
            f"gauss_brute_batch: n = {n} exceeds budget {_TAU_BUDGET} "
            "(raise with QC_TAU_MAX_MODULUS)")
    taus = fm.tau_table(n, np.asarray(ks, dtype=np.int64))
    return _prefactor(n) * taus


def _gauss_prime_power(k: int, p: int, beta: int) -> tuple[complex, str]:
    if k == 0:
        alpha = beta + 2  # effectively infinite
    else:
        alpha = 0
        kk = abs(k)
        while kk % p == 0:
            kk //= p
            alpha += 1
    if beta <= alpha:
        if beta % 2 == 1:
            return 0.0 + 0.0j, CASE_ZERO_ODD
        return float(phi(p ** beta)) + 0.0j, CASE_PHI_EVEN
    if beta == alpha + 1:
        if beta % 2 == 0:
            return complex(-(p ** alpha)), CASE_NEG_PALPHA
        unit = k // p ** alpha
        return kronecker(unit, p) * p ** alpha * math.sqrt(p) + 0.0j, CASE_SQRT
    return 0.0 + 0.0j, CASE_ZERO_HIGH


def gauss_closed(k: int, n: int | FactoredInteger) -> GaussSumValue:
    """G_k(n) assembled multiplicatively from the prime-power table."""
    f = n if isinstance(n, FactoredInteger) else factorize(n)
    _require_odd(f.n, "gauss_closed")
    value = 1.0 + 0.0j
    witness = []
    for p, beta in f.factors:
        v, label = _gauss_prime_power(k, p, beta)
        witness.append(label)
        value = 0.0j if label in (CASE_ZERO_ODD, CASE_ZERO_HIGH) else value * v
    if CASE_ZERO_ODD in witness or CASE_ZERO_HIGH in witness:
        value = 0.0 + 0.0j
    return GaussSumValue(value=value, witness=tuple(witness))


# ---------------------------------------------------------------------------
# Poisson summation, both sides
# ---------------------------------------------------------------------------

def _signed_gauss_period(n: int) -> np.ndarray:
    """(-1)^k G_k(n) for k = 0..2n-1 (the k-dependence has period 2n)."""
    f = factorize(n)
    out = np.empty(2 * n, dtype=np.float64)
    for k in range(2 * n):
        g = gauss_closed(k, f).value
        if abs(g.imag) > 1e-9 * max(1.0, abs(g)):
            raise AssertionError(f"G_k({n}) unexpectedly non-real: {g}")
        out[k] = (-1.0 if k % 2 else 1.0) * g.real
    return out


def poisson_check(n: int, X: float, Y: int, F: SmoothWeight,
                  k_tol: float = 1e-12) -> tuple[float, float, float]:
    """(lhs, rhs, gap) for the summation identity at modulus n.

    lhs: direct weighted character sum over odd d in (X, 2X) with the
    square-part weight M_Y(d). rhs: the dual sum; per alpha the k-range
    is truncated at the scanned F~ envelope cutoff for k_tol.
    """
    _require_odd(n, "poisson_check")
    if X < 50:
        raise DomainError(f"poisson_check: X must be >= 50, got {X}")
    if Y < 1:
        raise DomainError(f"poisson_check: Y must be >= 1, got {Y}")

    # left side
    d_lo, d_hi = int(X) + 1, int(math.ceil(2 * X)) - 1
    lhs = 0.0
    for d in range(d_lo if d_lo % 2 else d_lo + 1, d_hi + 1, 2):
        w = weight_eval(F, d / X)
        if w == 0.0:
            continue
        my = _my_weight_fast(d, Y)
        if my == 0:
            continue
        lhs += my * kronecker(d, n) * w
    lhs /= X

    # right side
    xi_cut = tilde_decay_cutoff(F, k_tol)
    period = _signed_gauss_period(n)
    rhs = 0.0
    for alpha in range(1, Y + 1, 2):
        if math.gcd(alpha, 2 * n) != 1:
            continue
        mu = mobius(alpha)
        if mu == 0:
            continue
        delta = X / (2.0 * alpha * alpha * n)
        kmax = int(math.ceil(xi_cut / delta))
        pos, neg = tilde_batch(F, delta, kmax)
        k = np.arange(kmax + 1)
        sg = period[k % (2 * n)]
        inner = sg[0] * pos[0] + float(np.dot(sg[1:], pos[1:]))
        # negative k: G_-k(n) = (-1/n) G_k(n) and (-1)^(-k) = (-1)^k
        inner += kronecker(-1, n) * float(np.dot(sg[1:], neg[1:]))
        rhs += mu / (alpha * alpha) * inner
    rhs *= kronecker(2, n) / (2.0 * n)
    return lhs, rhs, abs(lhs - rhs)


def _my_weight_fast(d: int, Y: int) -> int:
    """M_Y(d) by scanning square divisors l^2 | d with l <= Y."""
    total = 0
    for l in range(1, Y + 1):
        if l * l > d:
            break
        if d % (l * l) == 0:
            m = _mobius_small(l)
            total += m
    return total


def _mobius_small(l: int) -> int:
    if l == 1:
        return 1
    out = 1
    m = l
    p = 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            out = -out
        p += 1
    if m > 1:
        out = -out
    return out
