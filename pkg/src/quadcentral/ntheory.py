"""Exact integer arithmetic kernels and multiplicative constants.

Provides:
- Kronecker symbol (a/n), completely multiplicative in n
- segmented sieve for odd square-free integers
- mu, d_j, sigma, phi and generalized von Mangoldt Lambda_j = mu * log^j
- the square-part weights M_Y(d), R_Y(d) with M_Y + R_Y = mu^2
- truncated Euler products with rigorous tail bounds: the constants

      C = (1/3) prod_{p>=3} (1 - 1/(p(p+1))),
      D = (1/8) prod_{p>=3} (1 - 1/p) h(p),

  and the local product eta(l) satisfying eta(l) = D*l1/(sigma(l1)*h(l))
  where l = l1*l2^2 with l1 square-free
- the multiplicative functions g, h, H, g1 entering the mollifier, exact
  as rationals at single primes
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BudgetError, DomainError

__all__ = [
    "FactoredInteger",
    "EulerProductValue",
    "kronecker",
    "is_odd_squarefree",
    "sieve_odd_squarefree",
    "factorize",
    "mobius",
    "divisor_j",
    "sigma",
    "phi",
    "lambda_j",
    "split_l1_l2",
    "my_weight",
    "ry_weight",
    "odd_primes",
    "const_C",
    "const_D",
    "const_C_over_D",
    "mult_g",
    "mult_h",
    "mult_H",
    "mult_g1",
    "eta_at_one",
]

_SIEVE_BUDGET = int(os.environ.get("QC_SIEVE_MAX", 2 * 10 ** 8))


# ---------------------------------------------------------------------------
# Kronecker symbol and basic factorization
# ---------------------------------------------------------------------------

def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for n >= 1 and any integer a.

    Equals the Jacobi symbol for odd positive n; the bottom-2 factor uses
    (a/2) = 0, 1, -1 according to a even, a = +-1 (mod 8), a = +-3 (mod 8).
    """
    if n < 1:
        raise DomainError(f"kronecker: n must be >= 1, got {n}")
    if n == 1:
        return 1
    r = 1
    e = 0
    while n % 2 == 0:
        n //= 2
        e += 1
    if e:
        if a % 2 == 0:
            return 0
        if e % 2 == 1 and a % 8 in (3, 5):
            r = -r
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                r = -r
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            r = -r
        a %= n
    return r if n == 1 else 0


@dataclass(frozen=True)
class FactoredInteger:
    """A positive integer together with its prime factorization.

    factors is a tuple of (prime, exponent) pairs with strictly increasing
    primes and exponents >= 1; the product reproduces n.
    """

    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"bad factorization of {self.n}: {self.factors}")
            prod *= p ** e
            last = p
        if prod != self.n or self.n < 1:
            raise ValueError(f"factors {self.factors} do not multiply to {self.n}")

    def text(self) -> str:
        """Canonical debug form 'p1^e1 * p2^e2'."""
        if not self.factors:
            return "1"
        return " * ".join(f"{p}^{e}" for p, e in self.factors)


def factorize(n: int) -> FactoredInteger:
    """Trial-division factorization (adequate for the sizes used here)."""
    if n < 1:
        raise DomainError(f"factorize: n must be >= 1, got {n}")
    m = n
    out = []
    for p in (2, 3):
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
    d = 5
    step = 2
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            out.append((d, e))
        d += step
        step = 6 - step
    if m > 1:
        out.append((m, 1))
    return FactoredInteger(n, tuple(out))


def _as_factored(n: int | FactoredInteger) -> FactoredInteger:
    return n if isinstance(n, FactoredInteger) else factorize(n)


# ---------------------------------------------------------------------------
# Square-free sieving
# ---------------------------------------------------------------------------

def is_odd_squarefree(d: int) -> bool:
    if d < 1 or d % 2 == 0:
        return False
    f = factorize(d)
    return all(e == 1 for _, e in f.factors)


def squarefree_mask(lo: int, hi: int) -> np.ndarray:
    """Boolean mask over [lo, hi]: True where the integer is square-free."""
    if not (1 <= lo <= hi):
        raise DomainError(f"bad range [{lo}, {hi}]")
    size = hi - lo + 1
    if size > _SIEVE_BUDGET:
        raise BudgetError(
            f"sieve range {size} exceeds budget {_SIEVE_BUDGET} "
            "(raise with QC_SIEVE_MAX)"
        )
    mask = np.ones(size, dtype=bool)
    q = 2
    while q * q <= hi:
        q2 = q * q
        start = ((lo + q2 - 1) // q2) * q2
        if start <= hi:
            mask[start - lo:: q2] = False
        q += 1
    return mask


def sieve_odd_squarefree(lo: int, hi: int) -> np.ndarray:
    """Odd square-free integers in [lo, hi], ascending (int64 array)."""
    mask = squarefree_mask(lo, hi)
    d = np.arange(lo, hi + 1, dtype=np.int64)
    return d[mask & (d % 2 == 1)]


# ---------------------------------------------------------------------------
# Classical multiplicative functions
# ---------------------------------------------------------------------------

def mobius(n: int | FactoredInteger) -> int:
    f = _as_factored(n)
    if any(e > 1 for _, e in f.factors):
        return 0
    return -1 if len(f.factors) % 2 else 1


def divisor_j(j: int, n: int | FactoredInteger) -> int:
    """d_j(n): the coefficient of n^(-s) in zeta(s)^j; d_j(p^a) = C(a+j-1, j-1)."""
    if j < 1:
        raise DomainError(f"divisor_j: j must be >= 1, got {j}")
    f = _as_factored(n)
    out = 1
    for _, e in f.factors:
        out *= math.comb(e + j - 1, j - 1)
    return out


def sigma(n: int | FactoredInteger) -> int:
    f = _as_factored(n)
    out = 1
    for p, e in f.factors:
        out *= (p ** (e + 1) - 1) // (p - 1)
    return out


def phi(n: int | FactoredInteger) -> int:
    f = _as_factored(n)
    out = 1
    for p, e in f.factors:
        out *= (p - 1) * p ** (e - 1)
    return out


def _squarefree_divisors(f: FactoredInteger) -> list[tuple[int, int]]:
    """(divisor, mu(divisor)) over the square-free divisors of f.n."""
    divs = [(1, 1)]
    for p, _ in f.factors:
        divs += [(d * p, -s) for d, s in divs]
    return divs


def lambda_j(j: int, n: int | FactoredInteger) -> float:
    """Generalized von Mangoldt Lambda_j = mu * log^j (so 1 * Lambda_j = log^j).

    Lambda_0 is the indicator of n = 1; Lambda_1 is the usual von Mangoldt
    function; Lambda_j vanishes when n has more than j distinct prime factors.
    """
    if not 0 <= j <= 3:
        raise DomainError(f"lambda_j: j must be in 0..3, got {j}")
    f = _as_factored(n)
    if j == 0:
        return 1.0 if f.n == 1 else 0.0
    if len(f.factors) > j:
        return 0.0
    total = 0.0
    for e, mu_e in _squarefree_divisors(f):
        total += mu_e * math.log(f.n // e) ** j
    return total


def split_l1_l2(l: int) -> tuple[int, int]:
    """Write odd l = l1 * l2^2 with l1 square-free; the splitting is unique."""
    if l < 1 or l % 2 == 0:
        raise DomainError(f"split_l1_l2: l must be odd positive, got {l}")
    l1, l2 = 1, 1
    for p, e in factorize(l).factors:
        if e % 2:
            l1 *= p
        l2 *= p ** (e // 2)
    return l1, l2


def my_weight(d: int, Y: int) -> int:
    """M_Y(d) = sum of mu(l) over l <= Y with l^2 | d."""
    if d < 1 or d % 2 == 0 or Y < 1:
        raise DomainError(f"my_weight: need odd d >= 1 and Y >= 1, got d={d}, Y={Y}")
    return _square_divisor_mu_sum(d, 1, Y)


def ry_weight(d: int, Y: int) -> int:
    """R_Y(d) = sum of mu(l) over l > Y with l^2 | d; M_Y + R_Y = mu(d)^2."""
    if d < 1 or d % 2 == 0 or Y < 1:
        raise DomainError(f"ry_weight: need odd d >= 1 and Y >= 1, got d={d}, Y={Y}")
    return _square_divisor_mu_sum(d, Y + 1, d)


def _square_divisor_mu_sum(d: int, lo: int, hi: int) -> int:
    f = factorize(d)
    core = [(p, e // 2) for p, e in f.factors if e >= 2]
    total = 0
    divs = [(1, 1)]
    for p, _ in core:
        divs += [(t * p, -s) for t, s in divs]
    for l, mu_l in divs:
        if lo <= l <= hi:
            total += mu_l
    return total


# ---------------------------------------------------------------------------
# Euler products with tail bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EulerProductValue:
    """A truncated Euler product with a rigorous bound on the omitted tail.

    The interval [value - tail_bound, value + tail_bound] contains the limit
    whenever the per-prime log-factors are bounded by c/p^2 beyond the cutoff
    (that constant is measured over the computed range and doubled for slack).
    """

    value: float
    prime_cutoff: int
    tail_bound: float


_ODD_PRIME_CACHE: dict[int, np.ndarray] = {}


def odd_primes(P: int) -> np.ndarray:
    """Odd primes <= P (float64 array, cached per cutoff)."""
    if P < 3:
        raise DomainError(f"odd_primes: cutoff must be >= 3, got {P}")
    arr = _ODD_PRIME_CACHE.get(P)
    if arr is None:
        sieve = np.ones(P + 1, dtype=bool)
        sieve[:2] = False
        for i in range(2, int(P ** 0.5) + 1):
            if sieve[i]:
                sieve[i * i:: i] = False
        primes = np.nonzero(sieve)[0]
        arr = primes[primes >= 3].astype(np.float64)
        if len(_ODD_PRIME_CACHE) > 4:
            _ODD_PRIME_CACHE.clear()
        _ODD_PRIME_CACHE[P] = arr
    return arr


def _product_with_tail(log_factors: np.ndarray, primes: np.ndarray,
                       prefactor: float, P: int) -> EulerProductValue:
    """Assemble prefactor * exp(sum log_factors) with a tail + rounding bound.

    Tail: |sum_{p>P} log f_p| <= c_f * sum_{p>P} p^-2 <= 2*c_f/(P log P),
    with c_f = max over computed primes of p^2 |log f_p| (doubled again for
    slack against non-monotone small-prime behaviour). Rounding: each log
    factor carries ~eps absolute error; accumulate linearly.
    """
    c_f = 2.0 * float(np.max(primes ** 2 * np.abs(log_factors)))
    tail = 2.0 * c_f / (P * math.log(P))
    total = float(np.sum(log_factors))
    rounding = 4.0 * np.finfo(float).eps * (len(log_factors) + abs(total))
    value = prefactor * math.exp(total)
    bound = abs(value) * (tail + rounding) * (1.0 + 1e-12) + 1e-300
    return EulerProductValue(value, P, bound)


def _h_np(p: np.ndarray) -> np.ndarray:
    return 1.0 + 1.0 / p + 1.0 / p ** 2 - 4.0 / (p * (p + 1.0))


def _g_np(p: np.ndarray) -> np.ndarray:
    return (p + 1.0) / p * (1.0 - 1.0 / (p * (p + 1.0)))


def _g1_np(p: np.ndarray) -> np.ndarray:
    return 1.0 / _g_np(p) - 2.0 * p / (_h_np(p) * (p + 1.0))


def _H_np(p: np.ndarray) -> np.ndarray:
    return 1.0 - 4.0 * p / (_h_np(p) * (p + 1.0) ** 2)


def const_C(P: int) -> EulerProductValue:
    """C = (1/3) prod over odd primes of (1 - 1/(p(p+1))), truncated at P."""
    p = odd_primes(P)
    return _product_with_tail(np.log1p(-1.0 / (p * (p + 1.0))), p, 1.0 / 3.0, P)


def const_D(P: int) -> EulerProductValue:
    """D = (1/8) prod over odd primes of (1 - 1/p) h(p), truncated at P."""
    p = odd_primes(P)
    return _product_with_tail(np.log((1.0 - 1.0 / p) * _h_np(p)), p, 0.125, P)


def const_C_over_D(P: int) -> EulerProductValue:
    """C/D as a single product over common primes (cancels truncation error)."""
    p = odd_primes(P)
    logs = np.log1p(-1.0 / (p * (p + 1.0))) - np.log((1.0 - 1.0 / p) * _h_np(p))
    return _product_with_tail(logs, p, 8.0 / 3.0, P)


# exact rational evaluation at single odd primes

def _h_frac(p: int) -> Fraction:
    return 1 + Fraction(1, p) + Fraction(1, p * p) - Fraction(4, p * (p + 1))


def _g_frac(p: int) -> Fraction:
    return Fraction(p + 1, p) * (1 - Fraction(1, p * (p + 1)))


def _odd_prime_divisors(n: int | FactoredInteger, *, who: str,
                        squarefree_only: bool = False) -> list[int]:
    f = _as_factored(n)
    if f.n % 2 == 0:
        raise DomainError(f"{who}: argument must be odd, got {f.n}")
    if squarefree_only and any(e > 1 for _, e in f.factors):
        raise DomainError(f"{who}: argument must be square-free, got {f.n}")
    return [p for p, _ in f.factors]


def mult_g(l: int | FactoredInteger) -> Fraction:
    """g(l) = prod_{p|l} ((p+1)/p)(1 - 1/(p(p+1))), exact."""
    out = Fraction(1)
    for p in _odd_prime_divisors(l, who="mult_g"):
        out *= _g_frac(p)
    return out


def mult_h(n: int | FactoredInteger) -> Fraction:
    """h(p^k) = 1 + 1/p + 1/p^2 - 4/(p(p+1)) for every k >= 1, exact."""
    out = Fraction(1)
    for p in _odd_prime_divisors(n, who="mult_h"):
        out *= _h_frac(p)
    return out


def mult_H(gamma: int | FactoredInteger) -> Fraction:
    """H(p) = 1 - 4p/(h(p)(p+1)^2) on square-free support, exact."""
    out = Fraction(1)
    for p in _odd_prime_divisors(gamma, who="mult_H", squarefree_only=True):
        out *= 1 - Fraction(4 * p) / (_h_frac(p) * (p + 1) ** 2)
    return out


def mult_g1(gamma: int | FactoredInteger) -> Fraction:
    """g1(p) = 1/g(p) - 2p/(h(p)(p+1)) on square-free support, exact."""
    out = Fraction(1)
    for p in _odd_prime_divisors(gamma, who="mult_g1", squarefree_only=True):
        out *= 1 / _g_frac(p) - Fraction(2 * p) / (_h_frac(p) * (p + 1))
    return out


# ---------------------------------------------------------------------------
# The local product eta
# ---------------------------------------------------------------------------

def _eta_generic_np(p: np.ndarray) -> np.ndarray:
    """Per-prime factor at primes not dividing l.

    With x = 1/p this is (1-x)^3 + (p/(p+1)) x (3-x)(1-x), which equals
    (1 - 1/p) h(p); both forms agree and the first is numerically direct.
    """
    x = 1.0 / p
    return (1.0 - x) ** 3 + p / (p + 1.0) * x * (3.0 - x) * (1.0 - x)


def eta_at_one(l: int, P: int) -> EulerProductValue:
    """The Euler product eta(l) = (1/8) * prod over odd p of the local factor.

    Local factors: the generic one above for p coprime to l;
    (p/(p+1))(1 - 1/p) at p | l1; (p/(p+1))(1 - 1/p^2) at p | l, p coprime
    to l1. Satisfies eta(l) * sigma(l1) * h(l) / l1 = D.
    """
    if l < 1 or l % 2 == 0:
        raise DomainError(f"eta_at_one: l must be odd positive, got {l}")
    p = odd_primes(P)
    logs = np.log(_eta_generic_np(p))
    l1, _ = split_l1_l2(l)
    for q, _e in factorize(l).factors:
        i = int(np.searchsorted(p, q))
        if i >= len(p) or p[i] != q:
            raise DomainError(f"eta_at_one: prime divisor {q} of l exceeds cutoff {P}")
        if l1 % q == 0:
            f = q / (q + 1.0) * (1.0 - 1.0 / q)
        else:
            f = q / (q + 1.0) * (1.0 - 1.0 / q ** 2)
        logs[i] = math.log(f)
    return _product_with_tail(logs, p, 0.125, P)
