"""The optimal mollifier and its closed-form moment predictions.

A mollifier of length M = (sqrt(X))^theta is the character polynomial

    M(d) = sum_{l <= M} lambda(l) sqrt(l) (8d/l),

with lambda supported on odd square-free l. Its coefficients are handled
through the invertible change of variables (w(a) = a d(a) / (h(a) sigma(a)))

    xi(gamma)  = sum_a w(a) lambda(a gamma),
    lambda(l)  = sum_a mu(a) w(a) xi(l a),

which are mutual inverses on square-free support. The optimal choice is

    xi(gamma) = (C / (D log^3 M)) * (h(gamma) g1(gamma) / (gamma H(gamma)))
                * log(sqrt(X) gamma),

and with it the weighted first and second moments have the closed forms
(in units of K = 2*Phi^(0) / (3 zeta(2)))

    first(theta)  = (2/9) ((1 + 1/theta)^3 - 1/theta^3)
    second(theta) = 4/81 + 8/(27 t) + 20/(27 t^2) + 76/(81 t^3)
                    + 16/(27 t^4) + 4/(27 t^5)
    proportion(theta) = 1 - (theta + 1)^(-3),

linked by the exact identity first^2 = proportion * second. The constant
underlying those coefficients is the Euler-product identity

    (C^2/D) * (1/2) * prod_{p>=3} (1 - 1/p)(1 + h(p) g1(p)^2 / (p H(p))) = 4/9,

checked numerically by identity_69. mollified_sweep produces the
empirical S1, S2 and the Cauchy-Schwarz nonvanishing bound S1^2/S2.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .central import LValueCache, OmegaKernel, sweep_values
from .errors import BudgetError, DomainError
from .ntheory import (EulerProductValue, _g1_np, _H_np, _h_np, _product_with_tail,
                      const_C_over_D, factorize, kronecker, mult_H, mult_g1,
                      mult_h, odd_primes, sieve_odd_squarefree, sigma)
from .smoothing import SmoothWeight, phi_hat0, weight_eval

__all__ = [
    "MollifierSpec",
    "MollifiedMoments",
    "coefficient_weight",
    "xi_optimal",
    "build_mollifier",
    "lambda_from_xi",
    "xi_from_lambda",
    "mollifier_value",
    "first_moment_shape",
    "second_moment_shape",
    "predicted_proportion",
    "moment_unit",
    "predicted_first",
    "predicted_second",
    "identity_69",
    "mollified_sweep",
]

_SWEEP_BUDGET = float(os.environ.get("QC_SWEEP_MAX_X", 1e6))

ZETA2 = math.pi ** 2 / 6.0


@dataclass(frozen=True)
class MollifierSpec:
    """Mollifier parameters and coefficient maps on odd square-free support."""

    X: float
    theta: float
    M: float
    xi: dict[int, float]
    lam: dict[int, float]


def coefficient_weight(a: int) -> float:
    """w(a) = a d(a) / (h(a) sigma(a)) for odd square-free a."""
    f = factorize(a)
    return float(a * 2 ** len(f.factors) / (mult_h(f) * sigma(f)))


def xi_optimal(gamma: int, X: float, M: float, cd_ratio: float) -> float:
    """The optimal coefficient xi(gamma) for odd square-free gamma <= M."""
    if gamma > M:
        raise DomainError(f"xi_optimal: gamma = {gamma} exceeds M = {M}")
    f = factorize(gamma)
    if f.n % 2 == 0 or any(e > 1 for _, e in f.factors):
        raise DomainError(f"xi_optimal: gamma must be odd square-free, got {gamma}")
    hg = float(mult_h(f) * mult_g1(f) / mult_H(f))
    return (cd_ratio / math.log(M) ** 3) * (hg / gamma) * math.log(math.sqrt(X) * gamma)


def _support(M: float) -> np.ndarray:
    return sieve_odd_squarefree(1, max(1, int(M)))


def lambda_from_xi(xi: dict[int, float], M: float) -> dict[int, float]:
    """lambda(l) = sum_a mu(a) w(a) xi(l a) over odd square-free la <= M."""
    supp = _support(M)
    w = {int(a): coefficient_weight(int(a)) for a in supp}
    lam = {}
    for l in supp:
        l = int(l)
        total = 0.0
        for a in supp:
            a = int(a)
            la = l * a
            if la > M:
                break
            if math.gcd(a, l) != 1:
                continue
            mu_a = -1.0 if len(factorize(a).factors) % 2 else 1.0
            total += mu_a * w[a] * xi.get(la, 0.0)
        lam[l] = total
    return lam


def xi_from_lambda(lam: dict[int, float], M: float) -> dict[int, float]:
    """xi(gamma) = sum_a w(a) lambda(a gamma) over odd square-free a*gamma <= M."""
    supp = _support(M)
    w = {int(a): coefficient_weight(int(a)) for a in supp}
    xi = {}
    for g in supp:
        g = int(g)
        total = 0.0
        for a in supp:
            a = int(a)
            ag = a * g
            if ag > M:
                break
            if math.gcd(a, g) != 1:
                continue
            total += w[a] * lam.get(ag, 0.0)
        xi[g] = total
    return xi


def build_mollifier(X: float, theta: float, euler_cutoff: int = 10 ** 5) -> MollifierSpec:
    """Construct the optimal mollifier for the family at scale X."""
    if not 0.0 < theta < 1.0:
        raise DomainError(f"build_mollifier: theta must be in (0, 1), got {theta}")
    if X <= 1.0:
        raise DomainError(f"build_mollifier: X must be > 1, got {X}")
    M = math.sqrt(X) ** theta
    cd = const_C_over_D(euler_cutoff).value
    xi = {int(g): xi_optimal(int(g), X, M, cd) for g in _support(M)}
    lam = lambda_from_xi(xi, M)
    return MollifierSpec(X=X, theta=theta, M=M, xi=xi, lam=lam)


def mollifier_value(spec: MollifierSpec, d: int) -> float:
    """M(d) = sum_l lambda(l) sqrt(l) (8d/l), ascending l."""
    q = 8 * d
    return math.fsum(lam * math.sqrt(l) * kronecker(q, l)
                     for l, lam in sorted(spec.lam.items()))


# ---------------------------------------------------------------------------
# Closed-form predictions
# ---------------------------------------------------------------------------

def _check_theta(theta) -> None:
    if not 0 < theta <= 1:
        raise DomainError(f"theta must be in (0, 1], got {theta}")


def first_moment_shape(theta):
    """First-moment coefficient in units of K; exact on Fraction input."""
    _check_theta(theta)
    one = Fraction(1) if isinstance(theta, (Fraction, int)) else 1.0
    t = theta
    return 2 * one / 9 * ((1 + one / t) ** 3 - one / t ** 3)


def second_moment_shape(theta):
    """Second-moment coefficient in units of K; exact on Fraction input."""
    _check_theta(theta)
    one = Fraction(1) if isinstance(theta, (Fraction, int)) else 1.0
    t = theta
    return (4 * one / 81 + 8 * one / (27 * t) + 20 * one / (27 * t ** 2)
            + 76 * one / (81 * t ** 3) + 16 * one / (27 * t ** 4)
            + 4 * one / (27 * t ** 5))


def predicted_proportion(theta):
    """Nonvanishing proportion lower bound 1 - (theta+1)^(-3)."""
    _check_theta(theta)
    one = Fraction(1) if isinstance(theta, (Fraction, int)) else 1.0
    return 1 - one / (theta + 1) ** 3


def moment_unit(W: SmoothWeight) -> float:
    """K = 2 Phi^(0) / (3 zeta(2)) = (4/pi^2) Phi^(0)."""
    return 2.0 * phi_hat0(W) / (3.0 * ZETA2)


def predicted_first(theta: float, W: SmoothWeight) -> float:
    return float(first_moment_shape(theta)) * moment_unit(W)


def predicted_second(theta: float, W: SmoothWeight) -> float:
    return float(second_moment_shape(theta)) * moment_unit(W)


def identity_69(P: int = 10 ** 7) -> tuple[EulerProductValue, float]:
    """The 4/9 Euler-product identity, truncated at P with a tail bound.

    Computed as (4/9) * prod over odd p <= P of the combined per-prime
    factor f_C(p)^2 f_69(p) / f_D(p) (the combination cancels to 1 + O(p^-2),
    so truncation error nearly vanishes); returns (value, |value - 4/9|).
    """
    p = odd_primes(P)
    f_C = -1.0 / (p * (p + 1.0))
    h = _h_np(p)
    f_D = (1.0 - 1.0 / p) * h
    g1 = _g1_np(p)
    H = _H_np(p)
    f69 = (1.0 - 1.0 / p) * (1.0 + h * g1 ** 2 / (p * H))
    logs = 2.0 * np.log1p(f_C) + np.log(f69) - np.log(f_D)
    value = _product_with_tail(logs, p, 4.0 / 9.0, P)
    return value, abs(value.value - 4.0 / 9.0)


# ---------------------------------------------------------------------------
# Empirical mollified moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MollifiedMoments:
    S1: float
    S2: float
    lower_bound: float


def mollified_sweep(spec: MollifierSpec, W: SmoothWeight,
                    kernel: OmegaKernel | None = None, eps: float = 1e-12,
                    threads: int = 0,
                    cache: LValueCache | None = None) -> MollifiedMoments:
    """Empirical S1 = S(L M; Phi), S2 = S((L M)^2; Phi) and S1^2/S2.

    Sums run over odd square-free d in (X, 2X); L(1/2) is computed once
    per d (optionally through a shared cache) and the square-free
    restriction is exact.
    """
    X = spec.X
    if X > _SWEEP_BUDGET:
        raise BudgetError(
            f"mollified_sweep: X = {X} exceeds budget {_SWEEP_BUDGET} "
            "(raise with QC_SWEEP_MAX_X)")
    ds = sieve_odd_squarefree(int(X) + 1, int(math.ceil(2 * X)) - 1)
    if cache is not None:
        L = cache.get(ds)
    else:
        L, _, _ = sweep_values(ds, kernel, eps, threads)
    phi_w = W(ds / X) if callable(W) else weight_eval(W, ds / X)
    ls = np.array(sorted(spec.lam), dtype=np.int64)
    coef = np.array([spec.lam[int(l)] * math.sqrt(l) for l in ls])
    chi = np.empty((len(ds), len(ls)), dtype=np.int8)
    for jcol, l in enumerate(ls):
        chi[:, jcol] = [kronecker(8 * int(d), int(l)) for d in ds]
    Md = chi.astype(np.float64) @ coef
    t1 = L * Md * phi_w
    t2 = (L * Md) ** 2 * phi_w
    S1 = float(np.sum(t1)) / X
    S2 = float(np.sum(t2)) / X
    return MollifiedMoments(S1=S1, S2=S2, lower_bound=S1 * S1 / S2)
