"""Central values L(1/2) for the even quadratic characters of conductor 8d.

For odd square-free d the character n -> (8d/n) is real, primitive and
even, and the smoothed functional-equation identity

    L(1/2)^j = 2 A_j(d),
    A_j(d) = sum_n (8d/n) d_j(n) n^(-1/2) omega_j(n (pi/8d)^(j/2))

holds exactly for every j >= 1; the kernel decay makes the sum effectively
finite. An independent oracle evaluates the same L-value through the
conductor decomposition into Hurwitz zeta values at s = 1/2,

    L(1/2) = q^(-1/2) sum_{a=1}^{q} (q/a) zeta_H(1/2, a/q),   q = 8d,

with zeta_H computed by Euler-Maclaurin (50-term shift, Bernoulli
corrections through B_20, extended-precision accumulation). The two
routes share no code beyond the Kronecker symbol.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _fastmath as fm
from .errors import BudgetError, DomainError
from .ntheory import is_odd_squarefree, sieve_odd_squarefree
from .smoothing import ENVELOPE_K, OmegaKernel, build_omega_kernel

__all__ = [
    "CentralValue",
    "CensusSummary",
    "LValueCache",
    "truncation_length",
    "a_value",
    "central_value",
    "oracle_central",
    "hurwitz_zeta",
    "sweep_values",
    "census",
    "default_kernel",
]

_ORACLE_BUDGET = int(os.environ.get("QC_ORACLE_MAX_CONDUCTOR", 24000))

# Bernoulli numbers B_2 .. B_20 for the Euler-Maclaurin corrections.
_BERNOULLI = (
    1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6,
    -3617 / 510, 43867 / 798, -174611 / 330,
)

_KERNEL_CACHE: dict[int, OmegaKernel] = {}


def default_kernel(j: int) -> OmegaKernel:
    """Process-wide shared kernel cache for omega_j."""
    if j not in _KERNEL_CACHE:
        _KERNEL_CACHE[j] = build_omega_kernel(j)
    return _KERNEL_CACHE[j]


def use_kernel_directory(path) -> None:
    """Back the process kernel cache with persisted tables under `path`.

    Valid files are loaded; missing or corrupt ones are rebuilt and saved,
    so repeated runs skip the quadrature warm-up.
    """
    from pathlib import Path

    from .smoothing import load_kernel, save_kernel

    base = Path(path)
    base.mkdir(parents=True, exist_ok=True)
    for j in (1, 2, 3):
        f = base / f"omega{j}.qck"
        if f.exists():
            try:
                k = load_kernel(f)
                if k.j == j:
                    _KERNEL_CACHE[j] = k
                    continue
            except ValueError:
                pass
        _KERNEL_CACHE[j] = build_omega_kernel(j)
        save_kernel(_KERNEL_CACHE[j], f)


@dataclass(frozen=True)
class CentralValue:
    d: int
    L: float
    truncation_N: int
    tail_estimate: float


# ---------------------------------------------------------------------------
# Truncation control
# ---------------------------------------------------------------------------

def _tail_bound(j: int, d: int, N: int) -> float:
    """Bound on sum_{n>N} d_j(n) n^(-1/2) K_j exp(-(j/2) xi_n^(2/j)).

    Uses d_j(n) <= n^(j-1) (exact at j = 1; d <= n and d_3 <= d^2 <= n^2
    otherwise) and geometric domination of the term ratio past N; returns
    inf when the ratio is not yet < 1.
    """
    a = math.pi / (8.0 * d)  # xi_n^(2/j) = a * n^(2/j)

    def term(n: float) -> float:
        e = -(j / 2.0) * a * n ** (2.0 / j) + (j - 1.5) * math.log(n)
        return ENVELOPE_K[j] * math.exp(e) if e < 700 else math.inf

    t1 = term(N + 1.0)
    if not math.isfinite(t1):
        return math.inf
    r = term(N + 2.0) / t1 if t1 > 0 else 0.0
    if r >= 1.0:
        return math.inf
    return t1 / (1.0 - r)


def truncation_length(j: int, d: int, eps: float) -> int:
    """Smallest N with the envelope tail below eps, then a 1.5x safety factor."""
    if j not in (1, 2, 3):
        raise DomainError(f"truncation_length: j must be 1, 2 or 3, got {j}")
    if d < 1:
        raise DomainError(f"truncation_length: d must be >= 1, got {d}")
    if not 0 < eps <= 1e-6:
        raise DomainError(f"truncation_length: eps must be in (0, 1e-6], got {eps}")
    a = math.pi / (8.0 * d)
    # initial guess from the exponential alone, then scan
    n = max(4, int(((2.0 / j) * math.log(1.0 / eps) / a) ** (j / 2.0)))
    lo, hi = 1, n
    while _tail_bound(j, d, hi) >= eps:
        lo, hi = hi, hi * 2
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if _tail_bound(j, d, mid) < eps:
            hi = mid
        else:
            lo = mid
    return int(math.ceil(1.5 * hi))


_SPF_CACHE: dict[int, np.ndarray] = {}
_ONES_CACHE: dict[int, np.ndarray] = {}
_DJ_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _spf(nmax: int) -> np.ndarray:
    best = max((k for k in _SPF_CACHE if k >= nmax), default=None)
    if best is None:
        table = fm.smallest_prime_factors(nmax)
        _SPF_CACHE.clear()
        _SPF_CACHE[nmax] = table
        return table
    return _SPF_CACHE[best]


def _dj_table(j: int, nmax: int) -> np.ndarray:
    """Divisor-function table d_j(0..nmax); only the largest per j is kept."""
    if j == 1:
        key = max((k for k in _ONES_CACHE if k >= nmax), default=None)
        if key is None:
            _ONES_CACHE.clear()
            _ONES_CACHE[nmax] = np.ones(nmax + 1, dtype=np.int64)
            key = nmax
        return _ONES_CACHE[key]
    key2 = max((k for (jj, k) in _DJ_CACHE if jj == j and k >= nmax), default=None)
    if key2 is None:
        for old in [kk for kk in _DJ_CACHE if kk[0] == j]:
            del _DJ_CACHE[old]
        _DJ_CACHE[(j, nmax)] = fm.divisor_table(j, nmax)
        key2 = nmax
    return _DJ_CACHE[(j, key2)]


# ---------------------------------------------------------------------------
# Functional-equation route
# ---------------------------------------------------------------------------

def a_value(j: int, d: int, kernel: OmegaKernel | None = None,
            eps: float = 1e-12) -> float:
    """A_j(d) for odd square-free d, summed to the envelope truncation."""
    if not is_odd_squarefree(d):
        raise DomainError(f"a_value: d must be odd square-free, got {d}")
    K = kernel if kernel is not None else default_kernel(j)
    if K.j != j:
        raise DomainError(f"a_value: kernel is for j={K.j}, requested j={j}")
    arg = (math.pi / (8.0 * d)) ** (j / 2.0)
    N = _effective_N(j, d, eps, K)  # kernel cutoff zeroes the series beyond
    dj = _dj_table(j, N)
    spf = _spf(N)
    C = K.coeffs
    return float(fm.afe_sum(8 * d, N, arg, dj, spf, K.t0, K.dt,
                            C[0], C[1], C[2], C[3], K.xi_floor, K.xi_cutoff))


def _effective_N(j: int, d: int, eps: float, K: OmegaKernel) -> int:
    """Series length actually summed: the envelope truncation, capped where
    the cached kernel is identically zero."""
    arg = (math.pi / (8.0 * d)) ** (j / 2.0)
    return min(truncation_length(j, d, eps), int(K.xi_cutoff / arg) + 2)


def central_value(d: int, kernel: OmegaKernel | None = None,
                  eps: float = 1e-12) -> CentralValue:
    """L(1/2) for the conductor-8d character, via L = 2 A_1(d)."""
    K = kernel if kernel is not None else default_kernel(1)
    N = _effective_N(1, d, eps, K)
    L = 2.0 * a_value(1, d, K, eps)
    return CentralValue(d=d, L=L, truncation_N=N,
                        tail_estimate=2.0 * _tail_bound(1, d, N))


# ---------------------------------------------------------------------------
# Hurwitz-zeta oracle
# ---------------------------------------------------------------------------

def hurwitz_zeta(s: float, x: np.ndarray, shift: int = 50,
                 bernoulli_terms: int = 10) -> np.ndarray:
    """zeta(s, x) for 0 < x <= 1, s real != 1, by Euler-Maclaurin.

    shift >= 50 direct terms, then the integral + half term + Bernoulli
    corrections through B_{2*bernoulli_terms}; computed in extended
    precision. For s = 1/2, shift = 50 the truncation error is far below
    1e-30.
    """
    if bernoulli_terms > len(_BERNOULLI):
        raise DomainError(f"hurwitz_zeta: at most {len(_BERNOULLI)} Bernoulli terms")
    xl = np.asarray(x, dtype=np.longdouble)
    sl = np.longdouble(s)
    k = np.arange(shift, dtype=np.longdouble)
    main = np.sum((xl[:, None] + k[None, :]) ** (-sl), axis=1)
    xN = xl + shift
    out = main + xN ** (1 - sl) / (sl - 1) + 0.5 * xN ** (-sl)
    poch = sl
    fac = np.longdouble(1.0)
    for jj in range(1, bernoulli_terms + 1):
        fac *= (2 * jj - 1) * (2 * jj)
        out += np.longdouble(_BERNOULLI[jj - 1]) / fac * poch * xN ** (-sl - (2 * jj - 1))
        poch *= (sl + 2 * jj - 1) * (sl + 2 * jj)
    return out


def oracle_central(d: int) -> float:
    """L(1/2) via Hurwitz zeta values at a/q, q = 8d; independent of a_value."""
    if not is_odd_squarefree(d):
        raise DomainError(f"oracle_central: d must be odd square-free, got {d}")
    q = 8 * d
    if q > _ORACLE_BUDGET:
        raise BudgetError(
            f"oracle_central: conductor {q} exceeds budget {_ORACLE_BUDGET} "
            "(raise with QC_ORACLE_MAX_CONDUCTOR)")
    a = np.arange(1, q + 1, dtype=np.int64)
    spf = _spf(q)
    chi = fm.chi_top_table(q, q, spf)[1:].astype(np.longdouble)
    if int(np.sum(chi)) != 0:
        raise AssertionError(f"character orthogonality failed for d={d}")
    zh = hurwitz_zeta(0.5, a / np.longdouble(q))
    return float(q ** np.longdouble(-0.5) * np.sum(chi * zh))


# ---------------------------------------------------------------------------
# Sweeps and the census
# ---------------------------------------------------------------------------

def sweep_values(ds: np.ndarray, kernel: OmegaKernel | None = None,
                 eps: float = 1e-12, threads: int = 0,
                 block: int = 2048) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """L(1/2), truncation N and tail bound for each odd square-free d in ds.

    The d-range is split into contiguous blocks handed to a thread pool
    (the numba kernels drop the GIL); every value lands at its own index,
    so the output is independent of scheduling and thread count.
    """
    ds = np.asarray(ds, dtype=np.int64)
    K = kernel if kernel is not None else default_kernel(1)
    if threads <= 0:
        threads = os.cpu_count() or 1
    n_arr = np.array([_effective_N(1, int(d), eps, K) for d in ds],
                     dtype=np.int64)
    tails = np.array([2.0 * _tail_bound(1, int(d), int(n)) for d, n in zip(ds, n_arr)])
    nmax = int(n_arr.max()) if len(n_arr) else 4
    spf = _spf(nmax)
    ones = _dj_table(1, nmax)
    C = K.coeffs
    out = np.empty(len(ds), dtype=np.float64)

    def work(i0: int, i1: int) -> None:
        for i in range(i0, i1):
            d = int(ds[i])
            arg = math.sqrt(math.pi / (8.0 * d))
            out[i] = 2.0 * fm.afe_sum(8 * d, int(n_arr[i]), arg, ones, spf,
                                      K.t0, K.dt, C[0], C[1], C[2], C[3],
                                      K.xi_floor, K.xi_cutoff)

    spans = [(i, min(i + block, len(ds))) for i in range(0, len(ds), block)]
    if threads == 1 or len(spans) <= 1:
        for i0, i1 in spans:
            work(i0, i1)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda sp: work(*sp), spans))
    return out, n_arr, tails


class LValueCache:
    """Memoized L(1/2) values shared across sweeps.

    Missing d's are computed in one deterministic batch per request, so a
    census, a moment grid and a mollified sweep over overlapping ranges
    price each d only once.
    """

    def __init__(self, kernel: OmegaKernel | None = None, eps: float = 1e-12,
                 threads: int = 0):
        self.kernel = kernel if kernel is not None else default_kernel(1)
        self.eps = eps
        self.threads = threads
        self._values: dict[int, float] = {}

    def get(self, ds: np.ndarray) -> np.ndarray:
        ds = np.asarray(ds, dtype=np.int64)
        missing = np.array([d for d in ds if int(d) not in self._values],
                           dtype=np.int64)
        if len(missing):
            L, _, _ = sweep_values(missing, self.kernel, self.eps, self.threads)
            self._values.update(zip(missing.tolist(), L.tolist()))
        return np.array([self._values[int(d)] for d in ds], dtype=np.float64)


@dataclass
class CensusSummary:
    lo: int
    hi: int
    threshold: float
    count_total: int
    count_nonvanishing: int
    proportion: float
    min_abs_L: float
    argmin_d: int
    negative_count: int
    below_threshold: list[int] = field(default_factory=list)
    negative_d: list[int] = field(default_factory=list)


def census(lo: int, hi: int, threshold: float = 1e-8,
           kernel: OmegaKernel | None = None, eps: float = 1e-12,
           threads: int = 0, out_csv=None,
           cache: LValueCache | None = None) -> CensusSummary:
    """Count nonvanishing central values over odd square-free d in [lo, hi].

    Positivity is not assumed: any negative L is recorded, as is every d
    with |L| at or below the threshold. Optionally writes 'd,L,N' rows.
    """
    if lo > hi:
        return CensusSummary(lo, hi, threshold, 0, 0, 0.0, math.inf, 0, 0)
    ds = sieve_odd_squarefree(max(lo, 1), hi)
    if len(ds) == 0:
        return CensusSummary(lo, hi, threshold, 0, 0, 0.0, math.inf, 0, 0)
    if cache is not None:
        L = cache.get(ds)
        N = np.array([_effective_N(1, int(d), cache.eps, cache.kernel)
                      for d in ds], dtype=np.int64)
    else:
        L, N, _tails = sweep_values(ds, kernel, eps, threads)
    absL = np.abs(L)
    nonzero = absL > threshold
    imin = int(np.argmin(absL))
    summary = CensusSummary(
        lo=lo, hi=hi, threshold=threshold,
        count_total=len(ds),
        count_nonvanishing=int(np.count_nonzero(nonzero)),
        proportion=float(np.count_nonzero(nonzero) / len(ds)),
        min_abs_L=float(absL[imin]),
        argmin_d=int(ds[imin]),
        negative_count=int(np.count_nonzero(L < 0)),
        below_threshold=[int(d) for d in ds[~nonzero]],
        negative_d=[int(d) for d in ds[L < 0]],
    )
    if out_csv is not None:
        with open(out_csv, "w", encoding="utf-8") as fh:
            fh.write("d,L,N\n")
            for d, lv, nv in zip(ds, L, N):
                fh.write(f"{int(d)},{lv:.17g},{int(nv)}\n")
    return summary
