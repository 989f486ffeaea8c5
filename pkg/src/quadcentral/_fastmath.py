"""Numba kernels for the arithmetic-sweep hot loops.

Everything here is deterministic: sums are accumulated in fixed ascending
order with Kahan compensation, so results are bit-identical for a given
configuration regardless of how callers partition work across threads.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = [
    "jacobi",
    "smallest_prime_factors",
    "chi_top_table",
    "afe_sum",
    "tau_table",
    "divisor_table",
]


@njit(cache=True, nogil=True)
def jacobi(a, n):
    """Jacobi symbol (a/n) for odd n >= 1, any a >= 0 (binary algorithm)."""
    a = a % n
    t = 1
    while a != 0:
        while a % 2 == 0:
            a //= 2
            r = n % 8
            if r == 3 or r == 5:
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    if n == 1:
        return t
    return 0


@njit(cache=True, nogil=True)
def smallest_prime_factors(n):
    """spf[k] = smallest prime factor of k (spf[0] = spf[1] = 1)."""
    spf = np.zeros(n + 1, dtype=np.int32)
    for i in range(2, n + 1):
        if spf[i] == 0:
            j = i
            while j <= n:
                if spf[j] == 0:
                    spf[j] = i
                j += i
    spf[0] = 1
    if n >= 1:
        spf[1] = 1
    return spf


@njit(cache=True, nogil=True)
def chi_top_table(q, nmax, spf):
    """chi[n] = (q/n) for n = 0..nmax with q = 8d: zero at even n,
    completely multiplicative, Jacobi at odd primes."""
    chi = np.zeros(nmax + 1, dtype=np.int8)
    if nmax >= 1:
        chi[1] = 1
    for n in range(3, nmax + 1, 2):
        p = spf[n]
        if p == n:
            chi[n] = jacobi(q % p, p)
        else:
            chi[n] = chi[p] * chi[n // p]
    return chi


@njit(cache=True, nogil=True)
def _spline_eval(t, t0, dt, c0, c1, c2, c3, nseg):
    i = int((t - t0) / dt)
    if i < 0:
        i = 0
    elif i > nseg - 1:
        i = nseg - 1
    u = t - (t0 + dt * i)
    return ((c0[i] * u + c1[i]) * u + c2[i]) * u + c3[i]


@njit(cache=True, nogil=True)
def afe_sum(q, N, arg, dj, spf, t0, dt, c0, c1, c2, c3, xi_floor, xi_cutoff):
    """sum over odd n <= N of (q/n) d_j(n) n^(-1/2) omega(n*arg).

    dj is the divisor-function table (dj[n]; pass an all-ones view for
    j = 1). omega comes from the cubic-spline cache (1 below xi_floor,
    0 beyond xi_cutoff). Fixed ascending-n order, Kahan compensation.
    """
    nseg = len(c0)
    chi = chi_top_table(q, N, spf)
    s = 0.0
    comp = 0.0
    ln_floor = np.log(xi_floor)
    for n in range(1, N + 1, 2):
        ch = chi[n]
        if ch == 0:
            continue
        xi = n * arg
        if xi >= xi_cutoff:
            break
        if xi <= xi_floor:
            om = 1.0
        else:
            om = _spline_eval(np.log(xi), t0, dt, c0, c1, c2, c3, nseg)
        term = ch * dj[n] * om / np.sqrt(n)
        y = term - comp
        t = s + y
        comp = (t - s) - y
        s = t
    return s


@njit(cache=True, nogil=True)
def tau_table(n, kvals):
    """tau_k(n) = sum_{a mod n} (a/n) e(ak/n) for each k (n odd).

    Builds the Jacobi row (a/n) and the n-th roots of unity once, then
    accumulates each k with exponents reduced mod n.
    """
    sym = np.empty(n, dtype=np.int8)
    for a in range(n):
        sym[a] = jacobi(a, n)
    re = np.empty(n, dtype=np.float64)
    im = np.empty(n, dtype=np.float64)
    for m in range(n):
        ang = 2.0 * np.pi * m / n
        re[m] = np.cos(ang)
        im[m] = np.sin(ang)
    out = np.empty(len(kvals), dtype=np.complex128)
    for i in range(len(kvals)):
        k = kvals[i] % n
        sr = 0.0
        si = 0.0
        for a in range(n):
            s = sym[a]
            if s != 0:
                m = (a * k) % n
                sr += s * re[m]
                si += s * im[m]
        out[i] = complex(sr, si)
    return out


@njit(cache=True, nogil=True)
def divisor_table(j, n):
    """d_j(m) for m = 0..n by repeated divisor-sum convolution (int64)."""
    out = np.ones(n + 1, dtype=np.int64)
    out[0] = 0
    for _ in range(j - 1):
        nxt = np.zeros(n + 1, dtype=np.int64)
        for a in range(1, n + 1):
            va = out[a]
            m = a
            while m <= n:
                nxt[m] += va
                m += a
        out = nxt
    return out
