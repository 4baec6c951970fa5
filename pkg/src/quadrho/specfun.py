"""Stable special-function kernels: Laguerre, Hermite, log-factorial.

Conventions
-----------
Hermite polynomials are the *physicists'* family, generating function
exp(-t^2 + 2 t x) = sum_n H_n(x) t^n / n!, recurrence
H_{n+1} = 2 z H_n - 2 n H_{n-1}.  The probabilists' convention would
silently corrupt every downstream excitation formula, so tests pin the
generating function explicitly.

All arguments in scope stay at n <= ~200 where the three-term recurrences
are stable; no asymptotic branches are provided.
"""

import math

import numpy as np


def laguerre(n, x):
    """Laguerre polynomial L_n(x) by the three-term recurrence."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    if n == 0:
        return 1.0
    prev, cur = 1.0, 1.0 - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur


def hermite(n, z):
    """Physicists' Hermite polynomial H_n(z), complex argument allowed."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    if n == 0:
        return 1.0 + 0j if isinstance(z, complex) else 1.0
    prev, cur = 1.0, 2 * z
    for k in range(1, n):
        prev, cur = cur, 2 * z * cur - 2 * k * prev
    return cur


def log_factorial(n):
    """ln(n!), exact integer product for n <= 20, log-gamma beyond."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n <= 20:
        return math.log(math.factorial(n)) if n > 1 else 0.0
    return math.lgamma(n + 1)


def hermite_laguerre_residual(n, x, y):
    """Relative residual of the binomial Hermite-pair / Laguerre identity.

    Compares sum_{k<=n} C(n,k) H_{2n-2k}(x) H_{2k}(y) against
    (-4)^n n! L_n(x^2 + y^2); returns |lhs - rhs| / max(1, |rhs|).
    """
    lhs = 0.0
    for k in range(n + 1):
        lhs += math.comb(n, k) * hermite(2 * (n - k), x) * hermite(2 * k, y)
    rhs = (-4.0) ** n * math.factorial(n) * laguerre(n, x * x + y * y)
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def hermite_series_scaled(n_max, w):
    """H_k(w) / (2w)^k for k = 0..n_max, as a numpy array.

    The scaled recurrence Hs_{k+1} = Hs_k - (k / (2 w^2)) Hs_{k-1} keeps
    every entry O(1) for large |w|, which is where the unscaled H_k would
    overflow.  Requires w != 0.
    """
    if w == 0:
        raise ValueError("scaled Hermite series undefined at w = 0")
    out = np.empty(n_max + 1, dtype=complex)
    out[0] = 1.0
    if n_max == 0:
        return out
    out[1] = 1.0
    inv2w2 = 1.0 / (2.0 * w * w)
    for k in range(1, n_max):
        out[k + 1] = out[k] - k * inv2w2 * out[k - 1]
    return out
