"""Pure numpy implementation of the series kernels.

Semantics are shared with the compiled twin in `_series_cy`:

* Bivariate truncated series are stored factorial-scaled,
  d[p, q] = c[p, q] * sqrt(p! q!), where c[p, q] is the Taylor
  coefficient of l^p lbar^q.  Scaling keeps every physically relevant
  entry and extraction weight inside double range up to order ~300.
* `exp_quadratic_scaled` builds exp(c0 + l1*l + l2*lbar + q20*l^2
  + q02*lbar^2 + q11*l*lbar) by multiplying the closed-form factor
  series in a fixed order (mixed, l^2, lbar^2, linear l, linear lbar);
  the factors commute, so the order only pins rounding for
  reproducibility.
* `rho_from_series` evaluates, for every (n, m) <= n_cut,
  (-1)^n * sum_s sqrt((m+s)! (n+s)!) / (s! sqrt(m! n!)) * d[m+s, n+s],
  the contraction that turns the generating series into density-matrix
  elements, with an early-termination tail test.
"""

import numpy as np
from scipy.special import gammaln

backend = "numpy"

_TINY = 1e-300


def _half_lg(order):
    # 0.5 * ln(p!) for p = 0..order
    return 0.5 * gammaln(np.arange(order + 1) + 1.0)


def _apply_factor(d, g, step_p, step_q, half_lg):
    """Multiply scaled series `d` by exp(g * l^step_p * lbar^step_q)."""
    if g == 0:
        return d
    kmax = d.shape[0] - 1
    out = np.zeros_like(d)
    out += d  # s = 0 term
    fs = 1.0 + 0j
    dmax = float(np.max(np.abs(d))) + _TINY
    smax_p = kmax // step_p if step_p else kmax
    smax_q = kmax // step_q if step_q else kmax
    for s in range(1, min(smax_p, smax_q) + 1):
        fs *= g / s
        dp, dq = step_p * s, step_q * s
        wp = np.exp(half_lg[dp:] - half_lg[: kmax + 1 - dp]) if dp else np.ones(kmax + 1)
        wq = np.exp(half_lg[dq:] - half_lg[: kmax + 1 - dq]) if dq else np.ones(kmax + 1)
        # largest possible weight this order contributes
        if abs(fs) * wp[-1] * wq[-1] * dmax < _TINY:
            break
        block = d[: kmax + 1 - dp, : kmax + 1 - dq]
        out[dp:, dq:] += fs * (wp[:, None] * wq[None, :]) * block
    return out


def exp_quadratic_scaled(c0, l1, l2, q20, q02, q11, order):
    """Scaled coefficient array of exp of a bivariate quadratic form."""
    k1 = order + 1
    half_lg = _half_lg(order)
    d = np.zeros((k1, k1), dtype=complex)
    d[0, 0] = np.exp(c0)
    d = _apply_factor(d, q11, 1, 1, half_lg)
    d = _apply_factor(d, q20, 2, 0, half_lg)
    d = _apply_factor(d, q02, 0, 2, half_lg)
    d = _apply_factor(d, l1, 1, 0, half_lg)
    d = _apply_factor(d, l2, 0, 1, half_lg)
    return d


def rho_from_series(d, n_cut, s_max, tail_eps=1e-14, conv_rtol=1e-10):
    """Contract a scaled series into density-matrix elements.

    Returns (rho, converged, terms_used) where `converged[n, m]` is False
    when the final retained term still exceeds conv_rtol times the
    partial sum, and `terms_used[n, m]` is the first order at which the
    running tail dropped below tail_eps (s_max if it never did).
    """
    kmax = d.shape[0] - 1
    if n_cut + s_max > kmax:
        raise ValueError("series order too small for requested extraction")
    lg = gammaln(np.arange(kmax + 2) + 0.0)  # lg[k] = ln(k!) via gammaln(k+1)

    def lnfact(k):
        return lg[k + 1]

    ks = np.arange(s_max + 1)
    rho = np.empty((n_cut + 1, n_cut + 1), dtype=complex)
    converged = np.zeros((n_cut + 1, n_cut + 1), dtype=bool)
    terms_used = np.full((n_cut + 1, n_cut + 1), s_max, dtype=np.int64)
    for n in range(n_cut + 1):
        for m in range(n_cut + 1):
            start = min(n, m)
            diag = np.diagonal(d, offset=n - m)[start : start + s_max + 1]
            w = np.exp(
                0.5 * (lnfact(m + ks) + lnfact(n + ks) - lnfact(m) - lnfact(n))
                - lnfact(ks)
            )
            terms = w * diag
            partial = np.cumsum(terms)
            mags = np.abs(terms)
            # stop after two consecutive terms below the running tail bound
            small = mags <= tail_eps * np.maximum(np.abs(partial), _TINY)
            hit = np.flatnonzero(small[:-1] & small[1:])
            if hit.size:
                stop = int(hit[0]) + 1
                total = partial[stop]
                terms_used[n, m] = stop
                converged[n, m] = True
            else:
                total = partial[-1]
                converged[n, m] = mags[-1] <= conv_rtol * max(abs(total), _TINY)
            rho[n, m] = -total if n % 2 else total
    return rho, converged, terms_used
