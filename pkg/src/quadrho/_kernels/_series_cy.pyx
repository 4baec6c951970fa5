# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of `_pykernels`: identical factorial-scaled semantics,
plain C loops over the truncated bivariate series."""

import numpy as np

from libc.math cimport exp as c_exp
from libc.math cimport lgamma

cdef extern from "complex.h" nogil:
    double cabs(double complex)
    double complex cexp(double complex)

backend = "cython"

cdef double TINY = 1e-300


cdef void _apply_factor(
    double complex[:, ::1] src,
    double complex[:, ::1] dst,
    double complex g,
    int step_p,
    int step_q,
    double[::1] half_lg,
) noexcept nogil:
    cdef Py_ssize_t kmax = src.shape[0] - 1
    cdef Py_ssize_t p, q, s
    cdef Py_ssize_t dp, dq
    cdef double complex fs = 1.0
    cdef double wp, wq_max, wp_max, dmax = 0.0, v
    for p in range(kmax + 1):
        for q in range(kmax + 1):
            dst[p, q] = src[p, q]
            v = cabs(src[p, q])
            if v > dmax:
                dmax = v
    dmax += TINY
    s = 0
    while True:
        s += 1
        dp = step_p * s
        dq = step_q * s
        if dp > kmax or dq > kmax:
            break
        fs *= g / s
        wp_max = c_exp(half_lg[kmax] - half_lg[kmax - dp]) if dp else 1.0
        wq_max = c_exp(half_lg[kmax] - half_lg[kmax - dq]) if dq else 1.0
        if cabs(fs) * wp_max * wq_max * dmax < TINY:
            break
        for p in range(dp, kmax + 1):
            wp = c_exp(half_lg[p] - half_lg[p - dp]) if dp else 1.0
            for q in range(dq, kmax + 1):
                wq = c_exp(half_lg[q] - half_lg[q - dq]) if dq else 1.0
                dst[p, q] = dst[p, q] + fs * wp * wq * src[p - dp, q - dq]


def exp_quadratic_scaled(double complex c0, double complex l1, double complex l2,
                         double complex q20, double complex q02, double complex q11,
                         int order):
    """Scaled coefficient array of exp of a bivariate quadratic form."""
    cdef Py_ssize_t k1 = order + 1, p
    half_lg_arr = np.empty(k1, dtype=np.float64)
    cdef double[::1] half_lg = half_lg_arr
    for p in range(k1):
        half_lg[p] = 0.5 * lgamma(p + 1.0)
    cur_arr = np.zeros((k1, k1), dtype=np.complex128)
    nxt_arr = np.empty((k1, k1), dtype=np.complex128)
    cdef double complex[:, ::1] cur = cur_arr
    cdef double complex[:, ::1] nxt = nxt_arr
    cur[0, 0] = cexp(c0)
    cdef double complex[5] gs = [q11, q20, q02, l1, l2]
    cdef int[5] sps = [1, 2, 0, 1, 0]
    cdef int[5] sqs = [1, 0, 2, 0, 1]
    cdef int i
    for i in range(5):
        if gs[i] != 0:
            _apply_factor(cur, nxt, gs[i], sps[i], sqs[i], half_lg)
            cur, nxt = nxt, cur
            cur_arr, nxt_arr = nxt_arr, cur_arr
    return cur_arr


def rho_from_series(d, int n_cut, int s_max, double tail_eps=1e-14,
                    double conv_rtol=1e-10):
    """Contract a scaled series into density-matrix elements (see numpy twin)."""
    d_arr = np.ascontiguousarray(d, dtype=np.complex128)
    cdef double complex[:, ::1] dv = d_arr
    cdef Py_ssize_t kmax = dv.shape[0] - 1
    if n_cut + s_max > kmax:
        raise ValueError("series order too small for requested extraction")
    cdef Py_ssize_t k1 = kmax + 1

    lnfact_arr = np.empty(k1 + 1, dtype=np.float64)
    cdef double[::1] lnfact = lnfact_arr
    cdef Py_ssize_t i
    for i in range(k1 + 1):
        lnfact[i] = lgamma(i + 1.0)

    rho_arr = np.empty((n_cut + 1, n_cut + 1), dtype=np.complex128)
    conv_arr = np.zeros((n_cut + 1, n_cut + 1), dtype=np.uint8)
    used_arr = np.full((n_cut + 1, n_cut + 1), s_max, dtype=np.int64)
    cdef double complex[:, ::1] rho = rho_arr
    cdef unsigned char[:, ::1] conv = conv_arr
    cdef long long[:, ::1] used = used_arr

    cdef Py_ssize_t n, m, s
    cdef double complex total, term
    cdef double w, mag, scale, last
    cdef bint prev_small, small, stopped
    for n in range(n_cut + 1):
        for m in range(n_cut + 1):
            total = 0.0
            prev_small = False
            stopped = False
            last = 0.0
            for s in range(s_max + 1):
                w = c_exp(
                    0.5 * (lnfact[m + s] + lnfact[n + s] - lnfact[m] - lnfact[n])
                    - lnfact[s]
                )
                term = w * dv[m + s, n + s]
                total = total + term
                last = cabs(term)
                scale = cabs(total)
                if scale < TINY:
                    scale = TINY
                small = last <= tail_eps * scale
                if small and prev_small:
                    used[n, m] = s
                    stopped = True
                    break
                prev_small = small
            scale = cabs(total)
            if scale < TINY:
                scale = TINY
            conv[n, m] = 1 if (stopped or last <= conv_rtol * scale) else 0
            rho[n, m] = -total if n % 2 else total
    return rho_arr, conv_arr.astype(bool), used_arr
