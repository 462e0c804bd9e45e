# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Gibbs sweep: truncated-normal latents plus the Gaussian beta draw.

Consumes raw doubles from the Generator's bit stream (inverse-CDF normals,
log-transform exponentials), so a chain is reproducible for a given seed and
backend. Mirrors tsec._kernel.pure.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport log, sqrt
from numpy.random cimport bitgen_t
from scipy.special.cython_special cimport ndtr, ndtri

from ..errors import SamplerError

name = "cython"

cdef double TAIL_CUTOFF = 5.0
cdef double JITTER = 1e-10


cdef inline double _uniform(bitgen_t *bg) noexcept nogil:
    cdef double u = bg.next_double(bg.state)
    if u <= 0.0:
        u = 1.1102230246251565e-16
    return u


cdef inline double _std_normal(bitgen_t *bg) noexcept nogil:
    return ndtri(_uniform(bg))


cdef inline double _std_exponential(bitgen_t *bg) noexcept nogil:
    return -log(1.0 - bg.next_double(bg.state))


cdef double _tn_lower_zero(double m, bitgen_t *bg) noexcept nogil:
    """One draw of N(m, 1) conditioned on being positive."""
    cdef double a = -m
    cdef double q, xi, alpha
    if a <= TAIL_CUTOFF:
        q = ndtr(m)
        xi = _uniform(bg) * q
        if xi < 1e-300:
            xi = 1e-300
        return m - ndtri(xi)
    alpha = 0.5 * (a + sqrt(a * a + 4.0))
    while True:
        xi = a + _std_exponential(bg) / alpha
        if _std_exponential(bg) >= 0.5 * (xi - alpha) * (xi - alpha):
            return m + xi


cdef int _cholesky(double[:, ::1] a, int p) noexcept nogil:
    """In-place lower Cholesky; returns nonzero on a non-positive pivot."""
    cdef int i, j, k
    cdef double s
    for j in range(p):
        s = a[j, j]
        for k in range(j):
            s -= a[j, k] * a[j, k]
        if s <= 0.0:
            return 1
        a[j, j] = sqrt(s)
        for i in range(j + 1, p):
            s = a[i, j]
            for k in range(j):
                s -= a[i, k] * a[j, k]
            a[i, j] = s / a[j, j]
    return 0


cdef void _solve_lower(double[:, ::1] l, double[::1] b, double[::1] out, int p) noexcept nogil:
    cdef int i, k
    cdef double s
    for i in range(p):
        s = b[i]
        for k in range(i):
            s -= l[i, k] * out[k]
        out[i] = s / l[i, i]


cdef void _solve_upper_t(double[:, ::1] l, double[::1] b, double[::1] out, int p) noexcept nogil:
    # Solves L^T out = b with L lower triangular.
    cdef int i, k
    cdef double s
    for i in range(p - 1, -1, -1):
        s = b[i]
        for k in range(i + 1, p):
            s -= l[k, i] * out[k]
        out[i] = s / l[i, i]


def gibbs_sweep(
    double[:, ::1] x_arms,
    cnp.int64_t[::1] trial_arm,
    signed char[::1] y,
    double[:, ::1] xtx,
    double[::1] prior_prec,
    double[::1] beta,
    double[::1] z_out,
    rng,
):
    cdef int n_arms = x_arms.shape[0]
    cdef int p = x_arms.shape[1]
    cdef int n_trials = trial_arm.shape[0]

    bit_generator = rng.bit_generator
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid BitGenerator capsule")
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    eta_arr = np.empty(n_arms)
    per_arm_arr = np.zeros(n_arms)
    work_arr = np.empty((p, p))
    xtz_arr = np.empty(p)
    half_arr = np.empty(p)
    mean_arr = np.empty(p)
    noise_arr = np.empty(p)
    cdef double[::1] eta = eta_arr
    cdef double[::1] per_arm = per_arm_arr
    cdef double[:, ::1] work = work_arr
    cdef double[::1] xtz = xtz_arr
    cdef double[::1] half = half_arr
    cdef double[::1] mean = mean_arr
    cdef double[::1] noise = noise_arr

    cdef int i, j, k, a
    cdef double s, m, w
    cdef int chol_fail = 0

    with bit_generator.lock, nogil:
        for a in range(n_arms):
            s = 0.0
            for j in range(p):
                s += x_arms[a, j] * beta[j]
            eta[a] = s

        for i in range(n_trials):
            a = <int> trial_arm[i]
            if y[i] == 1:
                m = eta[a]
                w = _tn_lower_zero(m, bg)
            else:
                m = -eta[a]
                w = -_tn_lower_zero(m, bg)
            z_out[i] = w
            per_arm[a] += w

        for j in range(p):
            s = 0.0
            for a in range(n_arms):
                s += x_arms[a, j] * per_arm[a]
            xtz[j] = s

        for i in range(p):
            for j in range(p):
                work[i, j] = xtx[i, j]
            work[i, i] += prior_prec[i]
        chol_fail = _cholesky(work, p)
        if chol_fail:
            for i in range(p):
                for j in range(p):
                    work[i, j] = xtx[i, j]
                work[i, i] += prior_prec[i] + JITTER
            chol_fail = _cholesky(work, p)

        if chol_fail == 0:
            _solve_lower(work, xtz, half, p)
            _solve_upper_t(work, half, mean, p)
            for j in range(p):
                half[j] = _std_normal(bg)
            _solve_upper_t(work, half, noise, p)
            for j in range(p):
                beta[j] = mean[j] + noise[j]

    if chol_fail:
        raise SamplerError(
            f"beta precision matrix not positive definite (p={p}, "
            f"min prior precision {min(prior_prec):.3g})"
        )
