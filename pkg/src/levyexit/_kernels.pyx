# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernel.

Performs the same IEEE operations in the same order as the numpy
fallback in _engine_py.py; compiled with -ffp-contract=off so results
are bit-for-bit identical.  Only the hot no-scheduled-jumps case is
compiled: affine coefficients, clamped-affine policy, interval/box/ball
domains, constant running cost.
"""

import numpy as np

cimport cython
from libc.math cimport isfinite

name = "cython"

ACTIVE = 0
EXITED = 1
NONFINITE = 2

cdef unsigned char C_ACTIVE = 0
cdef unsigned char C_EXITED = 1
cdef unsigned char C_NONFINITE = 2


def step_chunk(Py_ssize_t L, double[:, ::1] X, gauss_obj, levy_obj,
               lnorm_obj, double[::1] w, double dt, double sqdt,
               double pol_c0, double[::1] pol_c1, double pol_lo,
               double pol_hi,
               double[::1] b0, double[::1] b1, double[:, ::1] s0,
               double[:, ::1] s1,
               int dom_kind, double[::1] dom_lo, double[::1] dom_hi,
               double dom_r2,
               double jump_thr, int ell_mode, double ell_c,
               unsigned char[::1] has_tau, double[::1] acc,
               long long[::1] tau_rel, long long[::1] that_rel,
               double[:, ::1] tau_x, unsigned char[::1] jumped,
               unsigned char[::1] status,
               rec_states=None, rec_pre=None):
    cdef Py_ssize_t m = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t k = 0
    cdef double[:, :, ::1] gauss = None
    cdef double[:, :, ::1] levy = None
    cdef double[:, ::1] lnorm = None
    cdef bint has_gauss = gauss_obj is not None
    cdef bint has_levy = levy_obj is not None
    if has_gauss:
        gauss = gauss_obj
        k = gauss.shape[2]
    if has_levy:
        levy = levy_obj
        lnorm = lnorm_obj

    cdef double c_half = 0.5 * dt * ell_c
    cdef Py_ssize_t i, l, j, kk
    cdef double a, xi, sq, v
    cdef double xn[8]
    cdef bint pre_tau, in_open, in_closed, ok
    if d > 8:
        raise ValueError("compiled kernel supports d <= 8")

    with nogil:
        for i in range(m):
            if status[i] != C_ACTIVE:
                continue
            pre_tau = has_tau[i] == 0
            for l in range(L):
                # control value
                a = pol_c0
                for j in range(d):
                    a = a + X[i, j] * pol_c1[j]
                a = min(max(a, pol_lo), pol_hi)
                # drift + diffusion + jump increment
                for j in range(d):
                    xn[j] = X[i, j] + (b0[j] + a * b1[j]) * dt
                if has_gauss:
                    for kk in range(k):
                        xi = sqdt * gauss[i, l, kk]
                        for j in range(d):
                            xn[j] = xn[j] + (s0[j, kk] + a * s1[j, kk]) * xi
                if has_levy:
                    for j in range(d):
                        xn[j] = xn[j] + levy[i, l, j]

                ok = True
                for j in range(d):
                    if not isfinite(xn[j]):
                        ok = False
                if not ok:
                    status[i] = C_NONFINITE
                    break

                if ell_mode == 1 and pre_tau:
                    acc[i] = acc[i] + c_half * (w[l] + w[l + 1])

                # domain membership
                if dom_kind == 0:
                    in_open = True
                    in_closed = True
                elif dom_kind == 3:
                    sq = 0.0
                    for j in range(d):
                        v = xn[j] - dom_lo[j]
                        sq = sq + v * v
                    in_open = sq < dom_r2
                    in_closed = sq <= dom_r2
                else:
                    in_open = True
                    in_closed = True
                    for j in range(d):
                        if not (xn[j] > dom_lo[j] and xn[j] < dom_hi[j]):
                            in_open = False
                        if not (xn[j] >= dom_lo[j] and xn[j] <= dom_hi[j]):
                            in_closed = False

                if pre_tau and not in_open:
                    tau_rel[i] = l
                    for j in range(d):
                        tau_x[i, j] = xn[j]
                    if has_levy:
                        jumped[i] = lnorm[i, l] > jump_thr
                    pre_tau = False
                for j in range(d):
                    X[i, j] = xn[j]
                if not in_closed:
                    that_rel[i] = l
                    status[i] = C_EXITED
                    break
