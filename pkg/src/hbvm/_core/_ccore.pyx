# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the numerical kernels (same contracts as _pycore)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, isfinite, INFINITY

cnp.import_array()

CONVERGED = 0
MAX_ITER = 1
STALLED = 2
DIVERGED = 3

cdef double DIVERGENCE_BOUND = 1e300


cdef void _classical(const double[::1] t, int n, double[:, ::1] L) noexcept nogil:
    cdef Py_ssize_t i, j
    for i in range(t.shape[0]):
        L[i, 0] = 1.0
        if n >= 1:
            L[i, 1] = t[i]
        for j in range(1, n):
            L[i, j + 1] = ((2 * j + 1) * t[i] * L[i, j] - j * L[i, j - 1]) / (j + 1)


def legendre_values(x, int n):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t npts = xv.shape[0], i, j
    cdef double[::1] t = np.empty(npts)
    out = np.empty((npts, n + 1))
    cdef double[:, ::1] L = out
    for i in range(npts):
        t[i] = 2.0 * xv[i] - 1.0
    with nogil:
        _classical(t, n, L)
        for i in range(npts):
            for j in range(n + 1):
                L[i, j] *= sqrt(2.0 * j + 1.0)
    return out


def legendre_primitives(x, int n):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t npts = xv.shape[0], i, j
    cdef double[::1] t = np.empty(npts)
    cdef double[:, ::1] L = np.empty((npts, n + 2))
    out = np.empty((npts, n + 1))
    cdef double[:, ::1] o = out
    for i in range(npts):
        t[i] = 2.0 * xv[i] - 1.0
    with nogil:
        _classical(t, n + 1, L)
        for i in range(npts):
            o[i, 0] = xv[i]
            for j in range(1, n + 1):
                o[i, j] = (L[i, j + 1] - L[i, j - 1]) / (2.0 * sqrt(2.0 * j + 1.0))
    return out


cdef bint _finite(const double[:, ::1] a) noexcept nogil:
    cdef Py_ssize_t i, j
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            if not isfinite(a[i, j]) or fabs(a[i, j]) > DIVERGENCE_BOUND:
                return False
    return True


def fixed_point(func, base, M, double scale, PW, gamma, double tol, int max_iter,
                int stall_limit):
    cdef const double[:, ::1] b = np.ascontiguousarray(base, dtype=np.float64)
    cdef const double[:, ::1] Mv = np.ascontiguousarray(M, dtype=np.float64)
    cdef const double[:, ::1] PWv = np.ascontiguousarray(PW, dtype=np.float64)
    cdef double[:, ::1] g = gamma
    cdef Py_ssize_t k = b.shape[0], m = b.shape[1], s = g.shape[0]
    cdef Py_ssize_t i, j, r, l
    Y = np.empty((k, m))
    cdef double[:, ::1] Yv = Y
    cdef double[:, ::1] new = np.empty((s, m))
    cdef const double[:, ::1] Fv
    cdef double acc, res = INFINITY, prev_res = INFINITY, prev_inc = 0.0, d, gmax, thresh
    cdef int it, stalls = 0
    F = None
    for it in range(1, max_iter + 1):
        for i in range(k):
            for j in range(m):
                acc = 0.0
                for r in range(s):
                    acc += Mv[i, r] * g[r, j]
                Yv[i, j] = b[i, j] + scale * acc
        if not _finite(Yv):
            return DIVERGED, it, res, F
        F = np.ascontiguousarray(func(Y), dtype=np.float64)
        Fv = F
        if not _finite(Fv):
            return DIVERGED, it, res, F
        res = 0.0
        gmax = 1.0
        for r in range(s):
            for j in range(m):
                acc = 0.0
                for l in range(k):
                    acc += PWv[r, l] * Fv[l, j]
                new[r, j] = acc
                d = fabs(acc - g[r, j])
                if d > res:
                    res = d
                if fabs(acc) > gmax:
                    gmax = fabs(acc)
        thresh = tol * gmax
        if res <= thresh and prev_inc <= thresh:
            return CONVERGED, it, res, F
        if res >= prev_res:
            stalls += 1
            if 0 < stall_limit <= stalls:
                return STALLED, it, res, F
        prev_res = res
        g[...] = new
        prev_inc = res
    return MAX_ITER, max_iter, res, F
