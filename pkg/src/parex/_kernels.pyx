# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tridiagonal kernels.

All matrices are symmetric tridiagonal, stored as ``diag`` (length n) and
``off`` (length n - 1).  A factorisation is the tuple ``(off, w, cp)`` of
the Thomas algorithm: ``w[i]`` is the inverted pivot and ``cp[i]`` the
modified super-diagonal.
"""
import numpy as np

from parex.errors import SingularMatrixError

BACKEND = "cython"


def factor(const double[::1] diag, const double[::1] off):
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef double piv, scale = 0.0
    w_arr = np.empty(n)
    cp_arr = np.zeros(max(n - 1, 0))
    cdef double[::1] w = w_arr
    cdef double[::1] cp = cp_arr
    for i in range(n):
        if abs(diag[i]) > scale:
            scale = abs(diag[i])
    for i in range(n):
        piv = diag[i]
        if i > 0:
            piv -= off[i - 1] * cp[i - 1]
        if abs(piv) <= 1e-14 * scale or piv == 0.0:
            raise SingularMatrixError(f"pivot {piv!r} underflows at row {i}")
        w[i] = 1.0 / piv
        if i < n - 1:
            cp[i] = off[i] * w[i]
    return (np.asarray(off).copy(), w_arr, cp_arr)


cdef void _solve(const double[::1] off, const double[::1] w, const double[::1] cp,
                 const double[::1] rhs, double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t i
    out[0] = rhs[0] * w[0]
    for i in range(1, n):
        out[i] = (rhs[i] - off[i - 1] * out[i - 1]) * w[i]
    for i in range(n - 2, -1, -1):
        out[i] -= cp[i] * out[i + 1]


def solve(fac, const double[::1] rhs):
    off, w, cp = fac
    out = np.empty(rhs.shape[0])
    _solve(off, w, cp, rhs, out)
    return out


def matvec(const double[::1] diag, const double[::1] off, const double[::1] x):
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    for i in range(n):
        out[i] = diag[i] * x[i]
        if i > 0:
            out[i] += off[i - 1] * x[i - 1]
        if i < n - 1:
            out[i] += off[i] * x[i + 1]
    return out_arr


def euler_chain(fac, const double[::1] stiff_diag, const double[::1] stiff_off,
                const double[::1] v0, const double[:, ::1] loads):
    """Run ``loads.shape[0]`` implicit Euler substeps from ``v0`` in increment form.

    Row k of the states solves ``(M/delta + A) v_k = M v_{k-1}/delta + loads[k]``,
    computed as ``v_{k-1} + d_k`` with ``(M/delta + A) d_k = loads[k] - A v_{k-1}``.
    Returns ``(states, d_last)``.
    """
    off_arr, w_arr, cp_arr = fac
    cdef const double[::1] off = off_arr
    cdef const double[::1] w = w_arr
    cdef const double[::1] cp = cp_arr
    cdef Py_ssize_t steps = loads.shape[0]
    cdef Py_ssize_t n = v0.shape[0]
    cdef Py_ssize_t k, i
    out_arr = np.empty((steps, n))
    rhs_arr = np.empty(n)
    inc_arr = np.empty(n)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] rhs = rhs_arr
    cdef double[::1] inc = inc_arr
    cdef const double[::1] prev = v0
    with nogil:
        for k in range(steps):
            for i in range(n):
                rhs[i] = stiff_diag[i] * prev[i]
                if i > 0:
                    rhs[i] += stiff_off[i - 1] * prev[i - 1]
                if i < n - 1:
                    rhs[i] += stiff_off[i] * prev[i + 1]
                rhs[i] = loads[k, i] - rhs[i]
            _solve(off, w, cp, rhs, inc)
            for i in range(n):
                out[k, i] = prev[i] + inc[i]
            prev = out[k]
    return out_arr, inc_arr


def hat_load(const double[:, ::1] gq, const double[:, ::1] w_left, const double[:, ::1] w_right):
    """Interior load vector from Gauss-point values; element e spans nodes e, e+1."""
    cdef Py_ssize_t ne = gq.shape[0]
    cdef Py_ssize_t nq = gq.shape[1]
    cdef Py_ssize_t e, q
    cdef double sl, sr
    out_arr = np.zeros(max(ne - 1, 0))
    cdef double[::1] out = out_arr
    with nogil:
        for e in range(ne):
            sl = 0.0
            sr = 0.0
            for q in range(nq):
                sl = sl + gq[e, q] * w_left[e, q]
                sr = sr + gq[e, q] * w_right[e, q]
            if e > 0:
                out[e - 1] += sl
            if e < ne - 1:
                out[e] += sr
    return out_arr
