# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled quadrature kernels (see ``_kernels_py`` for the reference version)."""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange

cnp.import_array()


cdef inline Py_ssize_t _wrap(Py_ssize_t a, Py_ssize_t n) noexcept nogil:
    # offsets lie in [-n/2, n/2], so one correction suffices
    if a >= n:
        return a - n
    if a < 0:
        return a + n
    return a


def _sum_1d(const double[::1] psi, const long[:, ::1] offsets, const double[::1] weights):
    cdef Py_ssize_t n = psi.shape[0], m = weights.shape[0]
    cdef Py_ssize_t i, j, a, b
    cdef double acc, two
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] res = out
    for i in prange(n, nogil=True, schedule="static"):
        acc = 0.0
        two = psi[i] + psi[i]
        for j in range(m):
            a = _wrap(i + offsets[j, 0], n)
            b = _wrap(i - offsets[j, 0], n)
            acc = acc + weights[j] * ((two - psi[a]) - psi[b])
        res[i] = acc
    return out


def _sum_2d(const double[:, ::1] psi, const long[:, ::1] offsets, const double[::1] weights):
    cdef Py_ssize_t n0 = psi.shape[0], n1 = psi.shape[1], m = weights.shape[0]
    cdef Py_ssize_t i, k, j, a0, a1, b0, b1
    cdef double acc, two
    out = np.empty((n0, n1), dtype=np.float64)
    cdef double[:, ::1] res = out
    for i in prange(n0, nogil=True, schedule="static"):
        for k in range(n1):
            acc = 0.0
            two = psi[i, k] + psi[i, k]
            for j in range(m):
                a0 = _wrap(i + offsets[j, 0], n0)
                a1 = _wrap(k + offsets[j, 1], n1)
                b0 = _wrap(i - offsets[j, 0], n0)
                b1 = _wrap(k - offsets[j, 1], n1)
                acc = acc + weights[j] * ((two - psi[a0, a1]) - psi[b0, b1])
            res[i, k] = acc
    return out


def sym_difference_sum(psi, offsets, weights):
    psi = np.ascontiguousarray(psi, dtype=np.float64)
    offs = np.ascontiguousarray(offsets, dtype=np.int_)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if psi.ndim == 1:
        return _sum_1d(psi, offs, w)
    if psi.ndim == 2:
        return _sum_2d(psi, offs, w)
    raise ValueError("only 1-D and 2-D fields are supported")
