# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled solver inner kernels; see _kernels_py for the reference semantics."""

from libc.math cimport sqrt, fabs

import numpy as np


def hier_prox_inplace(double[:, ::1] w, double tau):
    """Nested suffix-group prox applied to every row of ``w``, in place."""
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t q = w.shape[1]
    cdef Py_ssize_t i, l
    cdef double cur, nrm, prod
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if n == 0 or q == 0 or tau == 0.0:
        return
    scratch = np.empty(q, dtype=np.float64)
    cdef double[::1] scale = scratch
    with nogil:
        for i in range(n):
            # right-to-left: shrinkage factor per suffix group, using
            # ||GST(u, tau)|| = max(0, ||u|| - tau) to carry the suffix norm
            cur = 0.0
            for l in range(q - 1, -1, -1):
                nrm = sqrt(w[i, l] * w[i, l] + cur * cur)
                if nrm <= tau:
                    scale[l] = 0.0
                    cur = 0.0
                else:
                    scale[l] = 1.0 - tau / nrm
                    cur = nrm - tau
            # left-to-right: entry at lag l collects the factors of every
            # group that contains it
            prod = 1.0
            for l in range(q):
                prod *= scale[l]
                w[i, l] *= prod


def soft_threshold_inplace(double[:, ::1] w, double tau):
    """Elementwise soft-threshold, in place."""
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t q = w.shape[1]
    cdef Py_ssize_t i, l
    cdef double v
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if n == 0 or q == 0 or tau == 0.0:
        return
    with nogil:
        for i in range(n):
            for l in range(q):
                v = fabs(w[i, l]) - tau
                if v <= 0.0:
                    w[i, l] = 0.0
                elif w[i, l] > 0.0:
                    w[i, l] = v
                else:
                    w[i, l] = -v


def hier_penalty(double[:, ::1] w):
    """Sum of suffix-group norms over the rows of ``w``."""
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t q = w.shape[1]
    cdef Py_ssize_t i, l
    cdef double total = 0.0
    cdef double sumsq
    if n == 0 or q == 0:
        return 0.0
    with nogil:
        for i in range(n):
            sumsq = 0.0
            for l in range(q - 1, -1, -1):
                sumsq += w[i, l] * w[i, l]
                total += sqrt(sumsq)
    return total
