# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Arithmetic order mirrors ``_pykernels`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def sq_distances(const double[:, ::1] Q, const double[:, ::1] R):
    """Squared Euclidean distances, summed feature by feature in index order."""
    cdef Py_ssize_t nq = Q.shape[0], nr = R.shape[0], nf = Q.shape[1]
    cdef Py_ssize_t i, j, f
    cdef double acc, d
    out = np.empty((nq, nr), dtype=np.float64)
    cdef double[:, ::1] D = out
    with nogil:
        for i in range(nq):
            for j in range(nr):
                acc = 0.0
                for f in range(nf):
                    d = Q[i, f] - R[j, f]
                    acc = acc + d * d
                D[i, j] = acc
    return out


def nearest_index(const double[:, ::1] Q, const double[:, ::1] R):
    """Index of the nearest reference row for every query; ties go to the lowest index."""
    cdef Py_ssize_t nq = Q.shape[0], nr = R.shape[0], nf = Q.shape[1]
    cdef Py_ssize_t i, j, f, best_j
    cdef double acc, d, best
    out = np.empty(nq, dtype=np.int64)
    cdef cnp.int64_t[::1] idx = out
    with nogil:
        for i in range(nq):
            best = INFINITY
            best_j = 0
            for j in range(nr):
                acc = 0.0
                for f in range(nf):
                    d = Q[i, f] - R[j, f]
                    acc = acc + d * d
                    # partial sums only grow, so this cannot change the winner
                    if acc > best:
                        break
                if acc < best:
                    best = acc
                    best_j = j
            idx[i] = best_j
    return out


def mmd_combined(const cnp.int8_t[::1] domain, const cnp.int64_t[::1] cls,
                 const double[:, ::1] m0coef, const double[:, :, ::1] class_coef,
                 double mu):
    """(1 - mu) * M0 + mu * sum_c Mc, one pass over the (n+m)^2 entries.

    ``domain`` is 0 for source rows and 1 for target rows; ``cls`` is the
    0-based class (label or pseudo-label) or -1 to exclude the sample from
    every class term.
    """
    cdef Py_ssize_t N = domain.shape[0]
    cdef Py_ssize_t i, j
    cdef int di, dj
    cdef cnp.int64_t ci
    cdef double w0 = 1.0 - mu, cterm
    out = np.empty((N, N), dtype=np.float64)
    cdef double[:, ::1] M = out
    with nogil:
        for i in range(N):
            di = domain[i]
            ci = cls[i]
            for j in range(N):
                dj = domain[j]
                if ci >= 0 and cls[j] == ci:
                    cterm = class_coef[ci, di, dj]
                else:
                    cterm = 0.0
                M[i, j] = w0 * m0coef[di, dj] + mu * cterm
    return out
