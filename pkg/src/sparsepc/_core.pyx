# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: 1D recurrence tables, envelope DP, row assembly, MH scan.

The arithmetic here mirrors ``_core_py`` expression by expression so that both
backends produce bit-identical results (the extension is compiled with
-ffp-contract=off to rule out FMA contraction).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

HERMITE = 0
LEGENDRE = 1
HERMITE_PHYS = 2


cdef inline void _table_row(double x, int p, int family, double* t) nogil:
    cdef int k
    cdef double u = x
    if family == 2:
        u = sqrt(2.0) * x
    t[0] = 1.0
    if p >= 1:
        t[1] = u
    if family == 1:
        for k in range(1, p):
            t[k + 1] = (((2.0 * k + 1.0) * u) * t[k] - k * t[k - 1]) / (k + 1.0)
        for k in range(1, p + 1):
            t[k] = sqrt(2.0 * k + 1.0) * t[k]
    else:
        for k in range(1, p):
            t[k + 1] = (u * t[k] - sqrt(<double> k) * t[k - 1]) / sqrt(k + 1.0)


def poly_table(const double[::1] x, int p, int family):
    """Orthonormal 1D polynomial values, shape (len(x), p+1)."""
    cdef Py_ssize_t n = x.shape[0], j
    out_arr = np.empty((n, p + 1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for j in range(n):
            _table_row(x[j], p, family, &out[j, 0])
    return out_arr


def envelope(const double[:, ::1] points, int p, int family):
    """max_k |prod_i psi_{k_i}(xi_i)| over ||k||_1 <= p, per point."""
    cdef Py_ssize_t n = points.shape[0], j
    cdef int d = <int> points.shape[1]
    cdef int i, q, k
    cdef double m, v
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    tab_arr = np.empty(p + 1, dtype=np.float64)
    mprev_arr = np.empty(p + 1, dtype=np.float64)
    mnew_arr = np.empty(p + 1, dtype=np.float64)
    cdef double[::1] tab = tab_arr
    cdef double[::1] mprev = mprev_arr
    cdef double[::1] mnew = mnew_arr
    with nogil:
        for j in range(n):
            for q in range(p + 1):
                mprev[q] = 1.0
            for i in range(d):
                _table_row(points[j, i], p, family, &tab[0])
                for q in range(p + 1):
                    m = fabs(tab[0]) * mprev[q]
                    for k in range(1, q + 1):
                        v = fabs(tab[k]) * mprev[q - k]
                        if v > m:
                            m = v
                    mnew[q] = m
                for q in range(p + 1):
                    mprev[q] = mnew[q]
            out[j] = mprev[p]
    return out_arr


def basis_matrix(const double[:, ::1] points, const cnp.int64_t[:, ::1] indices,
                 int p, int family):
    """Rows of basis values: out[j, r] = prod_i psi_{indices[r, i]}(points[j, i])."""
    cdef Py_ssize_t n = points.shape[0], np_ = indices.shape[0], j, r
    cdef int d = <int> points.shape[1]
    cdef int i
    cdef double prod
    out_arr = np.empty((n, np_), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    tab_arr = np.empty((d, p + 1), dtype=np.float64)
    cdef double[:, ::1] tab = tab_arr
    with nogil:
        for j in range(n):
            for i in range(d):
                _table_row(points[j, i], p, family, &tab[i, 0])
            for r in range(np_):
                prod = tab[0, indices[r, 0]]
                for i in range(1, d):
                    prod = prod * tab[i, indices[r, i]]
                out[j, r] = prod
    return out_arr


def mh_scan(const double[::1] score, const double[::1] log_u, double score0):
    """Independence Metropolis-Hastings accept/reject scan over one chunk.

    ``score`` holds log target minus log proposal density per proposal and
    ``score0`` the same for the current state.  Returns (state, n_accept,
    final_score) where state[t] is the index of the proposal the chain sits on
    after step t (-1 while still on the initial state).
    """
    cdef Py_ssize_t m = score.shape[0], t
    cdef double cur = score0
    cdef cnp.int64_t a = -1
    cdef cnp.int64_t n_accept = 0
    state_arr = np.empty(m, dtype=np.int64)
    cdef cnp.int64_t[::1] state = state_arr
    with nogil:
        for t in range(m):
            if log_u[t] <= score[t] - cur:
                a = t
                cur = score[t]
                n_accept += 1
            state[t] = a
    return state_arr, n_accept, cur
