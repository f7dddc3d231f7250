"""Pure-numpy fallback kernels, arithmetic-identical to the compiled core.

Every expression matches ``_core.pyx`` operation for operation; the two
backends are interchangeable and produce bit-identical output.
"""

import numpy as np

HERMITE = 0
LEGENDRE = 1
HERMITE_PHYS = 2


def poly_table(x, p, family):
    """Orthonormal 1D polynomial values, shape (len(x), p+1)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    out = np.empty((n, p + 1))
    u = np.sqrt(2.0) * x if family == HERMITE_PHYS else x
    out[:, 0] = 1.0
    if p >= 1:
        out[:, 1] = u
    if family == LEGENDRE:
        for k in range(1, p):
            out[:, k + 1] = (((2.0 * k + 1.0) * u) * out[:, k] - k * out[:, k - 1]) / (k + 1.0)
        for k in range(1, p + 1):
            out[:, k] = np.sqrt(2.0 * k + 1.0) * out[:, k]
    else:
        for k in range(1, p):
            out[:, k + 1] = (u * out[:, k] - np.sqrt(float(k)) * out[:, k - 1]) / np.sqrt(k + 1.0)
    return out


def envelope(points, p, family):
    """max_k |prod_i psi_{k_i}(xi_i)| over ||k||_1 <= p, per point."""
    points = np.asarray(points, dtype=np.float64)
    n, d = points.shape
    mprev = np.ones((p + 1, n))
    mnew = np.empty((p + 1, n))
    for i in range(d):
        a = np.abs(poly_table(np.ascontiguousarray(points[:, i]), p, family))
        for q in range(p + 1):
            m = a[:, 0] * mprev[q]
            for k in range(1, q + 1):
                m = np.maximum(m, a[:, k] * mprev[q - k])
            mnew[q] = m
        mprev, mnew = mnew, mprev
    return mprev[p].copy()


def basis_matrix(points, indices, p, family):
    """Rows of basis values: out[j, r] = prod_i psi_{indices[r, i]}(points[j, i])."""
    points = np.asarray(points, dtype=np.float64)
    indices = np.asarray(indices, dtype=np.int64)
    d = points.shape[1]
    tables = [poly_table(np.ascontiguousarray(points[:, i]), p, family) for i in range(d)]
    out = tables[0][:, indices[:, 0]]
    for i in range(1, d):
        out = out * tables[i][:, indices[:, i]]
    return out


def mh_scan(score, log_u, score0):
    """Independence Metropolis-Hastings accept/reject scan over one chunk."""
    m = score.shape[0]
    state = np.empty(m, dtype=np.int64)
    cur = score0
    a = -1
    n_accept = 0
    for t in range(m):
        if log_u[t] <= score[t] - cur:
            a = t
            cur = score[t]
            n_accept += 1
        state[t] = a
    return state, n_accept, cur
