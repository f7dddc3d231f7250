"""Orthonormal polynomial bases, growth envelopes, and Gauss quadrature.

Families:

* ``"hermite"``: probabilists' Hermite polynomials, orthonormal under the
  standard Gaussian measure on R.
* ``"legendre"``: Legendre polynomials, orthonormal under the uniform
  probability measure on [-1, 1].

``"hermite_phys"`` (physicists' convention, orthonormal under
``pi**-0.5 * exp(-x**2)``) is accepted by :func:`eval_1d` for the tail
diagnostics built on :func:`eta_k`; tensor bases use the two families above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import backends
from .index_set import basis_count, build_index_set

FAMILIES = ("hermite", "legendre")

_CODES = {
    "hermite": backends.HERMITE,
    "legendre": backends.LEGENDRE,
    "hermite_phys": backends.HERMITE_PHYS,
}


@lru_cache(maxsize=64)
def _cached_indices(dimension: int, max_degree: int) -> np.ndarray:
    out = build_index_set(dimension, max_degree)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class BasisSpec:
    """A tensor basis: family, input dimension, and total order."""

    family: str
    dimension: int
    degree: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if self.degree < 0:
            raise ValueError(f"degree must be >= 0, got {self.degree}")

    @property
    def size(self) -> int:
        """Number of basis functions P = C(degree + dimension, dimension)."""
        return basis_count(self.dimension, self.degree)

    @property
    def indices(self) -> np.ndarray:
        """Graded multi-index set, shape (P, dimension)."""
        return _cached_indices(self.dimension, self.degree)


def _family_code(family: str) -> int:
    try:
        return _CODES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}") from None


def eval_1d(family: str, k: int, xi) -> np.ndarray | float:
    """Evaluate the orthonormal 1D polynomial of order ``k`` at ``xi``."""
    if k < 0:
        raise ValueError(f"order must be >= 0, got {k}")
    code = _family_code(family)
    x = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    table = backends.poly_table(np.ascontiguousarray(x), k, code)
    vals = table[:, k]
    return float(vals[0]) if np.isscalar(xi) or np.ndim(xi) == 0 else vals


def _as_points(spec: BasisSpec, points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != spec.dimension:
        raise ValueError(
            f"points must have shape (n, {spec.dimension}), got {np.asarray(points).shape}"
        )
    if spec.family == "legendre" and pts.size and np.any(np.abs(pts) > 1.0):
        raise ValueError("Legendre points must lie in [-1, 1]^d")
    return np.ascontiguousarray(pts)


def basis_row_matrix(spec: BasisSpec, points) -> np.ndarray:
    """Evaluate all P basis functions at each point; shape (n, P)."""
    pts = _as_points(spec, points)
    return backends.basis_matrix(pts, spec.indices, spec.degree, _family_code(spec.family))


def eval_row(spec: BasisSpec, xi) -> np.ndarray:
    """Evaluate all P basis functions at the single point ``xi``; shape (P,)."""
    return basis_row_matrix(spec, xi)[0]


def envelope_b(spec: BasisSpec, points) -> np.ndarray | float:
    """Envelope B(xi) = max_k |psi_k(xi)| over the index set, per point.

    Computed by a dynamic program over dimensions in O(d p^2) per point;
    equals ``max(abs(eval_row(spec, xi)))`` exactly.
    """
    pts = np.asarray(points, dtype=np.float64)
    scalar = pts.ndim == 1
    out = backends.envelope(_as_points(spec, points), spec.degree, _family_code(spec.family))
    return float(out[0]) if scalar else out


def hermite_function(k: int, xi) -> np.ndarray | float:
    """exp(-xi^2/4) * psi_k(xi) with probabilists' orthonormal psi_k.

    Uniformly bounded in both k and xi, unlike the bare polynomials.
    """
    x = np.asarray(xi, dtype=np.float64)
    return np.exp(-(x**2) / 4.0) * eval_1d("hermite", k, xi)


def eta_k(k: int, xi) -> np.ndarray | float:
    """Growth exponent eta_k(xi) = log(psi_k(xi)) / xi^2, physicists' convention.

    Valid for ``k >= 1`` on the monotone region ``xi**2 > 2k`` (xi > 0), where
    ``sigma_k = sqrt(xi**2 - 2k)`` is real.  ``log(C_k)`` with
    ``C_k = sqrt(2**k k!)`` is evaluated via ``lgamma`` to avoid overflow.

    Raises:
        ValueError: If ``k < 1`` or any ``xi**2 <= 2k`` or ``xi <= 0``.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    x = np.asarray(xi, dtype=np.float64)
    if np.any(x <= 0.0) or np.any(x**2 <= 2.0 * k):
        raise ValueError(f"eta_{k} requires xi > sqrt(2k) = {math.sqrt(2 * k):.6g}")
    sigma = np.sqrt(x**2 - 2.0 * k)
    log_ck = 0.5 * (k * math.log(2.0) + math.lgamma(k + 1.0))
    xi2 = x**2
    out = (
        0.5
        - sigma / (2.0 * x)
        - log_ck / xi2
        - k / (2.0 * xi2)
        + k * np.log(sigma + x) / xi2
        + np.log(0.5 * (1.0 + x / sigma)) / (2.0 * xi2)
    )
    return float(out) if np.ndim(xi) == 0 else out


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss quadrature nodes/weights for a family's orthogonality measure."""

    family: str
    n: int
    nodes: np.ndarray
    weights: np.ndarray


def gauss_rule(family: str, n: int) -> QuadratureRule:
    """Gauss rule with ``n`` nodes from the symmetric tridiagonal Jacobi matrix.

    Weights are normalized to the probability measure (they sum to 1).

    Raises:
        ValueError: On unknown family or ``n < 1``.
        numpy.linalg.LinAlgError: If the eigensolver fails to converge.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}, expected one of {FAMILIES}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    diag = np.zeros(n)
    k = np.arange(1, n, dtype=np.float64)
    if family == "hermite":
        off = np.sqrt(k)
    else:
        off = k / np.sqrt(4.0 * k**2 - 1.0)
    if n == 1:
        nodes = np.zeros(1)
        weights = np.ones(1)
    else:
        nodes, vecs = eigh_tridiagonal(diag, off)
        weights = vecs[0, :] ** 2
    return QuadratureRule(family=family, n=n, nodes=nodes, weights=weights)
