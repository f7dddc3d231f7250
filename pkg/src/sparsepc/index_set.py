"""Total-order multi-index sets for tensorized polynomial bases.

A multi-index :math:`k = (k_1, \\dots, k_d)` identifies the tensor basis
function :math:`\\psi_k(\\xi) = \\prod_i \\psi_{k_i}(\\xi_i)`.  The total-order
set of degree :math:`p` collects all indices with :math:`\\|k\\|_1 \\le p`; its
cardinality is :math:`P = \\binom{p+d}{d}`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_INT64_MAX = 2**63 - 1


def basis_count(dimension: int, max_degree: int) -> int:
    """Number of multi-indices with total order at most ``max_degree``.

    Args:
        dimension: Number of input variables, at least 1.
        max_degree: Maximum total order, at least 0.

    Returns:
        The exact binomial coefficient C(max_degree + dimension, dimension).

    Raises:
        ValueError: If ``dimension < 1`` or ``max_degree < 0``.
        OverflowError: If the count exceeds 2**63 - 1.
    """
    if dimension < 1:
        raise ValueError(f"dimension must be >= 1, got {dimension}")
    if max_degree < 0:
        raise ValueError(f"max_degree must be >= 0, got {max_degree}")
    count = math.comb(max_degree + dimension, dimension)
    if count > _INT64_MAX:
        raise OverflowError(
            f"basis count C({max_degree + dimension}, {dimension}) exceeds int64 range"
        )
    return count


def _compositions(total: int, dimension: int):
    """Yield compositions of ``total`` into ``dimension`` parts, first part largest."""
    if dimension == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(total - head, dimension - 1):
            yield (head, *tail)


def build_index_set(dimension: int, max_degree: int) -> np.ndarray:
    """Generate the total-order multi-index set in graded order.

    Indices are sorted by total order; ties are enumerated with earlier
    coordinates carrying the larger degree, so for ``dimension=2``,
    ``max_degree=2`` the order is (0,0), (1,0), (0,1), (2,0), (1,1), (0,2).

    Args:
        dimension: Number of input variables, at least 1.
        max_degree: Maximum total order, at least 0.

    Returns:
        Integer array of shape (P, dimension) with P = basis_count(...).
    """
    count = basis_count(dimension, max_degree)
    out = np.empty((count, dimension), dtype=np.int64)
    row = 0
    for total in range(max_degree + 1):
        for comp in _compositions(total, dimension):
            out[row] = comp
            row += 1
    return out


@dataclass(frozen=True)
class MultiIndexSet:
    """A frozen total-order multi-index set.

    Attributes:
        dimension: Number of input variables.
        max_degree: Maximum total order.
        indices: Array of shape (size, dimension), graded order.
    """

    dimension: int
    max_degree: int
    indices: np.ndarray = field(repr=False)

    @classmethod
    def total_order(cls, dimension: int, max_degree: int) -> "MultiIndexSet":
        return cls(dimension, max_degree, build_index_set(dimension, max_degree))

    @property
    def size(self) -> int:
        return self.indices.shape[0]

    def __len__(self) -> int:
        return self.size
