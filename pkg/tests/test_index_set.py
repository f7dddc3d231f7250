import itertools
import math

import numpy as np
import pytest

from sparsepc import MultiIndexSet, basis_count, build_index_set


def brute_force_indices(dimension, max_degree):
    """Oracle: filter the full integer grid by total order."""
    grid = itertools.product(range(max_degree + 1), repeat=dimension)
    return sorted(k for k in grid if sum(k) <= max_degree)


def test_enumeration_example_d2_p2():
    out = build_index_set(2, 2)
    expected = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert [tuple(row) for row in out] == expected


def test_counts_match_known_values():
    assert basis_count(20, 4) == 10626
    assert basis_count(2, 32) == 561
    assert basis_count(1, 5) == 6
    assert basis_count(30, 2) == 496


@pytest.mark.parametrize("dimension", range(1, 7))
@pytest.mark.parametrize("max_degree", range(0, 7))
def test_set_matches_brute_force(dimension, max_degree):
    out = build_index_set(dimension, max_degree)
    assert out.shape == (basis_count(dimension, max_degree), dimension)
    assert sorted(tuple(row) for row in out) == brute_force_indices(dimension, max_degree)
    # no duplicates
    assert len({tuple(row) for row in out}) == out.shape[0]


@pytest.mark.parametrize("dimension,max_degree", [(1, 4), (3, 5), (5, 3)])
def test_graded_order_with_first_coordinate_largest_ties(dimension, max_degree):
    out = build_index_set(dimension, max_degree)
    totals = out.sum(axis=1)
    assert np.all(np.diff(totals) >= 0)
    assert tuple(out[0]) == (0,) * dimension
    # within a block of equal total order, rows sort descending lexicographically
    for total in range(max_degree + 1):
        block = out[totals == total]
        rows = [tuple(r) for r in block]
        assert rows == sorted(rows, reverse=True)


def test_count_symmetry():
    for d in range(1, 8):
        for p in range(0, 8):
            assert basis_count(d, p) == basis_count(p, d) if p >= 1 else True
    assert basis_count(4, 9) == basis_count(9, 4)


def test_deterministic_repeat():
    a = build_index_set(4, 5)
    b = build_index_set(4, 5)
    assert np.array_equal(a, b)


def test_count_is_exact_binomial():
    for d in (1, 2, 5, 11):
        for p in (0, 1, 3, 9):
            assert basis_count(d, p) == math.comb(p + d, d)


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        basis_count(0, 3)
    with pytest.raises(ValueError):
        basis_count(2, -1)
    with pytest.raises(ValueError):
        build_index_set(0, 0)


def test_overflow_is_an_error_not_a_wrap():
    with pytest.raises(OverflowError):
        basis_count(40, 40)


def test_degree_zero_is_constant_only():
    out = build_index_set(3, 0)
    assert out.shape == (1, 3)
    assert tuple(out[0]) == (0, 0, 0)


def test_multi_index_set_container():
    ms = MultiIndexSet.total_order(2, 3)
    assert ms.size == len(ms) == basis_count(2, 3) == 10
    assert np.array_equal(ms.indices, build_index_set(2, 3))
