import itertools
import math

import numpy as np
import pytest

import liblinalg as la


def test_sparse_matrix_entries():
    m = la.SparseIntMatrix(2, 3)
    m.add(0, 1, 4)
    m.add(0, 1, -4)
    m.add(1, 2, 5)
    assert m.nnz() == 1
    assert m[1, 2] == 5
    assert list(m.items()) == [(1, 2, 5)]
    with pytest.raises(IndexError):
        m.add(2, 0, 1)


def test_smith_form():
    assert la.smith([[2, 4], [6, 8]]).diagonal == (2, 4)
    assert la.smith([[1, 0], [0, 0]]).rank == 1
    assert la.rank([[1, 2], [2, 4]]) == 1


def test_smith_transforms():
    m = la.as_matrix([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    result = la.smith(m, transforms=True)
    assert result.diagonal == (2, 6, 12)
    diag = result.left.dot(m).dot(result.right)
    expected = np.diag(np.array([2, 6, 12], dtype=object))
    assert (diag == expected).all()


def test_solve_z():
    x = la.solve_z([[1, 1], [0, 2]], [3, 4])
    assert x == [1, 2]
    assert la.solve_z([[2]], [3]) is None
    assert la.solve_z([[1], [1]], [1, 2]) is None


def test_solve_z_checks_rhs_length():
    with pytest.raises(ValueError):
        la.solve_z([[1, 0]], [1, 2])


def test_kernel_basis():
    basis = la.kernel_basis([[1, 1]])
    assert len(basis) == 1
    assert basis[0][0] == -basis[0][1] != 0


def test_homology_with_torsion():
    # ℤ --2--> ℤ --> 0
    group = la.homology_at([[2]], la.SparseIntMatrix(0, 1), 1)
    assert group == la.HomologyGroup(0, (2,))
    # 0 --> ℤ --> 0
    free = la.homology_at(la.SparseIntMatrix(1, 0), la.SparseIntMatrix(0, 1), 1)
    assert free == la.HomologyGroup(1, ())


def test_homology_rejects_nonzero_composite():
    with pytest.raises(ValueError):
        la.homology_at([[1]], [[1]], 1)


def test_solve_z_sets_free_coordinates_to_zero():
    assert la.solve_z([[1, 1]], [3]) == [3, 0]
    assert la.solve_z([[1, 1]], [3]) == la.solve_z([[1, 1]], [3])


def _det(rows):
    # cofactor expansion along the first row; exact on Python ints
    if len(rows) == 1:
        return rows[0][0]
    return sum(
        (-1) ** j * rows[0][j] * _det([r[:j] + r[j + 1:] for r in rows[1:]])
        for j in range(len(rows))
        if rows[0][j]
    )


def _invariant_factors(matrix):
    rows, cols = len(matrix), len(matrix[0])
    divisors = [1]
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for rs in itertools.combinations(range(rows), k):
            for cs in itertools.combinations(range(cols), k):
                g = math.gcd(g, _det([[matrix[r][c] for c in cs] for r in rs]))
        if not g:
            break
        divisors.append(g)
    return tuple(divisors[k] // divisors[k - 1] for k in range(1, len(divisors)))


@pytest.mark.parametrize("seed", range(25))
def test_smith_agrees_with_the_gcd_of_minors(seed):
    rng = np.random.default_rng(seed)
    shape = (int(rng.integers(1, 5)), int(rng.integers(1, 5)))
    matrix = [[int(v) for v in row] for row in rng.integers(-6, 7, size=shape)]
    assert la.smith(matrix).diagonal == _invariant_factors(matrix)
    assert la.dense_smith(matrix).diagonal == _invariant_factors(matrix)


@pytest.mark.parametrize("seed", range(10))
def test_homology_against_ranks_and_minors(seed):
    rng = np.random.default_rng(100 + seed)
    d_in = rng.integers(-3, 4, size=(4, 3))
    kernel = la.kernel_basis(d_in.T)
    mix = rng.integers(-3, 4, size=(2, len(kernel)))
    d_out = mix.dot(np.array(kernel, dtype=object).reshape(len(kernel), 4))
    group = la.homology_at(d_in, d_out, 4)
    dense_in = np.array(d_in, dtype=float)
    dense_out = np.array(d_out.tolist(), dtype=float)
    free = 4 - np.linalg.matrix_rank(dense_in) - np.linalg.matrix_rank(dense_out)
    torsion = tuple(f for f in _invariant_factors(d_in.tolist()) if f > 1)
    assert group == la.HomologyGroup(int(free), torsion)
