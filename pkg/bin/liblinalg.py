#!/usr/bin/env python3

# platkh - exact integer linear algebra
# Copyright (C) 2024  Maurice (mausy5043) Hendrix
# AGPL-3.0-or-later  - see LICENSE

"""Smith normal form, integer solving and homology of free ℤ-complexes.

Dense matrices are numpy arrays with ``dtype=object`` so entries stay Python
ints and never overflow. Large sparse systems are first reduced by
eliminating ±1 pivots (cheapest Markowitz cost first); only the small core
without unit entries goes through the dense Smith form. All pivot choices are
deterministic: same input, same answer.
"""

import heapq
import logging
from collections import defaultdict
from collections.abc import Iterable, Mapping
from typing import NamedTuple

import numpy as np

LOGGER: logging.Logger = logging.getLogger(__name__)


class SparseIntMatrix:
    """Row-major dict-of-dicts integer matrix; zeros are never stored."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int) -> None:
        if rows < 0 or cols < 0:
            raise ValueError(f"negative matrix dimension {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self._data: dict[int, dict[int, int]] = {}

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def add(self, i: int, j: int, value: int) -> None:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"entry ({i}, {j}) outside a {self.rows}x{self.cols} matrix")
        if not value:
            return
        row = self._data.setdefault(i, {})
        v = row.get(j, 0) + value
        if v:
            row[j] = v
        else:
            del row[j]
            if not row:
                del self._data[i]

    def __getitem__(self, key: tuple[int, int]) -> int:
        i, j = key
        return self._data.get(i, {}).get(j, 0)

    def nnz(self) -> int:
        return sum(len(row) for row in self._data.values())

    def row_dicts(self) -> dict[int, dict[int, int]]:
        return {i: dict(row) for i, row in self._data.items()}

    def items(self) -> Iterable[tuple[int, int, int]]:
        for i in sorted(self._data):
            for j in sorted(self._data[i]):
                yield i, j, self._data[i][j]

    def to_dense(self) -> np.ndarray:
        out = zeros(self.rows, self.cols)
        for i, j, v in self.items():
            out[i, j] = v
        return out

    @classmethod
    def from_dense(cls, matrix: np.ndarray) -> "SparseIntMatrix":
        rows, cols = matrix.shape
        out = cls(rows, cols)
        for (i, j), v in np.ndenumerate(matrix):
            out.add(i, j, int(v))
        return out

    @classmethod
    def from_entries(
        cls, rows: int, cols: int, entries: Mapping[tuple[int, int], int]
    ) -> "SparseIntMatrix":
        out = cls(rows, cols)
        for (i, j), v in sorted(entries.items()):
            out.add(i, j, v)
        return out

    def __repr__(self) -> str:
        return f"SparseIntMatrix({self.rows}x{self.cols}, nnz={self.nnz()})"


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=object)


def eye(n: int) -> np.ndarray:
    out = zeros(n, n)
    for i in range(n):
        out[i, i] = 1
    return out


def as_matrix(data: np.ndarray | SparseIntMatrix | Iterable[Iterable[int]]) -> np.ndarray:
    """Dense object-dtype copy of ``data``."""
    if isinstance(data, SparseIntMatrix):
        return data.to_dense()
    arr = np.array(data, dtype=object)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-dimensional matrix, got shape {arr.shape}")
    out = zeros(*arr.shape)
    for (i, j), v in np.ndenumerate(arr):
        out[i, j] = int(v)
    return out


def as_sparse(data: np.ndarray | SparseIntMatrix | Iterable[Iterable[int]]) -> SparseIntMatrix:
    if isinstance(data, SparseIntMatrix):
        return data
    return SparseIntMatrix.from_dense(as_matrix(data))


class SmithResult(NamedTuple):
    """``left @ M @ right`` is diagonal with ``diagonal`` followed by zeros."""

    diagonal: tuple[int, ...]
    rank: int
    left: np.ndarray | None
    right: np.ndarray | None


# dense Smith form ------------------------------------------------------------


def _pivot(a: np.ndarray, t: int) -> tuple[int, int] | None:
    best: tuple[int, int, int] | None = None
    m, n = a.shape
    for i in range(t, m):
        for j in range(t, n):
            v = a[i, j]
            if v and (best is None or abs(v) < best[0]):
                best = (abs(v), i, j)
                if best[0] == 1:
                    return best[1], best[2]
    return None if best is None else (best[1], best[2])


def _swap(
    a: np.ndarray, left: np.ndarray | None, right: np.ndarray | None, t: int, i: int, j: int
) -> None:
    if i != t:
        a[[t, i], :] = a[[i, t], :]
        if left is not None:
            left[[t, i], :] = left[[i, t], :]
    if j != t:
        a[:, [t, j]] = a[:, [j, t]]
        if right is not None:
            right[:, [t, j]] = right[:, [j, t]]


def dense_smith(matrix: np.ndarray | SparseIntMatrix, transforms: bool = False) -> SmithResult:
    """Smith normal form by dense row and column operations."""
    a = as_matrix(matrix)
    m, n = a.shape
    left = eye(m) if transforms else None
    right = eye(n) if transforms else None
    t = 0
    while t < min(m, n):
        where = _pivot(a, t)
        if where is None:
            break
        _swap(a, left, right, t, *where)
        while True:
            clean = True
            for i in range(t + 1, m):
                if a[i, t]:
                    q = a[i, t] // a[t, t]
                    a[i, :] = a[i, :] - q * a[t, :]
                    if left is not None:
                        left[i, :] = left[i, :] - q * left[t, :]
                    clean = clean and not a[i, t]
            for j in range(t + 1, n):
                if a[t, j]:
                    q = a[t, j] // a[t, t]
                    a[:, j] = a[:, j] - q * a[:, t]
                    if right is not None:
                        right[:, j] = right[:, j] - q * right[:, t]
                    clean = clean and not a[t, j]
            if not clean:
                # a smaller remainder sits in row or column t
                cands = [(abs(a[i, t]), i, t) for i in range(t, m) if a[i, t]]
                cands += [(abs(a[t, j]), t, j) for j in range(t + 1, n) if a[t, j]]
                _, i, j = min(cands)
                _swap(a, left, right, t, i, j)
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if a[i, j] % a[t, t]),
                None,
            )
            if bad is None:
                break
            a[t, :] = a[t, :] + a[bad, :]
            if left is not None:
                left[t, :] = left[t, :] + left[bad, :]
        if a[t, t] < 0:
            a[t, :] = -a[t, :]
            if left is not None:
                left[t, :] = -left[t, :]
        t += 1
    return SmithResult(tuple(int(a[k, k]) for k in range(t)), t, left, right)


# sparse unit elimination -------------------------------------------------------


class _Reduction(NamedTuple):
    pivots: list[tuple[int, dict[int, int], int]]
    rest: dict[int, dict[int, int]]
    rhs: list[int] | None
    consistent: bool


def _eliminate_units(a: SparseIntMatrix, rhs: list[int] | None = None) -> _Reduction:
    """Gaussian elimination on ±1 pivots, lightest rows and columns first.

    Returns the pivot rows as ``(column, row, rhs)`` in elimination order and
    the remaining rows, which hold no unit entry and no pivot column.
    """
    rows = a.row_dicts()
    cols: dict[int, set[int]] = defaultdict(set)
    for i, row in rows.items():
        for j in row:
            cols[j].add(i)
    b = list(rhs) if rhs is not None else None
    heap = [(len(row), i) for i, row in rows.items()]
    heapq.heapify(heap)
    pivots: list[tuple[int, dict[int, int], int]] = []
    consistent = True
    while heap:
        length, i = heapq.heappop(heap)
        row = rows.get(i)
        if row is None or len(row) != length:
            continue
        units = [j for j, v in row.items() if v in (1, -1)]
        if not units:
            continue
        j = min(units, key=lambda c: (len(cols[c]), c))
        pv = row[j]
        for k in sorted(cols[j] - {i}):
            other = rows[k]
            factor = other[j] * pv
            for c, v in row.items():
                value = other.get(c, 0) - factor * v
                if value:
                    if c not in other:
                        cols[c].add(k)
                    other[c] = value
                elif c in other:
                    del other[c]
                    cols[c].discard(k)
            if b is not None:
                b[k] -= factor * b[i]
            if other:
                heapq.heappush(heap, (len(other), k))
            else:
                del rows[k]
                if b is not None and b[k]:
                    consistent = False
        del rows[i]
        for c in row:
            cols[c].discard(i)
        pivots.append((j, row, b[i] if b is not None else 0))
    return _Reduction(pivots, rows, b, consistent)


def _dense_core(rest: Mapping[int, Mapping[int, int]]) -> tuple[list[int], list[int], np.ndarray]:
    row_ids = sorted(rest)
    col_ids = sorted({j for row in rest.values() for j in row})
    core = zeros(len(row_ids), len(col_ids))
    col_pos = {j: k for k, j in enumerate(col_ids)}
    for r, i in enumerate(row_ids):
        for j, v in rest[i].items():
            core[r, col_pos[j]] = v
    return row_ids, col_ids, core


def smith(matrix: np.ndarray | SparseIntMatrix, transforms: bool = False) -> SmithResult:
    """Smith normal form over ℤ.

    Args:
        matrix: integer matrix (never modified).
        transforms: also return unimodular ``left``, ``right`` with
            ``left @ matrix @ right == diag``; this takes the dense route.

    Returns:
        SmithResult with the positive invariant factors in divisibility order.
    """
    if transforms:
        return dense_smith(matrix, transforms=True)
    red = _eliminate_units(as_sparse(matrix))
    core = dense_smith(_dense_core(red.rest)[2]) if red.rest else SmithResult((), 0, None, None)
    diagonal = (1,) * len(red.pivots) + core.diagonal
    return SmithResult(diagonal, len(diagonal), None, None)


def rank(matrix: np.ndarray | SparseIntMatrix) -> int:
    return smith(matrix).rank


def solve_z(matrix: np.ndarray | SparseIntMatrix, rhs: Iterable[int]) -> list[int] | None:
    """Return an integer x with ``matrix @ x == rhs`` or None when there is none.

    Unit pivots are eliminated in a fixed order: shortest row first (ties by
    row index), in it the unit column with the fewest entries (ties by column
    index). The remaining core is solved through its
    Smith form ``left @ core @ right = diag`` with the coordinates beyond the
    rank set to zero, and the pivot columns are back-substituted with every
    other free column zero. So the particular solution returned is the one
    whose free parameters vanish in that basis. It is not the solution of
    smallest norm, but the same system always yields the same x, which keeps
    lifted maps and cache keys reproducible.

    Raises:
        ValueError: when ``rhs`` does not match the number of rows.
    """
    a = as_sparse(matrix)
    b = [int(x) for x in rhs]
    if len(b) != a.rows:
        raise ValueError(f"right-hand side has {len(b)} entries, matrix has {a.rows} rows")
    red = _eliminate_units(a, b)
    assert red.rhs is not None
    if not red.consistent:
        return None
    x = [0] * a.cols
    if red.rest:
        row_ids, col_ids, core = _dense_core(red.rest)
        core_rhs = [red.rhs[i] for i in row_ids]
        sol = _dense_solve(core, core_rhs)
        if sol is None:
            return None
        for j, v in zip(col_ids, sol, strict=True):
            x[j] = v
    for j, row, value in reversed(red.pivots):
        pv = row[j]
        acc = value - sum(v * x[c] for c, v in row.items() if c != j)
        x[j] = acc * pv
    original = a.row_dicts()
    for i in range(a.rows):
        if sum(v * x[j] for j, v in original.get(i, {}).items()) != b[i]:
            return None
    return x


def _dense_solve(a: np.ndarray, b: list[int]) -> list[int] | None:
    m, n = a.shape
    if n == 0:
        return [] if not any(b) else None
    result = dense_smith(a, transforms=True)
    assert result.left is not None and result.right is not None
    ub = result.left.dot(np.array(b, dtype=object)) if m else []
    z = [0] * n
    for k in range(m):
        value = int(ub[k])
        if k < result.rank:
            if value % result.diagonal[k]:
                return None
            z[k] = value // result.diagonal[k]
        elif value:
            return None
    x = result.right.dot(np.array(z, dtype=object))
    return [int(v) for v in x]


def kernel_basis(matrix: np.ndarray | SparseIntMatrix) -> list[list[int]]:
    """ℤ-basis of the kernel, as the trailing columns of the right transform."""
    a = as_matrix(matrix)
    m, n = a.shape
    if n == 0:
        return []
    if m == 0:
        return [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    result = dense_smith(a, transforms=True)
    assert result.right is not None
    return [[int(result.right[i, k]) for i in range(n)] for k in range(result.rank, n)]


class HomologyGroup(NamedTuple):
    free: int
    torsion: tuple[int, ...]

    def is_zero(self) -> bool:
        return not self.free and not self.torsion


def homology_at(
    d_in: np.ndarray | SparseIntMatrix,
    d_out: np.ndarray | SparseIntMatrix,
    dim: int | None = None,
) -> HomologyGroup:
    """ker(d_out) / im(d_in) at the middle term.

    Args:
        d_in: incoming map, shape ``(dim, *)``.
        d_out: outgoing map, shape ``(*, dim)``.
        dim: rank of the middle term; taken from the shapes when omitted.

    Raises:
        ValueError: the maps do not meet, or ``d_out @ d_in`` is not zero.
    """
    s_in = as_sparse(d_in)
    s_out = as_sparse(d_out)
    if dim is None:
        dim = s_in.rows
    if s_in.rows != dim or s_out.cols != dim:
        raise ValueError(f"shapes {s_in.shape} and {s_out.shape} do not meet at dimension {dim}")
    if not is_zero_product(s_out, s_in):
        raise ValueError("composite of the outgoing and incoming maps is not zero")
    out_rank = rank(s_out)
    in_smith = smith(s_in)
    free = dim - out_rank - in_smith.rank
    torsion = tuple(f for f in in_smith.diagonal if f > 1)
    return HomologyGroup(free, torsion)


def is_zero_product(left: SparseIntMatrix, right: SparseIntMatrix) -> bool:
    """True when ``left @ right`` vanishes."""
    by_row: dict[int, dict[int, int]] = right.row_dicts()
    for _, row in left.row_dicts().items():
        acc: dict[int, int] = defaultdict(int)
        for k, v in row.items():
            for j, w in by_row.get(k, {}).items():
                acc[j] += v * w
        if any(acc.values()):
            return False
    return True
