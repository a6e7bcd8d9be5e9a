"""
Dense complex linear algebra with explicit rank tolerances.

Every rank decision in the package comes through here, so every caller states its
tolerance in one of two ways:
    tol  — absolute cut on singular values / pivots;
    rtol — relative to the largest singular value, floored by `atol`.
When neither is given, the LAPACK-style default max(rows, cols)·eps·σ_max is used.
"""
from __future__ import annotations
from dataclasses import dataclass
from typing import Sequence
import numpy as np

from .errors import NumericalError, ShapeError


@dataclass(frozen=True)
class RankReport:
    """Numerical rank with the singular values it was read from."""
    rank: int
    singular_values: tuple[float, ...]
    tol: float

    @property
    def sigma_min(self) -> float:
        return self.singular_values[-1] if self.singular_values else 0.0


def _as_matrix(M) -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.size == 0:
        raise ShapeError(f"expected a nonempty 2-D matrix, got shape {A.shape}")
    return A


def _cut(s: np.ndarray, shape: tuple[int, int], tol: float | None, rtol: float | None, atol: float) -> float:
    smax = float(s[0]) if s.size else 0.0
    if tol is not None:
        return float(tol)
    if rtol is not None:
        return max(atol, rtol * smax)
    return max(atol, max(shape) * np.finfo(float).eps * smax)


def numerical_rank(M, tol: float | None = None, *, rtol: float | None = None, atol: float = 0.0) -> RankReport:
    """Rank = number of singular values strictly above the tolerance."""
    A = _as_matrix(M)
    s = np.linalg.svd(A, compute_uv=False)
    cut = _cut(s, A.shape, tol, rtol, atol)
    return RankReport(rank=int(np.sum(s > cut)), singular_values=tuple(float(v) for v in s), tol=cut)


def null_space(M, tol: float | None = None, *, rtol: float | None = None, atol: float = 0.0) -> np.ndarray:
    """Orthonormal basis of the right null space, one vector per row.

    Shape is (cols − rank, cols); zero rows when M has full column rank.
    """
    A = _as_matrix(M)
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    cut = _cut(s, A.shape, tol, rtol, atol)
    rank = int(np.sum(s > cut))
    return vh[rank:].conj()


def reduced_row_echelon(M, column_order: Sequence[int] | None = None, tol: float = 1e-10) -> tuple[np.ndarray, tuple[int, ...]]:
    """Gauss–Jordan reduction scanning columns in `column_order`.

    Within a column the largest remaining entry is the pivot. Entries at or below
    `tol` count as zero and are cleared. Pivot columns are returned in the order
    they were found.
    """
    A = np.array(M, dtype=complex, copy=True)
    if A.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {A.shape}")
    rows, cols = A.shape
    order = list(range(cols)) if column_order is None else [int(c) for c in column_order]
    if sorted(order) != list(range(cols)):
        raise ShapeError(f"column order {order} is not a permutation of 0..{cols - 1}")

    pivots: list[int] = []
    r = 0
    for c in order:
        if r == rows:
            break
        k = r + int(np.argmax(np.abs(A[r:, c])))
        if abs(A[k, c]) <= tol:
            A[r:, c] = 0
            continue
        if k != r:
            A[[r, k]] = A[[k, r]]
        A[r] /= A[r, c]
        for i in range(rows):
            if i != r and A[i, c] != 0:
                A[i] -= A[i, c] * A[r]
        A[np.abs(A) <= tol] = 0
        A[r, c] = 1
        pivots.append(c)
        r += 1
    A[np.abs(A) <= tol] = 0
    return A, tuple(pivots)


def max_rank_submatrix(M, r: int, tol: float | None = None, *, rtol: float | None = None,
                       atol: float = 0.0, tie_rtol: float = 1e-10) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Rows and columns of an r×r block picked by complete-pivoting elimination.

    Pivots within `tie_rtol` of the largest go to the earliest (row, col).
    Indices are returned sorted.
    """
    A = _as_matrix(M).copy()
    if r < 0:
        raise ShapeError(f"block size must be non-negative, got {r}")
    have = numerical_rank(A, tol, rtol=rtol, atol=atol).rank
    if r > have:
        raise NumericalError(f"requested a {r}×{r} block but the numerical rank is {have}")

    rows_left = list(range(A.shape[0]))
    cols_left = list(range(A.shape[1]))
    sel_rows: list[int] = []
    sel_cols: list[int] = []
    for _ in range(r):
        sub = np.abs(A[np.ix_(rows_left, cols_left)])
        peak = sub.max()
        i, j = np.argwhere(sub >= peak * (1 - tie_rtol))[0]
        pr, pc = rows_left[i], cols_left[j]
        pivot = A[pr, pc]
        for rr in rows_left:
            if rr != pr and A[rr, pc] != 0:
                A[rr] -= (A[rr, pc] / pivot) * A[pr]
        rows_left.remove(pr)
        cols_left.remove(pc)
        sel_rows.append(pr)
        sel_cols.append(pc)
    return tuple(sorted(sel_rows)), tuple(sorted(sel_cols))
