"""Compressed sparse row matrices and the product/permutation operations.

``SparseMatrix`` is the single carrier for every matrix in the package:
system matrices, constraint matrices, null bases, and projected systems.
Instances are immutable after construction (the backing arrays are marked
read-only) and always canonical: rows sorted, columns strictly increasing
within a row, duplicates summed, exact zeros dropped, no NaN values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import backend as _backend
from ._kernels_numpy import coo_to_csr as _coo_to_csr
from .errors import DimensionMismatchError, SparseFormatError

__all__ = [
    "SparseMatrix",
    "Permutation",
    "from_triplets",
    "from_dense",
    "identity",
    "matvec",
    "matvec_t",
    "matmul",
    "transpose",
    "triple_product",
    "add",
    "scale",
    "to_dense",
    "is_symmetric",
    "max_abs",
    "validate",
]


@dataclass(frozen=True)
class SparseMatrix:
    """Canonical CSR matrix of 64-bit floats.

    Fields
    ------
    nrows, ncols : int
        Matrix dimensions (either may be zero).
    row_offsets : int64 array, length nrows+1
        Non-decreasing; ``row_offsets[0] == 0`` and the last entry equals
        the number of stored values.
    col_indices : int64 array
        Strictly increasing within each row, all ``< ncols``.
    values : float64 array
        Stored coefficients; never NaN.
    """

    nrows: int
    ncols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nrows", int(self.nrows))
        object.__setattr__(self, "ncols", int(self.ncols))
        for name, dtype in (
            ("row_offsets", np.int64),
            ("col_indices", np.int64),
            ("values", np.float64),
        ):
            arr = np.ascontiguousarray(getattr(self, name), dtype=dtype)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Column indices and values of row ``i`` (read-only views)."""
        p, q = self.row_offsets[i], self.row_offsets[i + 1]
        return self.col_indices[p:q], self.values[p:q]

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``0..n-1``; ``forward[new] = old`` and ``inverse[old] = new``."""

    forward: np.ndarray
    inverse: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        fwd = np.ascontiguousarray(self.forward, dtype=np.int64)
        inv = self.inverse
        if inv is None:
            inv = np.empty_like(fwd)
            inv[fwd] = np.arange(fwd.size, dtype=np.int64)
        else:
            inv = np.ascontiguousarray(inv, dtype=np.int64)
        n = fwd.size
        if inv.size != n or not np.array_equal(np.sort(fwd), np.arange(n)):
            raise SparseFormatError("permutation is not a bijection on 0..n-1")
        if not np.array_equal(fwd[inv], np.arange(n)):
            raise SparseFormatError("forward and inverse permutations disagree")
        for name, arr in (("forward", fwd), ("inverse", inv)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return int(self.forward.size)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        idx = np.arange(n, dtype=np.int64)
        return cls(idx, idx.copy())


def validate(A: SparseMatrix) -> None:
    """Raise :class:`SparseFormatError` unless ``A`` is canonical CSR."""
    off, idx, val = A.row_offsets, A.col_indices, A.values
    if A.nrows < 0 or A.ncols < 0:
        raise SparseFormatError("negative dimension")
    if off.shape != (A.nrows + 1,):
        raise SparseFormatError("row_offsets has wrong length")
    if off[0] != 0 or off[-1] != val.size or idx.size != val.size:
        raise SparseFormatError("row_offsets endpoints do not match value count")
    if np.any(np.diff(off) < 0):
        raise SparseFormatError("row_offsets must be non-decreasing")
    if val.size:
        if idx.min() < 0 or idx.max() >= A.ncols:
            raise SparseFormatError("column index out of range")
        inner = np.diff(idx)
        # strictly increasing within each row; row boundaries may reset
        starts = off[1:-1]
        mask = np.ones(inner.size + 1, bool)
        mask[starts] = False
        if np.any(inner[mask[1:]] <= 0):
            raise SparseFormatError("column indices not strictly increasing in a row")
        if np.any(np.isnan(val)):
            raise SparseFormatError("stored value is NaN")


def from_triplets(
    nrows: int,
    ncols: int,
    entries: Iterable[tuple[int, int, float]] | Sequence,
) -> SparseMatrix:
    """Build a matrix from ``(row, col, value)`` triplets.

    Duplicate positions are summed; entries whose sum is exactly zero are
    dropped. Out-of-range indices and NaN values are construction errors.
    """
    entries = list(entries)
    if entries:
        arr = np.asarray(entries, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise SparseFormatError("entries must be (row, col, value) triplets")
        rows = arr[:, 0].astype(np.int64)
        cols = arr[:, 1].astype(np.int64)
        vals = arr[:, 2]
    else:
        rows = np.empty(0, np.int64)
        cols = np.empty(0, np.int64)
        vals = np.empty(0, np.float64)
    return _from_coo(nrows, ncols, rows, cols, vals)


def _from_coo(nrows, ncols, rows, cols, vals) -> SparseMatrix:
    if rows.size:
        if rows.min() < 0 or rows.max() >= nrows:
            raise SparseFormatError(f"row index out of range for {nrows}x{ncols}")
        if cols.min() < 0 or cols.max() >= ncols:
            raise SparseFormatError(f"column index out of range for {nrows}x{ncols}")
        if np.any(np.isnan(vals)):
            raise SparseFormatError("NaN value in triplets")
    offsets, indices, values = _coo_to_csr(nrows, ncols, rows, cols, vals)
    return SparseMatrix(nrows, ncols, offsets, indices, values)


def from_dense(dense: np.ndarray) -> SparseMatrix:
    """Sparse matrix holding the nonzero entries of a dense array."""
    dense = np.asarray(dense, dtype=np.float64)
    rows, cols = np.nonzero(dense)
    return _from_coo(
        dense.shape[0],
        dense.shape[1],
        rows.astype(np.int64),
        cols.astype(np.int64),
        dense[rows, cols],
    )


def identity(n: int) -> SparseMatrix:
    idx = np.arange(n, dtype=np.int64)
    return SparseMatrix(n, n, np.arange(n + 1, dtype=np.int64), idx, np.ones(n))


def to_dense(A: SparseMatrix) -> np.ndarray:
    """Dense copy; deliberately independent of the product kernels."""
    out = np.zeros((A.nrows, A.ncols))
    for i in range(A.nrows):
        cols, vals = A.row(i)
        out[i, cols] = vals
    return out


def max_abs(A: SparseMatrix) -> float:
    """Largest stored magnitude (0 for an empty matrix)."""
    return float(np.abs(A.values).max()) if A.nnz else 0.0


def matvec(A: SparseMatrix, x: np.ndarray) -> np.ndarray:
    """Sparse product ``A @ x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.ncols,):
        raise DimensionMismatchError(
            f"matvec: matrix is {A.nrows}x{A.ncols}, vector has length {x.size}"
        )
    return _backend.kernels.csr_matvec(
        A.nrows, A.row_offsets, A.col_indices, A.values, x
    )


def matvec_t(A: SparseMatrix, x: np.ndarray) -> np.ndarray:
    """Transpose product ``A.T @ x`` without materializing the transpose."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.nrows,):
        raise DimensionMismatchError(
            f"matvec_t: matrix is {A.nrows}x{A.ncols}, vector has length {x.size}"
        )
    return _backend.kernels.csr_matvec_t(
        A.nrows, A.ncols, A.row_offsets, A.col_indices, A.values, x
    )


def matmul(A: SparseMatrix, B: SparseMatrix) -> SparseMatrix:
    """Sparse product ``A @ B`` (symbolic pass then numeric pass)."""
    if A.ncols != B.nrows:
        raise DimensionMismatchError(
            f"matmul: {A.nrows}x{A.ncols} times {B.nrows}x{B.ncols}"
        )
    cp, ci, cx = _backend.kernels.csr_matmul(
        A.nrows,
        A.row_offsets,
        A.col_indices,
        A.values,
        B.ncols,
        B.row_offsets,
        B.col_indices,
        B.values,
    )
    return SparseMatrix(A.nrows, B.ncols, cp, ci, cx)


def transpose(A: SparseMatrix) -> SparseMatrix:
    """Exact transpose in canonical CSR form."""
    tp, ti, tx = _backend.kernels.csr_transpose(
        A.nrows, A.ncols, A.row_offsets, A.col_indices, A.values
    )
    return SparseMatrix(A.ncols, A.nrows, tp, ti, tx)


def add(A: SparseMatrix, B: SparseMatrix) -> SparseMatrix:
    """Entrywise sum; exact cancellations are dropped from the pattern."""
    if A.shape != B.shape:
        raise DimensionMismatchError(f"add: {A.shape} vs {B.shape}")
    cp, ci, cx = _backend.kernels.csr_add(
        A.nrows,
        A.ncols,
        A.row_offsets,
        A.col_indices,
        A.values,
        B.row_offsets,
        B.col_indices,
        B.values,
    )
    return SparseMatrix(A.nrows, A.ncols, cp, ci, cx)


def scale(A: SparseMatrix, alpha: float) -> SparseMatrix:
    alpha = float(alpha)
    if alpha == 0.0:
        return from_triplets(A.nrows, A.ncols, [])
    return SparseMatrix(
        A.nrows, A.ncols, A.row_offsets, A.col_indices, A.values * alpha
    )


def is_symmetric(A: SparseMatrix, rtol: float = 1e-14) -> bool:
    """True when ``max|A - A^T| <= rtol * max|A|``."""
    if A.nrows != A.ncols:
        return False
    diff = add(A, scale(transpose(A), -1.0))
    return max_abs(diff) <= rtol * max(max_abs(A), 1e-300)


def triple_product(C: SparseMatrix, A: SparseMatrix) -> SparseMatrix:
    """Congruence product ``C^T A C``.

    ``A`` must be square with ``A.nrows == C.nrows``. When ``A`` is
    symmetric, the result is symmetrized by averaging with its transpose so
    rounding asymmetry cannot leak into downstream factorizations; the
    returned matrix then equals its own transpose bit for bit.
    """
    if A.nrows != A.ncols:
        raise DimensionMismatchError("triple_product: A must be square")
    if A.ncols != C.nrows:
        raise DimensionMismatchError(
            f"triple_product: A is {A.nrows}x{A.ncols}, C is {C.nrows}x{C.ncols}"
        )
    Ct = transpose(C)
    R = matmul(matmul(Ct, A), C)
    if is_symmetric(A):
        R = scale(add(R, transpose(R)), 0.5)
    return R


def permute_symmetric(A: SparseMatrix, perm: np.ndarray) -> SparseMatrix:
    """``P A P^T`` for a symmetric permutation given as ``perm[new] = old``."""
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size, dtype=np.int64)
    rows = np.repeat(np.arange(A.nrows, dtype=np.int64), np.diff(A.row_offsets))
    return _from_coo(A.nrows, A.ncols, inv[rows], inv[A.col_indices], A.values.copy())
