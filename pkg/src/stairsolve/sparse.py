from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from stairsolve.errors import (
    AmbiguousConventionError,
    InvalidArgumentError,
    NotAGeneratorError,
    ReducibleChainError,
)

SparseMatrix = sp.csc_matrix

COLUMN_SUM_TOL = 1e-12


def as_sparse(matrix) -> SparseMatrix:
    m = sp.csc_matrix(matrix, dtype=np.float64, copy=True)
    m.sum_duplicates()
    m.sort_indices()
    if not np.all(np.isfinite(m.data)):
        raise InvalidArgumentError("matrix has non-finite entries")
    return m


@dataclass(frozen=True, eq=False)
class CanonicalChainMatrix:
    matrix: SparseMatrix

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    @cached_property
    def csr(self) -> sp.csr_matrix:
        return self.matrix.tocsr()

    @cached_property
    def norm1(self) -> float:
        return float(abs(self.matrix).sum(axis=0).max())

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True)
class BlockPartition:
    sizes: tuple[int, ...]
    offsets: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if not self.sizes:
            raise InvalidArgumentError("a partition needs at least one block")
        if any(int(s) < 1 for s in self.sizes):
            raise InvalidArgumentError(f"block sizes must be positive, got {self.sizes}")
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        object.__setattr__(self, "offsets", tuple(np.concatenate(([0], np.cumsum(self.sizes))).tolist()))

    @property
    def n(self) -> int:
        return len(self.sizes)

    @property
    def total(self) -> int:
        return self.offsets[-1]

    def block(self, i: int) -> slice:
        return slice(self.offsets[i], self.offsets[i + 1])

    def span(self, first: int, last: int) -> slice:
        """Scalar index range covering blocks ``first`` up to, not including, ``last``."""
        first = max(first, 0)
        last = min(last, self.n)
        return slice(self.offsets[first], self.offsets[last])

    def block_of(self, index: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.offsets, index, side="right") - 1

    def check(self, size: int) -> None:
        if self.total != size:
            raise InvalidArgumentError(
                f"partition covers {self.total} states, matrix has {size}"
            )


def partition_uniform(size: int, ell: int) -> BlockPartition:
    if ell <= 0 or ell > size:
        raise InvalidArgumentError(f"block size must lie in [1, {size}], got {ell}")
    full = (size - 1) // ell
    return BlockPartition(tuple([ell] * full + [size - ell * full]))


def canonicalize(matrix) -> CanonicalChainMatrix:
    """Validate a ``Q^T`` or ``-Q^T`` style matrix and bring it to canonical signs."""
    m = as_sparse(matrix)
    rows, cols = m.shape
    if rows != cols:
        raise InvalidArgumentError(f"chain matrix must be square, got {rows}x{cols}")
    if rows < 2:
        raise InvalidArgumentError("a chain needs at least two states")

    col_norm = np.asarray(abs(m).sum(axis=0)).ravel()
    col_sum = np.asarray(m.sum(axis=0)).ravel()
    bad = np.flatnonzero(np.abs(col_sum) > COLUMN_SUM_TOL * np.maximum(col_norm, np.finfo(float).tiny))
    if bad.size:
        j = int(bad[0])
        raise NotAGeneratorError(f"column {j} sums to {col_sum[j]:.3e}")

    diag = m.diagonal()
    if np.any(diag > 0) and np.any(diag < 0):
        raise AmbiguousConventionError("diagonal entries have mixed signs")
    if np.any(diag < 0):
        m = -m

    off = m - sp.diags(m.diagonal(), format="csc")
    off.eliminate_zeros()
    if off.nnz and off.data.max() > 0:
        raise NotAGeneratorError("off-diagonal entries must share the sign opposite to the diagonal")

    count, _ = connected_components(off, directed=True, connection="strong")
    if count != 1:
        raise ReducibleChainError(f"sparsity graph has {count} strongly connected components")
    return CanonicalChainMatrix(m)


def from_generator(q) -> CanonicalChainMatrix:
    return canonicalize(sp.csc_matrix(q).T)


def from_transition_probabilities(p) -> CanonicalChainMatrix:
    p = sp.csc_matrix(p, dtype=np.float64)
    return canonicalize(sp.identity(p.shape[0], format="csc") - p.T)


def scalar_bandwidths(a: CanonicalChainMatrix) -> tuple[int, int]:
    coo = a.matrix.tocoo()
    if coo.nnz == 0:
        return 0, 0
    diff = coo.row.astype(np.int64) - coo.col.astype(np.int64)
    return int(max(diff.max(), 0)), int(max(-diff.min(), 0))


def block_bandwidths(a: CanonicalChainMatrix, partition: BlockPartition) -> tuple[int, int]:
    partition.check(a.n)
    coo = a.matrix.tocoo()
    diff = partition.block_of(coo.row).astype(np.int64) - partition.block_of(coo.col)
    return int(max(diff.max(), 0)), int(max(-diff.min(), 0))


def is_block_tridiagonal(a: CanonicalChainMatrix, partition: BlockPartition) -> bool:
    lower, upper = block_bandwidths(a, partition)
    return lower <= 1 and upper <= 1
