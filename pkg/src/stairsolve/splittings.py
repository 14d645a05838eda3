"""Block splittings ``A = M - N`` of a canonical chain matrix and their sweeps.

Block rows are numbered from 0. The staircase matrices alternate two kinds of
block rows: *solo* rows keep only the diagonal block in ``M``, *stair* rows keep
the diagonal block and both neighbours. ``STAIR1`` starts with a solo row (the
first, third, ... block rows are solo), ``STAIR2`` starts with a stair row.

``M`` is never formed. Each block row ``i`` stores the LU factors of ``Q_ii``,
an *explicit* part (the entries of ``A`` outside ``M``, applied to the previous
iterate ``x``) and an optional *coupled* part (the entries of ``M`` left of or
around the diagonal block, applied to the new iterate ``z`` inside a column
window). One block update is then

    z_i = Q_ii^{-1} ( -E_i x - C_i z[window] ).
"""

import logging
import warnings
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from stairsolve.errors import DenseLimitError, InvalidArgumentError, PrepareFailedError
from stairsolve.executor import SerialExecutor, TaskExecutor
from stairsolve.sparse import BlockPartition, CanonicalChainMatrix

logger = logging.getLogger("Splittings")

DEFAULT_DENSE_LIMIT = 4096


class Method(StrEnum):
    BJ = "bj"
    BGS = "bgs"
    JGS = "jgs"
    STAIR1 = "stair1"
    STAIR2 = "stair2"


@dataclass(frozen=True)
class SplittingKind:
    method: Method
    processors: int | None = None

    def __post_init__(self):
        if self.method is not Method.JGS and self.processors is not None:
            raise InvalidArgumentError(f"{self.method} takes no processor count")
        if self.processors is not None and self.processors < 1:
            raise InvalidArgumentError(f"processor count must be >= 1, got {self.processors}")

    @classmethod
    def parse(cls, text: str) -> "SplittingKind":
        name, _, p = text.strip().lower().partition(":")
        try:
            method = Method(name)
        except ValueError:
            raise InvalidArgumentError(
                f"unknown method '{text}', expected one of {[m.value for m in Method]}"
            ) from None
        if not p:
            return cls(method)
        try:
            return cls(method, int(p))
        except ValueError:
            raise InvalidArgumentError(f"bad processor count in '{text}'") from None

    @property
    def label(self) -> str:
        if self.processors is None:
            return self.method.value
        return f"{self.method.value}:{self.processors}"

    @property
    def is_staircase(self) -> bool:
        return self.method in (Method.STAIR1, Method.STAIR2)

    def with_processors(self, workers: int) -> "SplittingKind":
        if self.method is Method.JGS and self.processors is None:
            return SplittingKind(Method.JGS, workers)
        return self

    def __str__(self) -> str:
        return self.label


BJ = SplittingKind(Method.BJ)
BGS = SplittingKind(Method.BGS)
STAIR1 = SplittingKind(Method.STAIR1)
STAIR2 = SplittingKind(Method.STAIR2)


def JGS(p: int) -> SplittingKind:
    return SplittingKind(Method.JGS, p)


def processor_blocks(n: int, p: int) -> tuple[tuple[int, int], ...]:
    """Contiguous processor blocks ``(m_j, r_j)``, the larger blocks first."""
    if not 1 <= p <= n:
        raise InvalidArgumentError(f"processor count must lie in [1, {n}], got {p}")
    q, extra = divmod(n, p)
    bounds = []
    start = 0
    for j in range(p):
        r = q + 1 if j < extra else q
        bounds.append((start, r))
        start += r
    return tuple(bounds)


def _drop_columns(rows: sp.csr_matrix, lo: int, hi: int) -> sp.csr_matrix:
    out = rows.copy()
    out.data[(out.indices >= lo) & (out.indices < hi)] = 0.0
    out.eliminate_zeros()
    return out


@dataclass(frozen=True, eq=False)
class BlockRow:
    index: int
    rows: slice
    factor: tuple[np.ndarray, np.ndarray]
    explicit: sp.csr_matrix
    coupled: sp.csr_matrix | None
    window: slice

    def rhs(self, x: np.ndarray) -> np.ndarray:
        return -(self.explicit @ x)

    def finish(self, rhs: np.ndarray, z: np.ndarray) -> None:
        if self.coupled is not None:
            rhs = rhs - self.coupled @ z[self.window]
        z[self.rows] = lu_solve(self.factor, rhs, check_finite=False)


@dataclass(frozen=True, eq=False)
class PreparedSplitting:
    kind: SplittingKind
    partition: BlockPartition
    chain: CanonicalChainMatrix
    block_rows: tuple[BlockRow, ...]
    # sequential runs of block rows; runs of one stage are independent
    tasks: tuple[tuple[int, ...], ...]
    solo_rows: tuple[int, ...] = ()
    stair_rows: tuple[int, ...] = ()
    processor_bounds: tuple[tuple[int, int], ...] = ()

    @property
    def n(self) -> int:
        return self.chain.n


def _coupling_window(kind: SplittingKind, partition: BlockPartition, i: int, group_start: int, is_stair_row: bool) -> tuple[slice, slice]:
    """Column windows ``(coupled, excluded)`` of block row ``i``."""
    n = partition.n
    match kind.method:
        case Method.BJ:
            return partition.span(i, i), partition.span(i, i + 1)
        case Method.BGS:
            return partition.span(0, i), partition.span(0, i + 1)
        case Method.JGS:
            return partition.span(group_start, i), partition.span(group_start, i + 1)
        case Method.STAIR1 | Method.STAIR2:
            if is_stair_row:
                window = partition.span(i - 1, min(i + 2, n))
                return window, window
            return partition.span(i, i), partition.span(i, i + 1)


def _stair_rows(kind: SplittingKind, n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    first_solo = 0 if kind.method is Method.STAIR1 else 1
    solo = tuple(range(first_solo, n, 2))
    stair = tuple(range(1 - first_solo, n, 2))
    return solo, stair


def _factorize(block: np.ndarray, index: int) -> tuple[np.ndarray, np.ndarray]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(block, check_finite=False)
    pivots = np.abs(np.diag(lu))
    scale = pivots.max() if pivots.size else 0.0
    if scale == 0.0 or pivots.min() <= block.shape[0] * np.finfo(float).eps * scale:
        raise PrepareFailedError(index)
    return lu, piv


def prepare(a: CanonicalChainMatrix, partition: BlockPartition, kind: SplittingKind) -> PreparedSplitting:
    partition.check(a.n)
    n = partition.n
    if kind.method is Method.JGS:
        if kind.processors is None:
            raise InvalidArgumentError("JGS needs a processor count; resolve it with with_processors()")
        bounds = processor_blocks(n, kind.processors)
    else:
        bounds = ()

    group_start = np.zeros(n, dtype=int)
    for start, r in bounds:
        group_start[start : start + r] = start

    solo, stair = _stair_rows(kind, n) if kind.is_staircase else ((), ())
    stair_set = set(stair)

    csr = a.csr
    block_rows = []
    for i in range(n):
        rows = partition.block(i)
        strip = csr[rows]
        factor = _factorize(strip[:, rows].toarray(), i)
        window, excluded = _coupling_window(kind, partition, i, int(group_start[i]), i in stair_set)
        explicit = _drop_columns(strip, excluded.start, excluded.stop)
        coupled = None
        if window.stop > window.start:
            coupled = _drop_columns(strip[:, window], rows.start - window.start, rows.stop - window.start)
        block_rows.append(BlockRow(i, rows, factor, explicit, coupled, window))
        logger.debug(f"{kind.label}: block {i} size {rows.stop - rows.start}, explicit nnz {explicit.nnz}")

    match kind.method:
        case Method.BGS:
            tasks = (tuple(range(n)),)
        case Method.JGS:
            tasks = tuple(tuple(range(start, start + r)) for start, r in bounds)
        case _:
            tasks = tuple((i,) for i in range(n))

    return PreparedSplitting(
        kind=kind,
        partition=partition,
        chain=a,
        block_rows=tuple(block_rows),
        tasks=tasks,
        solo_rows=solo,
        stair_rows=stair,
        processor_bounds=bounds,
    )


def sweep(s: PreparedSplitting, x: np.ndarray, executor: TaskExecutor | None = None) -> np.ndarray:
    """Solve ``M z = N x`` for one iterate; ``z`` is not normalized."""
    executor = executor or SerialExecutor()
    x = np.asarray(x, dtype=np.float64)
    z = np.empty(s.n)
    rows = s.block_rows

    if not s.kind.is_staircase:
        def run(task: tuple[int, ...]) -> None:
            for i in task:
                rows[i].finish(rows[i].rhs(x), z)

        executor.map_tasks(run, s.tasks)
        return z

    rhs = np.empty(s.n)

    def gather(i: int) -> None:
        rhs[rows[i].rows] = rows[i].rhs(x)

    def solve(i: int) -> None:
        rows[i].finish(rhs[rows[i].rows], z)

    executor.map_tasks(gather, range(len(rows)))
    executor.map_tasks(solve, s.solo_rows)
    executor.map_tasks(solve, s.stair_rows)
    return z


def off_part(s: PreparedSplitting) -> sp.csr_matrix:
    return -sp.vstack([row.explicit for row in s.block_rows], format="csr")


def dense_M(s: PreparedSplitting, dense_limit: int = DEFAULT_DENSE_LIMIT) -> np.ndarray:
    if s.n > dense_limit:
        raise DenseLimitError(f"N = {s.n} exceeds the dense limit {dense_limit}")
    return s.chain.toarray() + off_part(s).toarray()
