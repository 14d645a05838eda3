from stairsolve.cli import main
from stairsolve.errors import StairsolveError
from stairsolve.mmio import load_matrix_market, write_matrix_market
from stairsolve.solver import SolveOptions, SolveReport, residual_check, solve_stationary
from stairsolve.sparse import (
    BlockPartition,
    CanonicalChainMatrix,
    canonicalize,
    from_generator,
    from_transition_probabilities,
    partition_uniform,
)
from stairsolve.splittings import BGS, BJ, JGS, STAIR1, STAIR2, SplittingKind, prepare, sweep

__all__ = [
    "BGS",
    "BJ",
    "JGS",
    "STAIR1",
    "STAIR2",
    "BlockPartition",
    "CanonicalChainMatrix",
    "SolveOptions",
    "SolveReport",
    "SplittingKind",
    "StairsolveError",
    "canonicalize",
    "from_generator",
    "from_transition_probabilities",
    "load_matrix_market",
    "main",
    "partition_uniform",
    "prepare",
    "residual_check",
    "solve_stationary",
    "sweep",
    "write_matrix_market",
]
