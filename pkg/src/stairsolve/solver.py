
import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from stairsolve.config import Config
from stairsolve.errors import DivergedError, InvalidArgumentError
from stairsolve.executor import SweepExecutor, TaskExecutor
from stairsolve.sparse import BlockPartition, CanonicalChainMatrix
from stairsolve.splittings import PreparedSplitting, SplittingKind, prepare, sweep

logger = logging.getLogger("Solver")

LOG_EVERY = 100


class SolveOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    tol: float = Field(default=1.0e-9, gt=0)
    maxit: int = Field(default=10000, ge=1)
    workers: int = Field(default=1, ge=1)
    initial: Literal["uniform", "random"] = "uniform"
    seed: int = Field(default=0, ge=0)

    @classmethod
    def create(cls, **values) -> "SolveOptions":
        try:
            return cls(**values)
        except ValidationError as e:
            raise InvalidArgumentError(str(e)) from e

    @classmethod
    def from_config(cls, config: Config, **overrides) -> "SolveOptions":
        values = dict(tol=config.tol, maxit=config.maxit, workers=config.threads, seed=config.seed)
        values.update(overrides)
        return cls.create(**values)


@dataclass
class SolveReport:
    pi: np.ndarray
    iterations: int
    converged: bool
    method: str
    residual_history: list[float] = field(default_factory=list)
    wall_seconds: float = 0.0
    prepare_seconds: float = 0.0
    residual: float = float("nan")

    def write_history_csv(self, path: str | Path) -> None:
        with open(Path(path), "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["iteration", "err"])
            for k, err in enumerate(self.residual_history, start=1):
                writer.writerow([k, f"{err:.6g}"])


def residual_check(a: CanonicalChainMatrix, x: np.ndarray) -> float:
    return float(np.abs(a.matrix @ np.asarray(x, dtype=np.float64)).sum())


def initial_vector(size: int, opts: SolveOptions) -> np.ndarray:
    if opts.initial == "uniform":
        return np.full(size, 1.0 / size)
    x = 1.0 - np.random.default_rng(opts.seed).random(size)
    return x / x.sum()


def solve_prepared(
    s: PreparedSplitting,
    opts: SolveOptions | None = None,
    executor: TaskExecutor | None = None,
    x0: np.ndarray | None = None,
) -> SolveReport:
    """Iterate a prepared splitting until ``||z - x||_1 <= tol`` or ``maxit`` sweeps."""
    opts = opts or SolveOptions()
    if x0 is None:
        x = initial_vector(s.n, opts)
    else:
        x = np.asarray(x0, dtype=np.float64)
        if x.shape != (s.n,) or np.any(x < 0) or x.sum() <= 0:
            raise InvalidArgumentError("initial vector must be nonnegative, nonzero and of length N")
        x = x / x.sum()

    history: list[float] = []
    converged = False
    iterations = 0
    start = time.perf_counter()
    for iterations in range(1, opts.maxit + 1):
        z = sweep(s, x, executor)
        total = z.sum()
        if not np.isfinite(total) or total <= 0:
            raise DivergedError(iterations)
        z /= total
        err = float(np.abs(z - x).sum())
        if not np.isfinite(err):
            raise DivergedError(iterations)
        history.append(err)
        x = z
        if iterations % LOG_EVERY == 0:
            logger.debug(f"{s.kind.label}: iteration {iterations}, err {err:.3e}")
        if err <= opts.tol:
            converged = True
            break
    wall = time.perf_counter() - start

    report = SolveReport(
        pi=x,
        iterations=iterations,
        converged=converged,
        method=s.kind.label,
        residual_history=history,
        wall_seconds=wall,
        residual=residual_check(s.chain, x),
    )
    if not converged:
        logger.warning(f"{s.kind.label}: no convergence after {iterations} iterations (err {history[-1]:.3e})")
    return report


def solve_stationary(
    a: CanonicalChainMatrix,
    partition: BlockPartition,
    kind: SplittingKind,
    opts: SolveOptions | None = None,
    x0: np.ndarray | None = None,
) -> SolveReport:
    opts = opts or SolveOptions()
    kind = kind.with_processors(opts.workers)
    start = time.perf_counter()
    prepared = prepare(a, partition, kind)
    prepare_seconds = time.perf_counter() - start

    with SweepExecutor(opts.workers) as executor:
        report = solve_prepared(prepared, opts, executor, x0)
    report.prepare_seconds = prepare_seconds
    logger.info(
        f"{kind.label}: N={a.n}, blocks={partition.n}, workers={opts.workers}, "
        f"iterations={report.iterations}, converged={report.converged}, "
        f"residual={report.residual:.3e}, time={report.wall_seconds:.3f}s"
    )
    return report
