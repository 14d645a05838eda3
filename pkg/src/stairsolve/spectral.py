
import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import LinAlgError, eigvals, lu_factor, lu_solve

from stairsolve.errors import (
    DenseLimitError,
    InvalidArgumentError,
    NotAStochasticSplittingError,
    NumericFailureError,
)
from stairsolve.models import HessParams, gen_random_block_hessenberg
from stairsolve.sparse import BlockPartition, CanonicalChainMatrix, partition_uniform
from stairsolve.splittings import (
    BGS,
    BJ,
    DEFAULT_DENSE_LIMIT,
    STAIR1,
    SplittingKind,
    dense_M,
    off_part,
    prepare,
)

logger = logging.getLogger("Spectral")

# the unit eigenvalue removed from the spectrum must be at least this close to 1
UNIT_TOL = 1e-6
# gamma at or above 1 - NONCONVERGENT_TOL counts as a non-convergent method
NONCONVERGENT_TOL = 1e-8


@dataclass
class SpectralReport:
    method: str
    eigenvalues: np.ndarray
    gamma: float
    dominant_count: int
    spectral_radius: float

    def predicted_iterations(self, tol: float = 1.0e-9) -> float:
        if self.gamma <= 0.0:
            return 1.0
        if self.gamma >= 1.0:
            return math.inf
        return math.log(tol) / math.log(self.gamma)

    def to_dict(self) -> dict:
        order = np.lexsort((np.angle(self.eigenvalues), -np.abs(self.eigenvalues)))
        eigs = self.eigenvalues[order]
        return {
            "method": self.method,
            "gamma": self.gamma,
            "dominant_count": self.dominant_count,
            "spectral_radius": self.spectral_radius,
            "predicted_iterations": self.predicted_iterations(),
            "eigenvalues": [[float(v.real), float(v.imag)] for v in eigs],
        }


def iteration_matrix(
    a: CanonicalChainMatrix,
    partition: BlockPartition,
    kind: SplittingKind,
    dense_limit: int = DEFAULT_DENSE_LIMIT,
) -> np.ndarray:
    """``H = M^{-1} N``, solving ``M`` against every column of ``N = M - A``."""
    if a.n > dense_limit:
        raise DenseLimitError(f"N = {a.n} exceeds the dense limit {dense_limit}")
    s = prepare(a, partition, kind)
    m = dense_M(s, dense_limit)
    return lu_solve(lu_factor(m, check_finite=False), off_part(s).toarray(), check_finite=False)


def eigenvalues(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NumericFailureError(f"expected a square matrix, got shape {h.shape}")
    try:
        return eigvals(h, check_finite=True)
    except (LinAlgError, ValueError) as e:
        raise NumericFailureError(f"eigensolver failed: {e}") from e


def subdominant_gamma(eigs: np.ndarray, unit_tol: float = UNIT_TOL) -> float:
    """Largest magnitude after removing the one eigenvalue closest to 1."""
    eigs = np.asarray(eigs)
    if eigs.size == 0:
        raise NotAStochasticSplittingError("empty spectrum")
    distance = np.abs(eigs - 1.0)
    unit = int(np.argmin(distance))
    if distance[unit] > unit_tol:
        raise NotAStochasticSplittingError(
            f"no eigenvalue within {unit_tol:g} of 1 (closest {eigs[unit]:.6g})"
        )
    rest = np.delete(eigs, unit)
    return float(np.abs(rest).max()) if rest.size else 0.0


def spectral_report(
    a: CanonicalChainMatrix,
    partition: BlockPartition,
    kind: SplittingKind,
    dense_limit: int = DEFAULT_DENSE_LIMIT,
    tol_one: float = NONCONVERGENT_TOL,
) -> SpectralReport:
    eigs = eigenvalues(iteration_matrix(a, partition, kind, dense_limit))
    magnitudes = np.abs(eigs)
    return SpectralReport(
        method=kind.label,
        eigenvalues=eigs,
        gamma=subdominant_gamma(eigs),
        dominant_count=int(np.count_nonzero(magnitudes >= 1.0 - tol_one)),
        spectral_radius=float(magnitudes.max()),
    )


def _ratio(gamma_ref: float, gamma_other: float) -> float:
    if gamma_other >= 1.0 - NONCONVERGENT_TOL:
        return math.inf
    if gamma_ref == 0.0:
        return 1.0 if gamma_other == 0.0 else math.inf
    if gamma_other == 0.0:
        return 0.0
    return math.log(gamma_ref) / math.log(gamma_other)


@dataclass(frozen=True)
class ConvergenceRatios:
    rho1: float
    rho2: float
    gamma_bj: float
    gamma_bgs: float
    gamma_bs: float


def convergence_ratios(
    a: CanonicalChainMatrix,
    partition: BlockPartition,
    dense_limit: int = DEFAULT_DENSE_LIMIT,
) -> ConvergenceRatios:
    gammas = {
        kind.method: subdominant_gamma(eigenvalues(iteration_matrix(a, partition, kind, dense_limit)))
        for kind in (BJ, BGS, STAIR1)
    }
    g_bj, g_bgs, g_bs = gammas[BJ.method], gammas[BGS.method], gammas[STAIR1.method]
    return ConvergenceRatios(
        rho1=_ratio(g_bgs, g_bj),
        rho2=_ratio(g_bgs, g_bs),
        gamma_bj=g_bj,
        gamma_bgs=g_bgs,
        gamma_bs=g_bs,
    )


@dataclass(frozen=True)
class TrialRatios:
    trial: int
    kp: int
    ratios: ConvergenceRatios


@dataclass
class Table1Result:
    k: int
    n: int
    trials: int
    kp_list: list[int]
    rows: list[TrialRatios] = field(default_factory=list)

    def maxima(self, kp: int) -> tuple[float, float]:
        picked = [row.ratios for row in self.rows if row.kp == kp]
        return max(r.rho1 for r in picked), max(r.rho2 for r in picked)

    def write_csv(self, path: str | Path) -> None:
        with open(Path(path), "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["kp", "k", "n", "trials", "max_rho1", "max_rho2"])
            for kp in self.kp_list:
                rho1, rho2 = self.maxima(kp)
                writer.writerow([kp, self.k, self.n, self.trials, f"{rho1:.6g}", f"{rho2:.6g}"])


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


def table1_experiment(
    trials: int,
    k: int,
    n: int,
    kp_list: list[int],
    seed: int = 0,
    lower_bandwidth: int = 4,
    workers: int = 1,
    dense_limit: int = DEFAULT_DENSE_LIMIT,
) -> Table1Result:
    """Maximum rho1/rho2 over random block lower Hessenberg instances, per partition block size."""
    if trials < 1:
        raise InvalidArgumentError(f"trials must be >= 1, got {trials}")
    result = Table1Result(k=k, n=n, trials=trials, kp_list=list(kp_list))

    def run(trial: int) -> list[TrialRatios]:
        a = gen_random_block_hessenberg(
            HessParams.create(k=k, n=n, lower_bandwidth=lower_bandwidth, seed=trial_seed(seed, trial))
        )
        return [
            TrialRatios(trial, kp, convergence_ratios(a, partition_uniform(a.n, kp), dense_limit))
            for kp in kp_list
        ]

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for rows in pool.map(run, range(trials)):
            result.rows.extend(rows)

    for kp in kp_list:
        rho1, rho2 = result.maxima(kp)
        logger.info(f"table1 k={k} n={n} kp={kp}: max rho1={rho1:.4g}, max rho2={rho2:.4g}")
    return result
