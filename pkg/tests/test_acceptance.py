"""End-to-end runs at benchmark sizes. Deselect with ``-m "not slow"``."""

import math

import numpy as np
import pytest

from conftest import random_chain
from stairsolve.models import MutexParams, NcdParams, gen_mutex, gen_ncd, mutex_state_count
from stairsolve.solver import SolveOptions, solve_stationary
from stairsolve.sparse import partition_uniform
from stairsolve.spectral import table1_experiment
from stairsolve.splittings import BGS, BJ, JGS, STAIR1, STAIR2


@pytest.fixture(scope="module")
def mutex_chain():
    """The 16-process, 12-slot mutual exclusion chain."""
    return gen_mutex(MutexParams(n=16, r=12, lam=1.0, mu=2.0))


@pytest.mark.slow
@pytest.mark.integration
class TestBenchmarkScale:
    """Acceptance runs on the mutual exclusion and NCD chains."""

    def test_mutex_size(self, mutex_chain):
        """Test N = 64839 and a valid canonical matrix."""
        assert mutex_state_count(16, 12) == 64839
        assert mutex_chain.n == 64839
        col_sum = np.abs(np.asarray(mutex_chain.matrix.sum(axis=0))).max()
        assert col_sum <= 1e-12 * mutex_chain.norm1

    @pytest.mark.parametrize("kind", [STAIR1, STAIR2, BJ, BGS, JGS(4)])
    def test_worker_count_does_not_change_pi(self, mutex_chain, kind):
        """Test bitwise identical vectors for m in {1, 2, 4, 8}."""
        partition = partition_uniform(mutex_chain.n, 256)
        reports = [
            solve_stationary(mutex_chain, partition, kind, SolveOptions(workers=m, maxit=100)) for m in (1, 2, 4, 8)
        ]
        for report in reports[1:]:
            assert report.iterations == reports[0].iterations
            np.testing.assert_array_equal(report.pi, reports[0].pi)

    @pytest.mark.parametrize("seed", range(3))
    def test_ncd_degrades_jgs(self, seed):
        """Test that JGS slows down as processor blocks multiply while STAIR1 does not depend on m."""
        a = gen_ncd(NcdParams(groups=16, group_size=64, coupling=1e-5, seed=seed))
        partition = partition_uniform(a.n, 64)
        opts = SolveOptions(maxit=10000)
        p2 = solve_stationary(a, partition, JGS(2), opts)
        p16 = solve_stationary(a, partition, JGS(16), opts)
        assert not p16.converged
        assert p16.iterations == opts.maxit
        assert p2.converged
        assert p16.iterations > 2 * p2.iterations

        stair = [solve_stationary(a, partition, STAIR1, opts.model_copy(update={"workers": m})) for m in (1, 2, 8)]
        assert len({r.iterations for r in stair}) == 1
        for r in stair[1:]:
            np.testing.assert_array_equal(r.pi, stair[0].pi)


@pytest.mark.slow
@pytest.mark.integration
class TestTable1Scale:
    """Convergence-ratio experiment at k=64, n=16."""

    def test_ratios(self):
        """Test max rho2 in [0.8, 2.5] and rho1 >= rho2 in most trials."""
        result = table1_experiment(trials=100, k=64, n=16, kp_list=[64], workers=4)
        _, max_rho2 = result.maxima(64)
        assert 0.8 <= max_rho2 <= 2.5
        finite = [r.ratios for r in result.rows if math.isfinite(r.ratios.rho1) and math.isfinite(r.ratios.rho2)]
        ordered = sum(r.rho1 >= r.rho2 for r in finite)
        assert ordered >= 0.9 * len(finite)


@pytest.mark.integration
class TestJgsDegeneracy:
    """JGS with one or n processor blocks reproduces BGS or BJ."""

    @pytest.mark.parametrize("seed", range(10))
    def test_jgs_matches_bgs_and_bj(self, seed):
        """Test identical iterations and vectors."""
        a = random_chain(seed, k=4, n=6, lower_bandwidth=3)
        partition = partition_uniform(a.n, 4)
        opts = SolveOptions(maxit=500)
        for jgs, other in ((JGS(1), BGS), (JGS(partition.n), BJ)):
            left = solve_stationary(a, partition, jgs, opts)
            right = solve_stationary(a, partition, other, opts)
            assert left.iterations == right.iterations
            np.testing.assert_array_equal(left.pi, right.pi)
