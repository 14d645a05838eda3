import numpy as np
import pytest
import scipy.linalg

from stairsolve.models import HessParams, gen_random_block_hessenberg
from stairsolve.sparse import CanonicalChainMatrix, canonicalize

# Canonical form of the 4-state example chain: zero column sums, positive diagonal.
EXAMPLE1 = np.array(
    [
        [1.0, -0.5, 0.0, 0.0],
        [-1.0, 1.0, -0.5, 0.0],
        [0.0, -0.5, 1.0, -1.0],
        [0.0, 0.0, -0.5, 1.0],
    ]
)
EXAMPLE1_PI = np.array([1 / 6, 1 / 3, 1 / 3, 1 / 6])


@pytest.fixture(autouse=True)
def isolate_env(monkeypatch):
    """Isolate environment variables for each test."""
    for name in ("THREADS", "BLOCK_SIZE", "TOL", "MAXIT", "SEED", "DENSE_LIMIT", "LOG_LEVEL", "OUT"):
        monkeypatch.delenv(f"STAIRSOLVE_{name}", raising=False)
    monkeypatch.delenv("LOG_LEVEL", raising=False)


@pytest.fixture
def example1() -> CanonicalChainMatrix:
    """The 4-state example chain in canonical form."""
    return canonicalize(EXAMPLE1)


@pytest.fixture
def two_state() -> CanonicalChainMatrix:
    """Two-state chain with rates 2 (0 -> 1) and 3 (1 -> 0)."""
    return canonicalize(np.array([[2.0, -3.0], [-2.0, 3.0]]))


def random_chain(seed: int, k: int = 3, n: int = 4, lower_bandwidth: int | None = None, density: float = 0.6) -> CanonicalChainMatrix:
    """Random irreducible canonical chain of size k*n."""
    return gen_random_block_hessenberg(
        HessParams(k=k, n=n, lower_bandwidth=lower_bandwidth or n, density=density, seed=seed)
    )


def exact_pi(a: CanonicalChainMatrix) -> np.ndarray:
    """Stationary vector from the dense null space."""
    v = scipy.linalg.null_space(a.toarray())[:, 0]
    return v / v.sum()
