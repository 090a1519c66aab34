import numpy as np
import pytest

from orbitmeans.core import Partition, random_partition

# Fixed example pair used throughout: clusters {z1,z2},{z3} versus {z1},{z2,z3}.
X_ROWS = [[1, 1, 0], [0, 0, 1]]
Y_ROWS = [[1, 0, 0], [0, 1, 1]]


@pytest.fixture
def pair():
    return Partition(X_ROWS), Partition(Y_ROWS)


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


def random_pair(rng, ell, m, hard=None):
    if hard is None:
        hard = bool(rng.integers(2))
    return (Partition(random_partition(rng, ell, m, hard)),
            Partition(random_partition(rng, ell, m, hard)))


def shuffled(rng, X):
    """A randomly row-permuted representative of X."""
    return X.canonical[rng.permutation(X.n_clusters)]


_acceptance_lines = []


def record(line):
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
