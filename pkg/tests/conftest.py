"""Shared helpers for the cvdownload test suite."""

import numpy as np
import pytest

from cvdownload.graphs import Graph, random_graph

#: Pass/fail lines appended by the acceptance battery; echoed after the run
#: so they are visible without -s.
ACCEPTANCE_REPORT: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_REPORT:
            terminalreporter.write_line(line)


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal matrix from the QR factorization of a Gaussian matrix.

    The sign fix on the diagonal of R makes the distribution Haar and the
    result reproducible for a fixed generator state.
    """
    m = rng.normal(size=(n, n))
    q, r = np.linalg.qr(m)
    return q * np.sign(np.diag(r))


def random_test_graph(rng: np.random.Generator, n_max: int = 4, n_min: int = 1) -> Graph:
    """A small random graph for property loops (may be edgeless)."""
    n = int(rng.integers(n_min, n_max + 1))
    return random_graph(n, 0.6, rng)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260815)
