import numpy as np
import pytest

from pairprox import problems


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def A1():
    return problems.EXAMPLE1_A.copy()


@pytest.fixture
def e11():
    return problems.EXAMPLE1_V2.copy()


def random_rank_deficient(rng, n, rank):
    return rng.standard_normal((n, rank)) @ rng.standard_normal((rank, n))


def random_monotone_affine(rng, n):
    """A with PSD symmetric part (Gram plus skew), well conditioned."""
    M = rng.standard_normal((n, n))
    S = rng.standard_normal((n, n))
    A = M @ M.T / n + 0.5 * (S - S.T) + 0.1 * np.eye(n)
    b = rng.standard_normal(n)
    return A, b


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(test_acceptance.RESULTS):
        terminalreporter.write_line(test_acceptance.RESULTS[k])
