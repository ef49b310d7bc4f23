import numpy as np
import pytest

from fairrank.fixtures import EXAMPLE2_TOPK, EXAMPLE2_WEIGHTS, example2_distribution

ACCEPTANCE_LINES = []


@pytest.fixture
def ex2():
    return example2_distribution()


@pytest.fixture
def ex2_q():
    return EXAMPLE2_TOPK.copy()


@pytest.fixture
def ex2_w():
    return EXAMPLE2_WEIGHTS.copy()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
