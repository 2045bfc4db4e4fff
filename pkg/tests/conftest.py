import hypothesis
import numpy as np
import pytest

from coordnet import Kind, Nonlinearity, init_network

hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.load_profile("default")

S, T, R, I = Nonlinearity.SIGMOID, Nonlinearity.TANH, Nonlinearity.RAMP, Nonlinearity.IDENTITY

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def mlp():
    return init_network(Kind.MLP, [4, 5, 3, 2], [S, T, S], seed=11)


@pytest.fixture
def ae():
    return init_network(Kind.AE, [8, 4, 2, 4, 8], [T, T, T, T], seed=12)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
