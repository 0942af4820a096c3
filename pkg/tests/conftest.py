import numpy as np
import pytest

from swapcool.network import chain, load_graph, shipped_graph
from swapcool.protocol import ProtocolConfig


def random_state(rng, d):
    z = rng.normal(size=d) + 1j * rng.normal(size=d)
    return z / np.linalg.norm(z)


def random_density(rng, d, rank=None):
    rank = rank or d
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def pair_net():
    return load_graph(shipped_graph("pair"))


@pytest.fixture(scope="session")
def chain3_net():
    return chain(3)


@pytest.fixture(scope="session")
def fig1_net():
    return load_graph(shipped_graph("fig1_seven_spin"))


@pytest.fixture(scope="session")
def fig1_cfg(fig1_net):
    # session scoped so the 7-spin spectrum is computed once
    return ProtocolConfig(fig1_net, L=1)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
