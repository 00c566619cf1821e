import numpy as np
import pytest

from emfsim.dosimetry import ExposureLimits, TissueModel, load_tissue_table
from emfsim.topology import Topology


@pytest.fixture(scope="session")
def skin():
    return load_tissue_table()


@pytest.fixture
def limits():
    return ExposureLimits()


@pytest.fixture
def flat_tissue():
    """Single permittivity 16.5 - j16.6 across 1-100 GHz, density 1100 kg/m^3."""
    return TissueModel(np.array([1e9, 100e9]), np.array([16.5, 16.5]), np.array([16.6, 16.6]), 1100.0)


def make_topology(bs, ue, head=None, seed=0):
    ue = np.asarray(ue, dtype=float).reshape(-1, 2)
    if head is None:
        head = np.zeros(len(ue))
    return Topology(np.asarray(bs, dtype=float).reshape(-1, 2), ue, np.asarray(head, dtype=float), seed,
                    (1e4, 1e4))


# one line per acceptance criterion, collected by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
