import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scramblesim.scramblers import (classical_scrambler, qubit_clifford_scrambler,  # noqa: E402
                                    qutrit_scrambler, swap_circuit)


@pytest.fixture(scope="session")
def scrambler():
    return qubit_clifford_scrambler().unitary


@pytest.fixture(scope="session")
def qutrit():
    return qutrit_scrambler().unitary


@pytest.fixture(scope="session")
def swap3():
    return swap_circuit(3).unitary


@pytest.fixture(scope="session")
def classical():
    return classical_scrambler().unitary


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance.RESULTS:
        terminalreporter.write_line(line)
