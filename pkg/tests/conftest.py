import sys

import numpy as np
import pytest

from fqsl.lattice import Lattice
from fqsl.verify import random_fn


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def lat():
    return Lattice(1.0, 0.5)


@pytest.fixture
def rand(rng, lat):
    """Random q-regular lattice functions on the default lattice."""

    def make(zero_limit=None, lattice=None):
        return random_fn(lattice or lat, rng, zero_limit)

    return make


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
