import sys

import numpy as np
import pytest
from hypothesis import settings

from acbm.structure import canonical_structure, random_structure

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=[1, 2], ids=["n1", "n2"])
def structure(request):
    """A generic (non-adapted) structure at small n."""
    return random_structure(request.param, seed=100 + request.param)


@pytest.fixture(params=[1, 2, 3], ids=["n1", "n2", "n3"])
def canonical(request):
    return canonical_structure(request.param)


def max_abs(a):
    return float(np.max(np.abs(a)))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        terminalreporter.write_line(results[key])
