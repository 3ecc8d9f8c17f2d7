import os

import numpy as np
import pytest

from gadgetlab.configspace import config_model
from gadgetlab.lattice import TriangularLattice
from gadgetlab.model import ModelSpec, build_model, default_spec
from gadgetlab.subspace import enumerate_subspace

# keep hypothesis runs short and reproducible
try:
    from hypothesis import settings
    settings.register_profile("ci", max_examples=60, deadline=None, derandomize=True)
    settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))
except ImportError:  # pragma: no cover
    pass


@pytest.fixture(scope="session")
def toric_cm():
    return config_model(build_model(default_spec()))


@pytest.fixture(scope="session")
def toric_m0(toric_cm):
    return enumerate_subspace(toric_cm)


@pytest.fixture(scope="session")
def tri_cm():
    return config_model(build_model(ModelSpec(TriangularLattice(2, 2), "triangular", R=1.0)))


@pytest.fixture(scope="session")
def tri_m0(tri_cm):
    return enumerate_subspace(tri_cm)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# ------------------------------------------------------------ acceptance log

_ACCEPTANCE: dict = {}


@pytest.fixture
def acceptance(request):
    """Record one summary line per acceptance criterion; printed after the run."""
    def record(number: int, passed: bool, summary: str, notes=()):
        _ACCEPTANCE[number] = (passed, summary, list(notes))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        passed, summary, notes = _ACCEPTANCE[n]
        tr.write_line(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {summary}")
        for note in notes:
            tr.write_line(f"              {note}")
