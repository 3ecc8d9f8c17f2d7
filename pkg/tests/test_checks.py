import numpy as np
import pytest

from gadgetlab.checks import SUITES, run_suite
from gadgetlab.corners import (compact_label, compact_sector_mismatches, corner_states, occupation,
                               occupation_violations, raise_branches)
from gadgetlab.groups import build_group
from gadgetlab.lattice import SquareLattice
from gadgetlab.model import ModelSpec, default_spec


def test_corner_register():
    st = corner_states()
    assert st.shape == (729, 6)
    single = [s for s in st if occupation(s) == 1]
    assert len(single) == 12
    assert sorted(compact_label(tuple(s)) for s in single) == list(range(12))


def test_raising_conserves_occupation_and_reduces_to_ring():
    assert occupation_violations() == 0
    assert compact_sector_mismatches() == 0
    # from k = 11 (corner 5 at m = 2) the particle wraps to corner 0
    moves = raise_branches((0, 0, 0, 0, 0, 2))
    assert moves == [((1, 0, 0, 0, 0, 0), 5, False)]


@pytest.mark.parametrize("suite", SUITES)
def test_toric_suites_pass(suite):
    checks, dt = run_suite(suite, default_spec())
    assert checks and all(c.passed or c.informational for c in checks), [c.name for c in checks if not c.passed]


def test_alternate_profile_is_reported_not_failed():
    checks, _ = run_suite("shield", default_spec())
    info = [c for c in checks if c.informational]
    assert info and all(c.measured == 128 for c in info if isinstance(c.measured, int))


def test_s3_patch_shield_fails():
    spec = ModelSpec(SquareLattice(2, 1, periodic=False), "quantum_double", group=build_group("S3", [1, 4]))
    checks, _ = run_suite("shield", spec)
    assert not all(c.passed or c.informational for c in checks)


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("vibes", default_spec())
