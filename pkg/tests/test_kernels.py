import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gadgetlab import kernels
from gadgetlab.configspace import closure

BACKENDS = kernels.available_backends()
needs_two = pytest.mark.skipif(len(BACKENDS) < 2, reason="numba not installed")


def _each_backend(fn):
    out = {}
    for b in BACKENDS:
        prev = kernels.use_backend(b)
        try:
            out[b] = fn()
        finally:
            kernels.use_backend(prev)
    return out


def _radices(rng, width):
    return rng.integers(2, 7, size=width)


@given(st.integers(0, 2**32 - 1), st.integers(1, 9))
def test_pack_unpack_roundtrip(seed, width):
    rng = np.random.default_rng(seed)
    rad = _radices(rng, width)
    fields = rng.integers(0, rad, size=(50, width))
    w = np.concatenate([[1], np.cumprod(rad[:-1])])     # column 0 least significant
    for b in BACKENDS:
        kernels.use_backend(b)
        keys = kernels.pack(fields, w)
        assert np.array_equal(kernels.unpack(keys, rad), fields)
    kernels.use_backend(BACKENDS[-1])


@needs_two
@given(st.integers(0, 2**32 - 1))
def test_lookup_and_parity_backends_agree(seed):
    rng = np.random.default_rng(seed)
    table = np.unique(rng.integers(0, 10**6, size=300))
    query = rng.integers(0, 10**6, size=200)
    query[:50] = table[:50]
    res = _each_backend(lambda: kernels.lookup(table, query))
    assert np.array_equal(res["numba"], res["numpy"])
    assert (res["numpy"][:50] >= 0).all()
    hit = res["numpy"] >= 0
    assert np.array_equal(table[res["numpy"][hit]], query[hit])
    fields = rng.integers(0, 2, size=(40, 12))
    cols = np.array([0, 3, 5, 11])
    par = _each_backend(lambda: kernels.parity(fields, cols))
    assert np.array_equal(par["numba"], par["numpy"])
    assert np.array_equal(par["numpy"], fields[:, cols].sum(axis=1) % 2)


@needs_two
@pytest.mark.parametrize("fixture", ["toric_cm", "tri_cm"])
def test_closure_identical_across_backends(fixture, request):
    cm = request.getfixturevalue(fixture)
    seeds = cm.reference()
    res = _each_backend(lambda: closure(cm, seeds))
    assert np.array_equal(res["numba"][0], res["numpy"][0])
    assert np.array_equal(res["numba"][1], res["numpy"][1])


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")
