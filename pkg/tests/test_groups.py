import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gadgetlab.groups import GroupError, build_group, group_site_ops

GROUPS = [("Z2", [1]), ("Z3", [1]), ("Z4", [1]), ("S3", [1, 4]), ("D4", [1, 4])]


@pytest.mark.parametrize("name,gens", GROUPS)
def test_group_axioms(name, gens):
    G = build_group(name, gens)
    n = G.order
    m = G.mult
    for a, b, c in itertools.product(range(n), repeat=3):
        assert m[m[a, b], c] == m[a, m[b, c]]
    assert (m[0] == np.arange(n)).all() and (m[:, 0] == np.arange(n)).all()
    for a in range(n):
        assert m[a, G.inv(a)] == 0
    assert G.closure(gens) == set(range(n))


def test_s3_matches_permutation_composition():
    # independent construction: the composition table of permutations of three
    # points, then search for an isomorphism to the built table
    G = build_group("S3", [1, 4])
    perms = list(itertools.permutations(range(3)))
    comp = [[perms.index(tuple(p[q[i]] for i in range(3))) for q in perms] for p in perms]
    found = any(
        all(G.mult[phi[a], phi[b]] == phi[comp[a][b]] for a in range(6) for b in range(6))
        for phi in itertools.permutations(range(6))
    )
    assert found
    assert not G.is_abelian()
    assert list(G.center()) == [0]


@pytest.mark.parametrize("name,gens", GROUPS)
def test_left_and_right_actions_commute(name, gens):
    G = build_group(name, gens)
    ops = group_site_ops(G)
    for g, h in itertools.product(range(G.order), repeat=2):
        a, b = ops.L_plus(g), ops.L_minus(h)
        assert np.array_equal(a @ b, b @ a)


@given(st.sampled_from(GROUPS), st.data())
def test_site_operators_act_as_stated(gs, data):
    G = build_group(*gs)
    ops = group_site_ops(G)
    g = data.draw(st.integers(0, G.order - 1))
    z = data.draw(st.integers(0, G.order - 1))
    ket = np.zeros(G.order)
    ket[z] = 1
    assert np.argmax(ops.L_plus(g) @ ket) == G.mul(g, z)
    assert np.argmax(ops.L_minus(g) @ ket) == G.mul(z, G.inv(g))
    assert (ops.T_plus(g) @ ket)[z] == (1.0 if g == z else 0.0)
    assert (ops.T_minus(g) @ ket)[z] == (1.0 if G.inv(g) == z else 0.0)


def test_generating_set_is_required_and_validated():
    with pytest.raises(GroupError):
        build_group("S3")
    with pytest.raises(GroupError):
        build_group("S3", [1])          # a transposition alone does not generate
    with pytest.raises(GroupError):
        build_group("Q8", [1])
    with pytest.raises(GroupError):
        build_group({"table": [[0, 1], [1, 1]], "generators": [1]})


def test_explicit_table():
    G = build_group({"table": [[0, 1], [1, 0]], "generators": [1], "name": "flip"})
    assert G.order == 2 and G.is_abelian()


def test_power_and_order():
    G = build_group("Z4", [1])
    assert G.power(1, 4) == 0 and G.element_order(2) == 2
