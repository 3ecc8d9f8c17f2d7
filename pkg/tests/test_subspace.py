import json

import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp

from gadgetlab.subspace import (assemble_restricted, build_ground_state, connector_fidelity,
                                create_excitation, dumps_subspace, enumerate_subspace,
                                export_matrix_market, ground_formula_state, lambda_reduce,
                                logical_commutator_residual, one_body_matrix, star_sector_projector,
                                verify_shield_cancellation, z_segment_profile_check)

U, T, J = 1.0, 0.375, 0.09


def ring_ground(U, t, antiperiodic):
    """Lowest level of a 4-site ring with -U on one site (dense, written from scratch)."""
    h = np.zeros((4, 4))
    for a in range(4):
        b = (a + 1) % 4
        sign = -1.0 if (antiperiodic and b == 0) else 1.0
        h[a, b] = h[b, a] = -t * sign
    h[0, 0] = -U
    return np.linalg.eigvalsh(h)


def test_one_body_splits_into_two_four_rings():
    w = np.sort(np.linalg.eigvalsh(one_body_matrix(U, T)))
    oracle = np.sort(np.concatenate([ring_ground(U, T, False), ring_ground(U, T, True)]))
    assert np.allclose(w, oracle, atol=1e-13)


def test_m0_size_and_multiplicity(toric_m0):
    assert toric_m0.size == 2048
    assert toric_m0.multiplicity == 2
    assert toric_m0.period == 8


def test_reduction_is_exactly_one_body(toric_m0):
    red = lambda_reduce(toric_m0)
    assert red.offdiag_error == 0.0
    # constant diagonal left by the edge and shield terms (frozen value)
    assert np.allclose(red.residual, -4 * J, atol=1e-13)


def test_ground_energy_matches_ring_oracle(toric_cm, toric_m0):
    e0 = ring_ground(U, T, False)[0]
    gs = build_ground_state(toric_cm, 0, toric_m0)
    assert gs.residual < 1e-10
    assert gs.energy == pytest.approx(4 * e0 - 4 * J, abs=1e-12)
    dense = np.linalg.eigvalsh(assemble_restricted(toric_m0).toarray())
    assert dense[0] == pytest.approx(4 * e0 - 4 * J, abs=1e-10)


def test_ground_formula_and_connector(toric_cm, toric_m0):
    gs = build_ground_state(toric_cm, 0, toric_m0)
    formula = ground_formula_state(toric_cm, toric_m0, gs.alpha)
    assert abs(formula @ gs.vector) == pytest.approx(1.0, abs=1e-12)
    assert connector_fidelity(gs) == pytest.approx(1.0, abs=1e-12)
    for op in toric_cm.ts.logicals.values():
        assert logical_commutator_residual(toric_cm, op, gs.basis.rows, gs.vector) < 1e-10


def test_shield_cancels_on_m0(toric_cm, toric_m0):
    rep = verify_shield_cancellation(toric_cm, toric_m0)
    assert rep["ok"] and rep["m0_nonzero_states"] == 0
    assert rep["orientations"]["h"]["mismatches"] == 0 and rep["orientations"]["v"]["mismatches"] == 0


def test_excitations(toric_cm, toric_m0):
    gs = build_ground_state(toric_cm, 0, toric_m0)
    vp = create_excitation(toric_cm, gs, "vortex-pair", (0, 1))
    assert vp.residual < 1e-10 and vp.energy == pytest.approx(vp.expected, abs=1e-10)
    cp = create_excitation(toric_cm, gs, "charge-pair", (0, 0, 1))
    assert cp.residual < 1e-10 and cp.energy == pytest.approx(gs.energy + 4 * J, abs=1e-10)
    assert z_segment_profile_check(toric_cm, gs, 0, 1, 0) < 1e-10
    with pytest.raises(ValueError):
        create_excitation(toric_cm, gs, "vortex-pair", (1, 1))
    with pytest.raises(ValueError):
        create_excitation(toric_cm, gs, "dyon", (0, 1))


def test_star_projector_is_idempotent(toric_m0, rng):
    proj = star_sector_projector(toric_m0)
    v = rng.standard_normal(toric_m0.size)
    pv = proj(v.copy())
    assert np.allclose(proj(pv.copy()), pv)
    gs_vec = build_ground_state(toric_m0.cm, 0, toric_m0).vector
    assert np.allclose(proj(gs_vec.copy()), gs_vec)


def test_matrix_market_roundtrip(toric_m0, tmp_path):
    H = assemble_restricted(toric_m0)
    path = tmp_path / "h.mtx"
    export_matrix_market(H, path, comment="toric 2x2")
    back = sp.csr_matrix(scipy.io.mmread(str(path)))
    assert abs(back - H).max() == 0


def test_dump_is_deterministic(toric_cm):
    a = json.loads(dumps_subspace(enumerate_subspace(toric_cm)))
    b = json.loads(dumps_subspace(enumerate_subspace(toric_cm)))
    assert a == b and a["size"] == 2048 and a["label_multiplicity"] == 2


def test_triangular_m0(tri_m0):
    assert tri_m0.period == 24
    red = lambda_reduce(tri_m0)
    assert red.offdiag_error == 0.0
    assert np.ptp(red.residual) < 1e-12
