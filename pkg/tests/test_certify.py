import itertools

import numpy as np
import pytest

from gadgetlab.certify import (PATTERNS, REFERENCE_POINT, GapParams, beta_neutrality, certify_refined,
                               coarse_bound, hs_spectrum, intra_gap, optimize_params, pattern_corrections,
                               pattern_minima, resolved_inter_bound, within_one_step)
from gadgetlab.model import T_DOWN, T_LEFT, T_RIGHT, T_UP


def ring4(U, t, antiperiodic):
    h = np.diag([-U, 0.0, 0.0, 0.0])
    for a in range(4):
        b = (a + 1) % 4
        h[a, b] = h[b, a] = t if (antiperiodic and b == 0) else -t
    return np.linalg.eigvalsh(h)


def reference_params():
    J, t, bl, bd = REFERENCE_POINT
    return GapParams(1.0, t, J, bl, bd)


@pytest.mark.parametrize("t", [0.0625, 0.2, 0.375, 0.6])
def test_hs_spectrum_against_four_ring_oracle(t):
    even, odd = ring4(1.0, t, False), ring4(1.0, t, True)
    E0, eg, og = hs_spectrum(1.0, t)
    assert E0 == pytest.approx(even[0], abs=1e-13)
    assert eg == pytest.approx(even[1] - even[0], abs=1e-13)
    assert og == pytest.approx(odd[0] - even[0], abs=1e-13)
    assert intra_gap(1.0, t) == pytest.approx(min(eg, 2 * og), abs=1e-15)


def test_weak_hopping_regime_is_tiny_but_positive():
    # the vortex gap closes fast as t -> 0; frozen values at t = U/16
    _, _, og = hs_spectrum(1.0, 1 / 16)
    assert og == pytest.approx(5.963e-5, rel=1e-3)
    assert intra_gap(1.0, 1 / 16) == pytest.approx(1.1926e-4, rel=1e-3)


def test_pattern_corrections_by_hand():
    J, bl, bd = 0.09, 0.25, -0.1
    corr = pattern_corrections(J, bl, bd)
    for p, a in enumerate(PATTERNS):
        for lam in range(8):
            m = lam % 4
            want = 2 * J * (a[0] * (T_LEFT[m] - 0.5 - bl) + a[1] * (T_RIGHT[m] - 0.5 + bl)
                            + a[2] * (T_DOWN[m] - 0.5 - bd) + a[3] * (T_UP[m] - 0.5 + bd))
            assert corr[p, lam] == pytest.approx(want, abs=1e-15)


def test_product_to_sum_inequality():
    for ta, tb in itertools.product((-1, 1), repeat=2):
        assert ta * tb >= ta + tb - 1


def test_zero_coupling_gives_zero_margin():
    E0 = hs_spectrum(1.0, 0.375)[0]
    assert np.allclose(pattern_minima(1.0, 0.375, 0.0, 0.3, -0.2), E0, atol=1e-13)


def test_beta_cancels_on_closed_edge_sets():
    # a horizontal edge contributes a_l on one star and a_r on its neighbour
    pair = [(1, 0, 0, 0), (0, 1, 0, 0)]
    loop = [(1, 0, 1, 0), (0, 1, 1, 0), (1, 0, 0, 1), (0, 1, 0, 1)]
    for a_set in (pair, loop):
        assert beta_neutrality(0.09, a_set, 0.3, -0.45) == pytest.approx(0.0, abs=1e-15)
    assert beta_neutrality(0.09, [(1, 0, 0, 0)], 0.3, 0.0) != 0.0


def test_reference_point_certificate():
    cert = certify_refined(reference_params())
    assert cert.per_star_margin == pytest.approx(0.0249205, abs=1e-7)
    assert cert.worst_pattern == (0, 1, 0, 0)
    assert cert.inter_bound == pytest.approx(3 * cert.per_star_margin, abs=1e-15)
    assert cert.intra_bound == pytest.approx(0.0795398, abs=1e-7)
    assert cert.certified_gap == pytest.approx(0.0747614, abs=1e-7)
    assert cert.vortex_gap == pytest.approx(0.0397699, abs=1e-7)
    assert cert.resolved_inter_bound == pytest.approx(0.0773375, abs=1e-7)
    # the margin falls just short of U/40, which is why 3 x margin misses 0.075
    assert not cert.threshold_readings["0.025U"]["holds"]
    assert not cert.threshold_readings["0.25U"]["holds"]
    assert not cert.verdict
    assert cert.to_dict()["worst_pattern"] == [0, 1, 0, 0]


def test_resolved_bound_never_below_three_worst():
    cert = certify_refined(reference_params(), resolve=False)
    margins = {a: m - cert.E0 for a, m in cert.pattern_minima.items()}
    best, edges = resolved_inter_bound(margins, max_edges=2, window=3)
    assert best >= 3 * min(margins.values()) - 1e-15
    stars = {s for a, b, _ in edges for s in (a, b)}
    assert len(stars) >= 3


def test_coarse_chain():
    t = 1.0
    ok = coarse_bound(13.0, t, 13.0 / 8)
    assert ok["h1_min"] == pytest.approx(-6 * t, abs=1e-12)
    assert ok["h2_bound_holds"] and ok["verdict"]
    assert not coarse_bound(11.0, t, 11.0 / 8)["verdict"]


def test_coarse_chain_exact_diagonal_by_enumeration():
    U, J = 13.0, 13.0 / 8
    best = np.inf
    for m1, ms, m2 in itertools.product(range(4), repeat=3):
        e = -U * ((m1 == 0) + (ms == 0) + (m2 == 0)) + 2 * J * (T_LEFT[m1] * T_RIGHT[ms] + T_LEFT[ms] * T_RIGHT[m2])
        best = min(best, e)
    assert coarse_bound(U, 1.0, J)["h2_exact_chain"]["horizontal"] == pytest.approx(best)
    assert best == pytest.approx(-32.5)


def test_single_point_grid_matches_certifier():
    p = reference_params()
    res = optimize_params({"J": [p.J], "t": [p.t], "beta_lr": [p.beta_lr], "beta_du": [p.beta_du]})
    assert res.best == p
    assert res.best_gap == pytest.approx(certify_refined(p, resolve=False).certified_gap, abs=1e-14)


def test_grid_matches_pointwise_certifier():
    grid = {"J": (0.08, 0.09, 0.005), "t": [0.35, 0.375], "beta_lr": (0.2, 0.3, 0.05), "beta_du": [-0.05, 0.0]}
    res = optimize_params(grid)
    for J, t, bl, bd, inter, intra, gap in res.rows():
        cert = certify_refined(GapParams(1.0, t, J, bl, bd), resolve=False)
        assert gap == pytest.approx(cert.certified_gap, abs=1e-13)


def test_tie_break_prefers_smallest_point():
    # tiny J: every beta gives the same certified gap up to rounding, so the first wins
    res = optimize_params({"J": [0.3], "t": [0.05], "beta_lr": [-0.1, 0.0, 0.1], "beta_du": [0.0, 0.1]})
    flat = res.landscape.ravel()
    first = np.flatnonzero(flat >= flat.max() - 1e-12)[0]
    idx = np.unravel_index(first, res.landscape.shape)
    assert res.best.beta_lr == res.axes["beta_lr"][idx[2]]
    assert res.best.beta_du == res.axes["beta_du"][idx[3]]


def test_csv_landscape(tmp_path):
    res = optimize_params({"J": [0.09], "t": [0.375], "beta_lr": [0.0, 0.25], "beta_du": [0.0]})
    path = tmp_path / "land.csv"
    res.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("J,t,beta_lr") and len(lines) == 3


def test_within_one_step():
    axes = {"J": np.array([0.08, 0.09]), "t": np.array([0.3, 0.4]), "beta_lr": np.array([0.0]),
            "beta_du": np.array([0.0])}
    a = GapParams(1.0, 0.3, 0.08, 0.0, 0.0)
    assert within_one_step(a, GapParams(1.0, 0.4, 0.09, 0.0, 0.0), axes)
    assert not within_one_step(a, GapParams(1.0, 0.5, 0.09, 0.0, 0.0), axes)


def test_bad_inputs():
    with pytest.raises(ValueError):
        optimize_params({"J": []})
    with pytest.raises(ValueError):
        optimize_params({"J": (0.1, 0.2)})
    with pytest.raises(ValueError):
        GapParams(U=0.0)
    with pytest.raises(ValueError):
        GapParams(t=-1.0)


def test_zero_hopping_is_diagonal():
    E0, even_gap, odd_gap = hs_spectrum(1.0, 0.0)
    assert E0 == pytest.approx(-1.0, abs=1e-14)
    assert even_gap == pytest.approx(1.0, abs=1e-14)
    assert odd_gap == pytest.approx(0.0, abs=1e-14)


def test_ground_pattern_is_excluded():
    assert len(PATTERNS) == 15 and (0, 0, 0, 0) not in PATTERNS
    d = certify_refined(reference_params(), resolve=False).to_dict()
    assert len(d["pattern_minima"]) == 15 and "0000" not in d["pattern_minima"]
    assert d["provenance"]


def test_weak_regime_grid_is_orders_below_target():
    res = optimize_params({"J": [1 / 8], "t": [1 / 16], "beta_lr": (-0.5, 0.5, 0.05), "beta_du": (-0.5, 0.5, 0.05)})
    assert 0 < res.best_gap < 0.075 / 100
