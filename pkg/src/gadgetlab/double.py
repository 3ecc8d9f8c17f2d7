"""Quantum-double subspaces in the (lambda, g, f) picture.

A label ``(lam, a, f)`` per star stands for
``(D^{g_a dag})^lam A^f |psi(g, d)>`` with ``lam`` in 0..3, ``a`` an index
into the generating set and ``f`` any group element.  Walking four steps
applies the star operator of the hop species, so ``(lam+4, a, f)`` is the
same state as ``(lam, a, g_a f)``; :func:`canonical_label` performs that
rewrite.  Any further identification on a torus is detected from label
collisions during enumeration and reported as ``multiplicity``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .configspace import ConfigModel, InvarianceError, assemble, closure
from .groups import GroupTable
from .model import qd_star_action
from .subspace import SubspaceBasis


def canonical_label(group: GroupTable, gens, lam: int, a: int, f: int) -> tuple[int, int, int]:
    """Fold ``lam`` into 0..3 using ``(lam+4, a, f) == (lam, a, g_a f)``."""
    g = gens[a]
    q, r = divmod(lam, 4)
    for _ in range(q):
        f = group.mul(g, f)
    return r, a, f


def raw_shift(group: GroupTable, gens, lam: int, a: int, f: int) -> tuple[int, int, int]:
    """The equivalent label with ``lam + 4``."""
    return lam + 4, a, group.mul(group.inv(gens[a]), f)


def _star_perms(cm: ConfigModel, s: int, h: int):
    G = cm.ts.spec.group
    out = []
    for slot, sp_ in sorted(qd_star_action(cm.ts, s).items()):
        perm = G.left_perm(h) if sp_ > 0 else G.right_inv_perm(h)
        out.append((cm.slot0 + slot, perm))
    return out


def apply_star(cm: ConfigModel, rows: np.ndarray, s: int, h) -> np.ndarray:
    """A^h_s on every row; ``h`` may be a per-row array of elements."""
    out = rows.copy()
    G = cm.ts.spec.group
    h = np.broadcast_to(np.asarray(h), (rows.shape[0],))
    for slot, sp_ in qd_star_action(cm.ts, s).items():
        col = cm.slot0 + slot
        z = rows[:, col]
        out[:, col] = G.mult[h, z] if sp_ > 0 else G.mult[z, G.inverse[h]]
    return out


def qd_seeds(cm: ConfigModel, d=None) -> np.ndarray:
    N = cm.ts.lattice.n_stars
    ng = len(cm.ts.spec.group.generators)
    base = cm.reference(qubits=d)[0]
    seeds = []
    for gv in itertools.product(range(ng), repeat=N):
        row = base.copy()
        for s, a in enumerate(gv):
            row[cm.gadget_cols[s][1]] = a
        seeds.append(row)
    return np.array(seeds)


def _walk_qd_labels(cm: ConfigModel, rep: np.ndarray):
    G = cm.ts.spec.group
    ng = len(G.generators)
    rows = rep[None, :].copy()
    for s in range(cm.ts.lattice.n_stars):
        gc = cm.gadget_cols[s][1]
        blocks = []
        for lam in range(4):
            for a in range(ng):
                for f in range(G.order):
                    r = rows.copy()
                    r[:, gc] = a
                    r = apply_star(cm, r, s, f)
                    for _ in range(lam):
                        r, ok = cm.apply_move(r, cm.hop_moves[s][a])
                        if not ok.all():
                            raise InvarianceError("hop annihilated a label state")
                    blocks.append(r)
        rows = np.stack(blocks, axis=1).reshape(-1, rows.shape[1])
    return rows


@dataclass
class QDLabels:
    per_star: int                     # 4 * |gens| * |G|
    labels: np.ndarray                # canonical (lam, a, f) per state, shape (n, N, 3)
    flat: np.ndarray                  # canonical flat per-star label index, (n, N)


def qd_enumerate(cm: ConfigModel, d=None, budget: int | None = None) -> SubspaceBasis:
    """Closure of every gadget-rest seed psi(g, d) under all hopping and mixing terms."""
    if cm.ts.variant != "quantum_double":
        raise ValueError("not a quantum-double model")
    seeds = qd_seeds(cm, d)
    keys, rows = closure(cm, seeds, budget)
    basis = SubspaceBasis(cm, keys, rows, seeds[0])
    walked = _walk_qd_labels(cm, seeds[0])
    idx = basis.index_of(walked)
    if (idx < 0).any():
        raise InvarianceError("a (lambda, g, f) label left the subspace")
    counts = np.bincount(idx, minlength=basis.size)
    if (counts == 0).any():
        raise InvarianceError("labels do not cover the subspace")
    if counts.min() != counts.max():
        raise InvarianceError("uneven label multiplicity")
    G = cm.ts.spec.group
    per = 4 * len(G.generators) * G.order
    N = cm.ts.lattice.n_stars
    _, first = np.unique(idx, return_index=True)
    flat = np.array(np.unravel_index(first, (per,) * N)).T
    basis.labels = flat
    basis.label_state = idx
    basis.period = per
    basis.multiplicity = int(counts[0])
    return basis


def decode_label(group: GroupTable, flat: np.ndarray):
    ng = len(group.generators)
    lam, rest = np.divmod(flat, ng * group.order)
    a, f = np.divmod(rest, group.order)
    return lam, a, f


def encode_label(group: GroupTable, lam, a, f):
    ng = len(group.generators)
    return (np.asarray(lam) * ng + np.asarray(a)) * group.order + np.asarray(f)


def qd_one_body(group: GroupTable, U: float, t: float) -> np.ndarray:
    """h_s on the 4|gens||G| label space, with the Q_s term including g = g'."""
    gens = list(group.generators)
    ng = len(gens)
    dim = 4 * ng * group.order
    h = np.zeros((dim, dim))
    for a in range(ng):
        for f in range(group.order):
            i0 = encode_label(group, 0, a, f)
            h[i0, i0] -= U
            for lam in range(4):
                src = encode_label(group, lam, a, f)
                nl, na, nf = canonical_label(group, gens, lam + 1, a, f)
                dst = encode_label(group, nl, na, nf)
                h[dst, src] -= t
                h[src, dst] -= t
            for b in range(ng):
                h[encode_label(group, 0, b, f), i0] -= t
    return h


@dataclass
class QDReduction:
    h: np.ndarray
    residual: np.ndarray
    offdiag_error: float
    onebody_matrix: sp.csr_matrix     # one-body sum mapped onto the config basis (no residual)


def qd_lambda_reduce(basis: SubspaceBasis) -> QDReduction:
    cm = basis.cm
    spec = cm.ts.spec
    G = spec.group
    h = qd_one_body(G, spec.U, spec.t)
    N = basis.labels.shape[1]
    n = basis.size
    per = basis.period
    weights = per ** np.arange(N - 1, -1, -1)
    hd = np.diag(h)
    hoff = h - np.diag(hd)
    r_idx, c_idx, vals = [], [], []
    for s in range(N):
        cur = basis.labels[:, s]
        for tgt_label in range(per):
            col = hoff[tgt_label, cur]
            nz = np.flatnonzero(col)
            if nz.size == 0:
                continue
            lab = basis.labels[nz].copy()
            lab[:, s] = tgt_label
            r_idx.append(basis.label_state[lab @ weights])
            c_idx.append(nz)
            vals.append(col[nz])
    off = sp.coo_matrix((np.concatenate(vals), (np.concatenate(r_idx), np.concatenate(c_idx))),
                        shape=(n, n)).tocsr()
    H = assemble(cm, basis.keys, basis.rows)
    Hoff = H - sp.diags(H.diagonal())
    diff = Hoff - off
    err = float(abs(diff).max()) if diff.nnz else 0.0
    onebody_diag = hd[basis.labels].sum(axis=1)
    residual = H.diagonal() - onebody_diag
    return QDReduction(h, residual, err, (off + sp.diags(onebody_diag)).tocsr())


def qd_shield_report(basis: SubspaceBasis) -> dict:
    """States of M(0) where <H_e + H_shield> is nonzero, with an example label."""
    parts = basis.cm.diag_parts
    res = parts["edge"](basis.rows) + parts["shield"](basis.rows)
    bad = np.flatnonzero(np.abs(res) > 1e-12)
    out = {"states": basis.size, "edges": len(basis.cm.ts.edges), "nonzero_states": int(bad.size),
           "max_abs": float(np.abs(res).max()) if res.size else 0.0, "ok": bad.size == 0}
    if bad.size:
        G = basis.cm.ts.spec.group
        lam, a, f = decode_label(G, basis.labels[bad[0]])
        out["example"] = {"lam": lam.tolist(), "gen": [int(G.generators[x]) for x in a], "f": f.tolist(),
                          "value": float(res[bad[0]])}
    return out


# ---------------------------------------------------------- ground state

@dataclass
class QDGround:
    basis: SubspaceBasis
    vector: np.ndarray
    energy: float
    residual: float
    alpha: np.ndarray
    alpha_spread: float          # max deviation of alpha from a function of lambda alone


def qd_ground_state(basis: SubspaceBasis) -> QDGround:
    cm = basis.cm
    spec = cm.ts.spec
    G = spec.group
    h = qd_one_body(G, spec.U, spec.t)
    w, v = np.linalg.eigh(h)
    a0 = v[:, 0] * np.sign(v[np.argmax(np.abs(v[:, 0])), 0])
    lam, _, _ = decode_label(G, np.arange(len(a0)))
    spread = max(float(np.ptp(a0[lam == k])) for k in range(4))
    N = basis.labels.shape[1]
    amp = np.ones(1)
    for _ in range(N):
        amp = np.multiply.outer(amp, a0).ravel()
    vec = np.bincount(basis.label_state, weights=amp, minlength=basis.size)
    vec /= np.linalg.norm(vec)
    H = assemble(cm, basis.keys, basis.rows)
    hv = H @ vec
    e = float(vec @ hv)
    return QDGround(basis, vec, e, float(np.linalg.norm(hv - e * vec)), a0, spread)


def qd_apply_connector(cm: ConfigModel, rows: np.ndarray) -> np.ndarray:
    """U = sum |m,g><m,g| (prod_{m'<m} A^g(m'))^dag, applied to each row."""
    G = cm.ts.spec.group
    gens = list(G.generators)
    out = rows.copy()
    for s in range(cm.ts.lattice.n_stars):
        mc, gc = cm.gadget_cols[s]
        for a, g in enumerate(gens):
            ginv = G.inv(g)
            for m in range(1, 4):
                sel = (rows[:, mc] == m) & (rows[:, gc] == a)
                if not sel.any():
                    continue
                for mp in reversed(range(m)):
                    for slot, sp_ in cm.ts.qd_hops[s][mp]:
                        col = cm.slot0 + slot
                        z = out[sel, col]
                        out[sel, col] = G.mult[ginv, z] if sp_ > 0 else G.mult[z, g]
    return out


def qd_code_orbit(cm: ConfigModel, d=None) -> set[tuple[int, ...]]:
    """Qudit configurations reachable from d by star operators (the code state's support)."""
    G = cm.ts.spec.group
    n = cm.ts.n_qubits
    start = tuple(int(x) for x in (np.zeros(n, dtype=np.int64) if d is None else d))
    seen = {start}
    frontier = [start]
    actions = [qd_star_action(cm.ts, s) for s in range(cm.ts.lattice.n_stars)]
    while frontier:
        nxt = []
        for cfg in frontier:
            for act in actions:
                for h in G.generators:
                    new = list(cfg)
                    for slot, sp_ in act.items():
                        new[slot] = G.mul(h, new[slot]) if sp_ > 0 else G.mul(new[slot], G.inv(h))
                    tup = tuple(new)
                    if tup not in seen:
                        seen.add(tup)
                        nxt.append(tup)
        frontier = nxt
    return seen


def qd_connector_fidelity(gs: QDGround) -> dict:
    cm = gs.basis.cm
    G = cm.ts.spec.group
    ng = len(G.generators)
    moved = qd_apply_connector(cm, gs.basis.rows)
    lam, a, f = decode_label(G, np.arange(len(gs.alpha)))
    tilde = np.zeros((4, ng))
    np.add.at(tilde, (lam, a), gs.alpha ** 2)
    tilde = np.sqrt(tilde)
    tilde /= np.linalg.norm(tilde)
    orbit = qd_code_orbit(cm, gs.basis.representative[cm.slot0:])
    qd = moved[:, cm.slot0:]
    inside = np.array([tuple(r) in orbit for r in qd.tolist()])
    amp = np.ones(moved.shape[0])
    for s, (mc, gc) in enumerate(cm.gadget_cols):
        amp *= tilde[moved[:, mc], moved[:, gc]]
    target = np.where(inside, amp / np.sqrt(len(orbit)), 0.0)
    plaq_ok = all(cm.diag_parts["plaquette"](np.concatenate(
        [np.zeros((1, cm.slot0), dtype=np.int64), np.array([o])], axis=1))[0]
        == -cm.ts.spec.J * len(cm.ts.qd_plaquettes) for o in orbit)
    return {"fidelity": float(abs(np.dot(gs.vector, target))), "orbit_size": len(orbit),
            "plaquettes_satisfied": bool(plaq_ok)}
