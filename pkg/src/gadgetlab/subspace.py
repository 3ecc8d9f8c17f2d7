"""Invariant subspaces, lambda labels, restricted Hamiltonians and states.

The toric and triangular variants share one code path: a subspace is the
closure of a rest configuration under every off-diagonal term, and its
lambda labels are generated independently by walking each star's raising
move ``lambda_s`` times from the representative.  Labels are produced in
lexicographic order (star 0 most significant) and the first label that hits
a state is its canonical label; the number of labels per state is the
global identification the torus imposes, detected rather than assumed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.io
import scipy.sparse as sp

from . import kernels
from .configspace import (ConfigModel, InvarianceError, apply_hamiltonian, assemble, closure,
                          sparse_vector, vector_distance)
from .model import shield_tables
from .pauli import PauliOperator, product

DUMP_VERSION = 1


@dataclass
class SubspaceBasis:
    cm: ConfigModel
    keys: np.ndarray                 # sorted int64 keys
    rows: np.ndarray                 # field rows matching keys
    representative: np.ndarray
    labels: np.ndarray | None = None          # canonical lambda per state, (n, N)
    label_state: np.ndarray | None = None     # state index of every generated label
    period: int = 0                           # labels per star (8 or 24)
    multiplicity: int = 1                     # labels per state
    _H: sp.csr_matrix | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return int(self.keys.size)

    def index_of(self, rows: np.ndarray) -> np.ndarray:
        return kernels.lookup(self.keys, self.cm.pack(rows))

    def label_index(self, lam: np.ndarray) -> np.ndarray:
        """Flat index of lambda vectors in the generated label table."""
        lam = np.atleast_2d(lam) % self.period
        N = lam.shape[1]
        w = self.period ** np.arange(N - 1, -1, -1)
        return lam @ w


def _walk_labels(cm: ConfigModel, rep: np.ndarray, period: int):
    rows = rep.copy()
    for s in range(cm.ts.lattice.n_stars):
        up = cm.hop_moves[s][0]
        powers = [rows]
        for _ in range(period - 1):
            nxt, ok = cm.apply_move(powers[-1], up)
            if not ok.all():
                raise InvarianceError(f"raising move of star {s} annihilated a label state")
            powers.append(nxt)
        rows = np.stack(powers, axis=1).reshape(-1, rows.shape[1])
    return rows


def enumerate_subspace(cm: ConfigModel, d=None, budget: int | None = None,
                       with_labels: bool = True) -> SubspaceBasis:
    """Closure of the rest configuration with slot values ``d`` (default all zero)."""
    if cm.ts.variant == "quantum_double":
        raise ValueError("use gadgetlab.double.qd_enumerate for the quantum double")
    rep = cm.reference(qubits=d)
    keys, rows = closure(cm, rep, budget)
    basis = SubspaceBasis(cm, keys, rows, rep[0])
    if with_labels:
        attach_labels(basis)
    return basis


def attach_labels(basis: SubspaceBasis) -> None:
    cm = basis.cm
    period = 2 * cm.gadget_period
    N = cm.ts.lattice.n_stars
    walked = _walk_labels(cm, basis.representative[None, :], period)
    idx = basis.index_of(walked)
    if (idx < 0).any():
        raise InvarianceError("a lambda label left the enumerated subspace")
    counts = np.bincount(idx, minlength=basis.size)
    if (counts == 0).any():
        raise InvarianceError("lambda labels do not cover the subspace")
    if counts.min() != counts.max():
        raise InvarianceError("uneven label multiplicity")
    _, first = np.unique(idx, return_index=True)
    lam = np.array(np.unravel_index(first, (period,) * N)).T
    basis.labels = lam
    basis.label_state = idx
    basis.period = period
    basis.multiplicity = int(counts[0])


def assemble_restricted(basis: SubspaceBasis) -> sp.csr_matrix:
    if basis._H is None:
        basis._H = assemble(basis.cm, basis.keys, basis.rows)
    return basis._H


# ------------------------------------------------------------ one body

def one_body_matrix(U: float, t: float, period: int = 8) -> np.ndarray:
    """``-U`` on labels 0 and period/2, ``-t`` hops around the ring."""
    h = np.zeros((period, period))
    for lam in range(period):
        h[lam, (lam + 1) % period] = h[(lam + 1) % period, lam] = -t
    h[0, 0] -= U
    h[period // 2, period // 2] -= U
    return h


@dataclass
class LambdaReduction:
    h: np.ndarray                    # shared one-body matrix
    residual: np.ndarray             # per state: diag(H) minus one-body diagonal
    offdiag_error: float             # max |H_offdiag - ring hops|
    folded: sp.csr_matrix            # one-body sum folded onto the config basis, plus residual


def lambda_reduce(basis: SubspaceBasis) -> LambdaReduction:
    cm = basis.cm
    spec = cm.ts.spec
    P = basis.period
    N = basis.labels.shape[1]
    h = one_body_matrix(spec.U, spec.t, P)
    n = basis.size
    r_idx, c_idx, vals = [], [], []
    for s in range(N):
        for step in (1, -1):
            lam = basis.labels.copy()
            lam[:, s] = (lam[:, s] + step) % P
            tgt = basis.label_state[basis.label_index(lam)]
            r_idx.append(tgt)
            c_idx.append(np.arange(n))
            vals.append(np.full(n, -spec.t))
    ring = sp.coo_matrix((np.concatenate(vals), (np.concatenate(r_idx), np.concatenate(c_idx))),
                         shape=(n, n)).tocsr()
    H = assemble_restricted(basis)
    Hoff = H - sp.diags(H.diagonal())
    diff = (Hoff - ring)
    off_err = float(abs(diff).max()) if diff.nnz else 0.0
    onebody_diag = np.diag(h)[basis.labels].sum(axis=1)
    residual = H.diagonal() - onebody_diag
    folded = (ring + sp.diags(onebody_diag + residual)).tocsr()
    if off_err > 1e-12:
        raise InvarianceError(f"off-diagonal part is not one-body (error {off_err:.3g})")
    return LambdaReduction(h, residual, off_err, folded)


def edge_shield_residual(basis: SubspaceBasis) -> np.ndarray:
    """<H_e + H_shield> on every basis state."""
    parts = basis.cm.diag_parts
    return parts["edge"](basis.rows) + parts["shield"](basis.rows)


def verify_shield_cancellation(cm: ConfigModel, basis: SubspaceBasis | None = None) -> dict:
    """Edge-sign vs profile-product tables for every shield pair, plus the M(0) residual."""
    ts = cm.ts
    report: dict = {"orientations": {}, "mismatches": []}
    if ts.variant != "quantum_double":
        for pair in ts.shield_pairs:
            kind = ts.lattice.edges[pair.edge].kind
            et, pt = shield_tables(ts, pair)
            o = report["orientations"].setdefault(kind, {"pairs": 0, "mismatches": 0, "edges": 0})
            o["edges"] += 1
            o["pairs"] += int(et.size)
            bad = np.argwhere(et != pt)
            o["mismatches"] += int(len(bad))
            report["mismatches"] += [(int(pair.edge), int(a), int(b)) for a, b in bad[:5]]
    if basis is not None:
        res = edge_shield_residual(basis)
        report["m0_states"] = basis.size
        report["m0_nonzero_states"] = int(np.count_nonzero(np.abs(res) > 1e-12))
        report["m0_max_abs"] = float(np.abs(res).max()) if res.size else 0.0
    report["ok"] = not report["mismatches"] and report.get("m0_nonzero_states", 0) == 0
    return report


# -------------------------------------------------------------- states

def product_state(basis: SubspaceBasis, alphas) -> np.ndarray:
    """Normalized config-basis vector of sum over lambda of prod_s alpha_s(lambda_s).

    ``alphas`` is a list of per-star amplitude vectors of length ``period``.
    Labels naming the same state are summed, so globally odd products vanish.
    """
    N = len(alphas)
    amp = np.ones(1)
    for s in range(N):
        amp = np.multiply.outer(amp, np.asarray(alphas[s])).ravel()
    vec = np.bincount(basis.label_state, weights=amp, minlength=basis.size)
    nrm = np.linalg.norm(vec)
    if nrm < 1e-12:
        return vec
    return vec / nrm


def star_sector_projector(basis: SubspaceBasis):
    """Projector onto A_s = +1 for every star, as a function on config-basis vectors.

    A_s moves each label lambda_s by half a period, so it acts as a
    permutation of the basis.
    """
    N = basis.labels.shape[1]
    half = basis.period // 2
    perms = []
    for s in range(N):
        lam = basis.labels.copy()
        lam[:, s] += half
        perms.append(basis.label_state[basis.label_index(lam)])

    def project(v: np.ndarray) -> np.ndarray:
        for p in perms:
            w = np.empty_like(v)
            w[p] = v
            v = 0.5 * (v + w)
        return v

    return project


def one_body_eigs(U: float, t: float, period: int = 8):
    """Eigenpairs of the one-body ring split by the half-period shift parity.

    Each sector is diagonalized in its own basis (e_lam +- e_{lam+half}), so
    the parity stays well defined when levels of both sectors coincide
    (e.g. t = 0).  Sorted by energy, even sector first on ties.
    """
    h = one_body_matrix(U, t, period)
    half = period // 2
    ws, vs, ps = [], [], []
    for sign in (1.0, -1.0):
        B = np.zeros((period, half))
        B[np.arange(half), np.arange(half)] = 1 / np.sqrt(2)
        B[np.arange(half) + half, np.arange(half)] = sign / np.sqrt(2)
        w, y = np.linalg.eigh(B.T @ h @ B)
        ws.append(w)
        vs.append(B @ y)
        ps.append(np.full(half, sign))
    w, v, par = np.concatenate(ws), np.concatenate(vs, axis=1), np.concatenate(ps)
    order = np.lexsort((-par, w))
    return w[order], v[:, order], par[order]


def ground_alpha(U: float, t: float, period: int = 8) -> np.ndarray:
    w, v, par = one_body_eigs(U, t, period)
    a = v[:, 0]
    return a * np.sign(a[np.argmax(np.abs(a))])


def odd_alpha(U: float, t: float, period: int = 8) -> tuple[np.ndarray, float]:
    w, v, par = one_body_eigs(U, t, period)
    k = int(np.flatnonzero(par < 0)[0])
    return v[:, k], float(w[k])


SECTORS = {0: (), 1: ("X1",), 2: ("X2",), 3: ("X1", "X2")}


def sector_reference(ts, sector: int) -> np.ndarray:
    ops = [ts.logicals[name] for name in SECTORS[sector]]
    x = product(ops, ts.n_qubits).x if ops else 0
    return np.array([(x >> q) & 1 for q in range(ts.n_qubits)], dtype=np.int64)


@dataclass
class GroundState:
    basis: SubspaceBasis
    vector: np.ndarray
    energy: float
    residual: float
    alpha: np.ndarray


def eigen_residual(H, vec) -> tuple[float, float]:
    hv = H @ vec
    e = float(vec @ hv)
    return e, float(np.linalg.norm(hv - e * vec))


def build_ground_state(cm: ConfigModel, sector: int = 0, basis: SubspaceBasis | None = None) -> GroundState:
    if sector not in SECTORS:
        raise ValueError(f"logical sector must be 0..3, got {sector}")
    if basis is None:
        basis = enumerate_subspace(cm, sector_reference(cm.ts, sector))
    spec = cm.ts.spec
    a0 = ground_alpha(spec.U, spec.t, basis.period)
    vec = product_state(basis, [a0] * basis.labels.shape[1])
    e, res = eigen_residual(assemble_restricted(basis), vec)
    return GroundState(basis, vec, e, res, a0)


def ground_formula_state(cm: ConfigModel, basis: SubspaceBasis, alpha: np.ndarray):
    """prod_s (1 + A_s) sum_lambda alpha(lambda) (D_s^dag)^lambda |psi(d)>, by direct application.

    Uses only the raising moves and star operators, never the label table.
    """
    rows = basis.representative[None, :].copy()
    vals = np.ones(1)
    half = len(alpha) // 2
    for s in range(cm.ts.lattice.n_stars):
        up = cm.hop_moves[s][0]
        cur = rows
        acc_r, acc_v = [], []
        for lam in range(half):
            acc_r.append(cur)
            acc_v.append(alpha[lam] * vals)
            cur, ok = cm.apply_move(cur, up)
        keys, rows, vals = sparse_vector(cm, np.concatenate(acc_r), np.concatenate(acc_v))
        star = cm.ts.stars[s]
        flipped, amp = cm.apply_pauli(rows, star)
        keys, rows, vals = sparse_vector(cm, np.concatenate([rows, flipped]),
                                         np.concatenate([vals, amp * vals]))
    idx = basis.index_of(rows)
    if (idx < 0).any():
        raise InvarianceError("ground-state formula left the subspace")
    vec = np.zeros(basis.size)
    np.add.at(vec, idx, vals)
    return vec / np.linalg.norm(vec)


def star_orbit_keys(cm: ConfigModel, d: np.ndarray) -> np.ndarray:
    """Sorted qubit-part keys of d times every product of star operators."""
    n = cm.ts.n_qubits
    dmask = sum(int(b) << q for q, b in enumerate(d))
    masks = {dmask}
    for st in cm.ts.stars:
        masks |= {m ^ st.x for m in masks}
    return np.array(sorted(masks), dtype=np.int64)


def _qubit_masks(cm: ConfigModel, rows: np.ndarray) -> np.ndarray:
    q = rows[:, cm.slot0:]
    w = np.left_shift(np.int64(1), np.arange(q.shape[1], dtype=np.int64))
    return q @ w


def tilde_alpha(alpha: np.ndarray, levels: int) -> np.ndarray:
    """Gadget-level amplitudes after the connector folds lambda and lambda+period/2."""
    half = len(alpha) // 2
    a = alpha[:half]
    b = alpha[half:]
    mag = np.sqrt(a ** 2 + b ** 2)
    out = np.where(np.sign(a) == 0, np.sign(b), np.sign(a)) * mag
    if levels != half:
        raise ValueError("level count mismatch")
    return out / np.linalg.norm(out)


def connector_fidelity(gs: GroundState) -> float:
    """|<alpha~^N (x) psi_code(d)| U |psi_GS>|."""
    cm = gs.basis.cm
    moved = cm.apply_connector(gs.basis.rows)
    at = tilde_alpha(gs.alpha, cm.gadget_period)
    amp = np.ones(moved.shape[0])
    for s, cols in enumerate(cm.gadget_cols):
        amp *= at[moved[:, cols[0]]]
    d = gs.basis.representative[cm.slot0:]
    orbit = star_orbit_keys(cm, d)
    inside = kernels.lookup(orbit, _qubit_masks(cm, moved)) >= 0
    target = np.where(inside, amp / np.sqrt(orbit.size), 0.0)
    return float(abs(np.dot(gs.vector, target)))


def conjugated_logical(cm: ConfigModel, op: PauliOperator, rows: np.ndarray, vec: np.ndarray):
    """U^dag L U applied to a sparse vector; returns (keys, rows, values)."""
    r = cm.apply_connector(rows)
    r, amp = cm.apply_pauli(r, op)
    r = cm.apply_connector(r)
    return sparse_vector(cm, r, amp * vec)


def logical_commutator_residual(cm: ConfigModel, op: PauliOperator, rows: np.ndarray, vec: np.ndarray) -> float:
    """|| H L~ v - L~ H v || computed by direct term application."""
    _, lr, lv = conjugated_logical(cm, op, rows, vec)
    a = apply_hamiltonian(cm, lr, lv)
    _, hr, hv = apply_hamiltonian(cm, rows, vec)
    b = conjugated_logical(cm, op, hr, hv)
    return vector_distance(a, b)


# --------------------------------------------------------- excitations

@dataclass
class Excitation:
    kind: str
    location: tuple
    basis: SubspaceBasis
    vector: np.ndarray
    energy: float
    expected: float
    residual: float


def create_excitation(cm: ConfigModel, gs: GroundState, kind: str, location) -> Excitation:
    """Localized excitation on top of the sector-0 ground state.

    ``vortex-pair``: location = (star_a, star_b); both stars take the lowest
    shift-odd one-body eigenvector.
    ``charge-pair``: location = (column, j_start, length); X on both slots of
    the horizontal edges h(column, j) for j in the segment.  Length 0 returns
    the ground state.
    """
    spec = cm.ts.spec
    P = gs.basis.period
    N = gs.basis.labels.shape[1]
    w, _, _ = one_body_eigs(spec.U, spec.t, P)
    if kind == "vortex-pair":
        a, b = location
        if a == b:
            raise ValueError("vortex pair needs two distinct stars")
        aodd, eodd = odd_alpha(spec.U, spec.t, P)
        alphas = [aodd if s in (a, b) else gs.alpha for s in range(N)]
        vec = product_state(gs.basis, alphas)
        e, res = eigen_residual(assemble_restricted(gs.basis), vec)
        return Excitation(kind, (a, b), gs.basis, vec, e, gs.energy + 2 * (eodd - w[0]), res)
    if kind == "charge-pair":
        col, j0, length = location
        L = cm.ts.lattice
        xs = [q for j in range(j0, j0 + length) for q in L.edge_qubits(L.edge_id("h", col, j))]
        seg = PauliOperator.from_sites(cm.ts.n_qubits, xs=xs)
        if length == 0:
            return Excitation(kind, tuple(location), gs.basis, gs.vector, gs.energy, gs.energy, gs.residual)
        keys, rows, vals = conjugated_logical(cm, seg, gs.basis.rows, gs.vector)
        d = gs.basis.representative[cm.slot0:] ^ np.array([(seg.x >> q) & 1 for q in range(cm.ts.n_qubits)])
        nb = enumerate_subspace(cm, d, with_labels=False)
        idx = nb.index_of(rows)
        if (idx < 0).any():
            raise InvarianceError("string segment left the target subspace")
        vec = np.zeros(nb.size)
        vec[idx] = vals
        e, res = eigen_residual(assemble_restricted(nb), vec)
        flipped = 2 if 0 < length < L.Ly else 0
        return Excitation(kind, tuple(location), nb, vec, e, gs.energy + 2 * spec.J * flipped, res)
    raise ValueError(f"unknown excitation kind {kind!r}")


def z_segment_profile_check(cm: ConfigModel, gs: GroundState, i0: int, length: int, row: int = 0) -> float:
    """Conjugated Z-string segment versus the product state with sign-twisted endpoint factors.

    Returns the norm of the difference.  The segment is Z on h^u(i, row) for
    i in [i0, i0+length).
    """
    L = cm.ts.lattice
    n = cm.ts.n_qubits
    seg = PauliOperator.from_sites(n, zs=[L.qubit("h", i, row, "u") for i in range(i0, i0 + length)])
    _, rows, vals = conjugated_logical(cm, seg, gs.basis.rows, gs.vector)
    idx = gs.basis.index_of(rows)
    if (idx < 0).any():
        raise InvarianceError("Z segment left the subspace")
    got = np.zeros(gs.basis.size)
    got[idx] = vals
    # after conjugation only the full-period star flips survive, so a star
    # sees the sign (-1)^{|seg & A_s|} on the upper half of its walk
    P = gs.basis.period
    alphas = []
    for s in range(L.n_stars):
        odd = bin(seg.z & cm.ts.stars[s].x).count("1") % 2
        sig = np.where((np.arange(P) >= P // 2) & bool(odd), -1.0, 1.0)
        alphas.append(gs.alpha * sig)
    ref = product_state(gs.basis, alphas)
    d = gs.basis.representative[cm.slot0:]
    dsign = -1.0 if sum(int(d[q]) for q in seg.z_sites) % 2 else 1.0
    return float(np.linalg.norm(got - dsign * ref))


# ------------------------------------------------------------- exports

def export_matrix_market(H: sp.spmatrix, path, comment: str = "") -> None:
    scipy.io.mmwrite(str(path), sp.coo_matrix(H), comment=comment, field="real", symmetry="general")


def subspace_dump(basis: SubspaceBasis, variant: str | None = None) -> dict:
    h = hashlib.sha256()
    if basis.labels is not None:
        h.update(np.ascontiguousarray(basis.labels, dtype=np.int64).tobytes())
    h.update(np.ascontiguousarray(basis.keys).tobytes())
    return {
        "dump_version": DUMP_VERSION,
        "variant": variant or basis.cm.ts.variant,
        "representative": {n: int(v) for n, v in zip(basis.cm.names, basis.representative)},
        "size": basis.size,
        "label_multiplicity": basis.multiplicity,
        "table_sha256": h.hexdigest(),
    }


def dumps_subspace(basis: SubspaceBasis) -> str:
    return json.dumps(subspace_dump(basis), sort_keys=True)

