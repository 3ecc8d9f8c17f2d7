"""Computational-basis engine shared by all gadget variants.

A configuration is a row of small integers: one or two gadget fields per
star followed by one field per qubit (or qudit) slot.  Off-diagonal
Hamiltonian terms are *moves*: lists of mutually exclusive branches that
each test a few fields and push some fields through permutations.  Every
amplitude is +1 times the move's coefficient, so the restricted Hamiltonian
is assembled from integer bookkeeping plus a vectorized diagonal.

Gadget fields
-------------
* toric: ``m`` in 0..3 per star.
* quantum double: ``m`` in 0..3 and ``g`` (index into the generating set).
* triangular: the ``n_s = 1`` sector is encoded compactly as
  ``k = 2*corner + (m_corner - 1)`` in 0..11; one hop step is ``k -> k+1``
  and steps out of even ``k`` carry the corner's two-X operator.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from . import kernels
from .model import TermSet
from .pauli import PauliOperator

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 1 << 22


class BudgetExceeded(RuntimeError):
    pass


class InvarianceError(RuntimeError):
    pass


def state_budget(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    env = os.environ.get("GADGET_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


@dataclass(frozen=True)
class Branch:
    conds: tuple[tuple[int, int], ...]
    acts: tuple[tuple[int, tuple[int, ...]], ...]

    def inverse(self) -> "Branch":
        acted = dict(self.acts)
        conds = tuple((f, acted[f][v]) if f in acted else (f, v) for f, v in self.conds)
        acts = []
        for f, perm in self.acts:
            inv = [0] * len(perm)
            for a, b in enumerate(perm):
                inv[b] = a
            acts.append((f, tuple(inv)))
        return Branch(conds, tuple(acts))


@dataclass
class Move:
    name: str
    coef: float
    branches: list[Branch]
    star: int = -1
    _compiled: tuple | None = field(default=None, repr=False)

    def inverse(self, name: str | None = None) -> "Move":
        return Move(name or self.name + "^-1", self.coef, [b.inverse() for b in self.branches], self.star)

    def compiled(self, width: int):
        if self._compiled is None:
            cf, cv, cp, af, at, ap = [], [], [0], [], [], [0]
            for b in self.branches:
                for f, v in b.conds:
                    cf.append(f)
                    cv.append(v)
                cp.append(len(cf))
                for f, perm in b.acts:
                    af.append(f)
                    row = list(perm) + list(range(len(perm), width))
                    at.append(row)
                ap.append(len(af))
            table = np.array(at, dtype=np.int64).reshape(-1, width)
            self._compiled = (np.array(cf, dtype=np.int64), np.array(cv, dtype=np.int64),
                              np.array(cp, dtype=np.int64), np.array(af, dtype=np.int64),
                              table, np.array(ap, dtype=np.int64))
        return self._compiled


def _cycle(n: int) -> tuple[int, ...]:
    return tuple((a + 1) % n for a in range(n))


@dataclass
class ConfigModel:
    ts: TermSet
    names: list[str]
    radices: np.ndarray
    gadget_cols: list[list[int]]
    slot0: int                      # column of qubit/qudit slot 0
    hop_moves: list[list[Move]]     # per star, the raising moves (one per generator for the double)
    moves: list[Move]               # every off-diagonal term, closed under inversion
    diag_parts: dict[str, Callable[[np.ndarray], np.ndarray]]
    gadget_period: int              # hop steps per star before the star operator appears

    def __post_init__(self):
        self.radices = np.asarray(self.radices, dtype=np.int64)
        w = np.ones(len(self.radices), dtype=np.int64)
        total = 1
        for c, r in enumerate(self.radices):
            w[c] = total
            total *= int(r)
            if total >= 1 << 62:
                w = None      # moves still work; packing raises
                break
        self.weights = w
        self.width = int(self.radices.max())

    @property
    def n_fields(self) -> int:
        return len(self.radices)

    def pack(self, fields: np.ndarray) -> np.ndarray:
        if self.weights is None:
            raise BudgetExceeded("configuration space too large for 62-bit keys")
        return kernels.pack(fields, self.weights)

    def unpack(self, keys: np.ndarray) -> np.ndarray:
        return kernels.unpack(keys, self.radices)

    def apply_move(self, fields: np.ndarray, move: Move):
        """Returns (new_fields, fired) with ``fired`` False where the move annihilates."""
        out, which = kernels.apply_branches(fields, *move.compiled(self.width))
        return out, which >= 0

    def diagonal(self, fields: np.ndarray) -> np.ndarray:
        total = np.zeros(fields.shape[0])
        for f in self.diag_parts.values():
            total += f(fields)
        return total

    def slot_cols(self, slots) -> np.ndarray:
        return self.slot0 + np.asarray(list(slots), dtype=np.int64)

    # ----------------------------------------------------- state helpers
    def reference(self, qubits=None, gadget=None) -> np.ndarray:
        """One configuration: gadgets at rest (or ``gadget``) with the given slot values."""
        row = np.zeros(self.n_fields, dtype=np.int64)
        if qubits is not None:
            row[self.slot0:] = np.asarray(qubits, dtype=np.int64)
        if gadget is not None:
            for s, vals in enumerate(gadget):
                vals = np.atleast_1d(vals)
                row[self.gadget_cols[s][:len(vals)]] = vals
        return row[None, :]

    def apply_pauli(self, fields: np.ndarray, op: PauliOperator):
        """Act with a qubit Pauli operator; returns (fields, amplitude)."""
        out = fields.copy()
        xs = self.slot_cols(op.x_sites)
        if len(xs):
            out[:, xs] ^= 1
        sign = np.ones(fields.shape[0])
        zs = self.slot_cols(op.z_sites)
        if len(zs):
            sign = 1.0 - 2.0 * kernels.parity(fields, zs)
        amp = (1j ** op.phase) * sign
        if op.phase % 2 == 0:
            amp = amp.real
        return out, amp

    def apply_connector(self, fields: np.ndarray) -> np.ndarray:
        """The level-controlled prefix flips of the connecting unitary (self-inverse)."""
        if self.ts.variant == "quantum_double":
            raise NotImplementedError("use gadgetlab.double for the group-valued connector")
        out = fields.copy()
        for s, levels in enumerate(self.ts.connector):
            col = self.gadget_cols[s][0]
            for lev, pref in enumerate(levels):
                if not pref.x:
                    continue
                rows = fields[:, col] == lev
                if rows.any():
                    xs = self.slot_cols(pref.x_sites)
                    out[np.ix_(rows, xs)] ^= 1
        return out


# --------------------------------------------------------------- builders

def _square_diag(ts: TermSet, gcols, slot0, m_zero_energy: float):
    J = ts.spec.J
    edge_cols = [slot0 + np.array(op.z_sites) for op in ts.edges]
    plaq_cols = [slot0 + np.array(op.z_sites) for op in ts.plaquettes]

    def gadget(F):
        return m_zero_energy * sum((F[:, c[0]] == 0).astype(float) for c in gcols)

    def edge(F):
        out = np.zeros(F.shape[0])
        for cols in edge_cols:
            out -= J * (1.0 - 2.0 * kernels.parity(F, cols))
        return out

    def plaquette(F):
        out = np.zeros(F.shape[0])
        for cols in plaq_cols:
            out -= J * (1.0 - 2.0 * kernels.parity(F, cols))
        return out

    def shield(F):
        out = np.zeros(F.shape[0])
        for p in ts.shield_pairs:
            ta = np.asarray(p.profile_a)[F[:, gcols[p.star_a][0]]]
            tb = np.asarray(p.profile_b)[F[:, gcols[p.star_b][0]]]
            out += p.coef * ta * tb
        return out

    return {"gadget": gadget, "edge": edge, "shield": shield, "plaquette": plaquette}


def toric_config_model(ts: TermSet) -> ConfigModel:
    spec = ts.spec
    N = spec.lattice.n_stars
    gcols = [[s] for s in range(N)]
    slot0 = N
    radices = [4] * N + [2] * ts.n_qubits
    names = [f"m{s}" for s in range(N)] + [f"q{q}" for q in range(ts.n_qubits)]
    hop_moves, moves = [], []
    for s in range(N):
        branches = []
        for m, op in enumerate(ts.hop_schedule[s]):
            acts = [(s, _cycle(4))] + [(slot0 + q, (1, 0)) for q in op.x_sites]
            branches.append(Branch(((s, m),), tuple(acts)))
        up = Move(f"D+[{s}]", -spec.t, branches, s)
        hop_moves.append([up])
        moves += [up, up.inverse(f"D-[{s}]")]
    diag = _square_diag(ts, gcols, slot0, -spec.U)
    return ConfigModel(ts, names, np.array(radices), gcols, slot0, hop_moves, moves, diag, 4)


def triangular_config_model(ts: TermSet) -> ConfigModel:
    spec = ts.spec
    L = spec.lattice
    N = L.n_stars
    gcols = [[s] for s in range(N)]
    slot0 = N
    radices = [12] * N + [2] * ts.n_qubits
    names = [f"k{s}" for s in range(N)] + [f"q{q}" for q in range(ts.n_qubits)]
    hop_moves, moves = [], []
    for s in range(N):
        branches = []
        for k in range(12):
            acts = [(s, _cycle(12))]
            if k % 2 == 0:
                acts += [(slot0 + q, (1, 0)) for q in ts.hop_schedule[s][k // 2].x_sites]
            branches.append(Branch(((s, k),), tuple(acts)))
        up = Move(f"D+[{s}]", -spec.t, branches, s)
        hop_moves.append([up])
        moves += [up, up.inverse(f"D-[{s}]")]
    diag = _square_diag(ts, gcols, slot0, -spec.U)
    diag["penalty"] = lambda F: np.zeros(F.shape[0])     # n_s = 1 throughout the compact encoding
    return ConfigModel(ts, names, np.array(radices), gcols, slot0, hop_moves, moves, diag, 12)


def qd_config_model(ts: TermSet) -> ConfigModel:
    spec = ts.spec
    G = spec.group
    gens = list(G.generators)
    ng = len(gens)
    N = spec.lattice.n_stars
    gcols = [[2 * s, 2 * s + 1] for s in range(N)]
    slot0 = 2 * N
    radices = [4, ng] * N + [G.order] * ts.n_qubits
    names = [n for s in range(N) for n in (f"m{s}", f"g{s}")] + [f"z{q}" for q in range(ts.n_qubits)]
    hop_moves, moves = [], []
    for s in range(N):
        mc, gc = gcols[s]
        ups = []
        for a, g in enumerate(gens):
            lp = tuple(int(v) for v in G.left_perm(g))
            rp = tuple(int(v) for v in G.right_inv_perm(g))
            branches = []
            for m, step in enumerate(ts.qd_hops[s]):
                acts = [(mc, _cycle(4))] + [(slot0 + sl, lp if sp > 0 else rp) for sl, sp in step]
                branches.append(Branch(((mc, m), (gc, a)), tuple(acts)))
            up = Move(f"D+[{s},{g}]", -spec.t, branches, s)
            ups.append(up)
            moves += [up, up.inverse(f"D-[{s},{g}]")]
        hop_moves.append(ups)
        for a in range(ng):
            for b in range(ng):
                if a != b:
                    swap = list(range(ng))
                    swap[a], swap[b] = b, a
                    moves.append(Move(f"Q[{s},{gens[a]}->{gens[b]}]", -spec.t,
                                      [Branch(((mc, 0), (gc, a)), ((gc, tuple(swap)),))], s))
    J = spec.J
    inv = G.inverse
    mult = G.mult
    gens_arr = np.asarray(gens)

    def gadget(F):
        return (-spec.U - spec.t) * sum((F[:, c[0]] == 0).astype(float) for c in gcols)

    def edge(F):
        out = np.zeros(F.shape[0])
        for a, b in ts.edges:
            out -= J * (F[:, slot0 + a] == F[:, slot0 + b])
        return out

    def plaquette(F):
        out = np.zeros(F.shape[0])
        for plaq in ts.qd_plaquettes:
            acc = np.zeros(F.shape[0], dtype=np.int64)
            for sl, pw in plaq:
                z = F[:, slot0 + sl]
                acc = mult[acc, z if pw > 0 else inv[z]]
            out -= J * (acc == 0)
        return out

    def shield(F):
        out = np.zeros(F.shape[0])
        for p in ts.shield_pairs:
            ta = np.asarray(p.profile_a)[F[:, gcols[p.star_a][0]]]
            tb = np.asarray(p.profile_b)[F[:, gcols[p.star_b][0]]]
            gb = gens_arr[F[:, gcols[p.star_b][1]]]
            if p.group_delta == "inverse":
                gb = inv[gb]
            same = gens_arr[F[:, gcols[p.star_a][1]]] == gb
            out += p.coef / 4 * ((1 + ta) * (1 + tb) + same * (1 - ta) * (1 - tb))
        return out

    diag = {"gadget": gadget, "edge": edge, "shield": shield, "plaquette": plaquette}
    return ConfigModel(ts, names, np.array(radices), gcols, slot0, hop_moves, moves, diag, 4)


def config_model(ts: TermSet) -> ConfigModel:
    if ts.variant == "toric":
        return toric_config_model(ts)
    if ts.variant == "triangular":
        return triangular_config_model(ts)
    return qd_config_model(ts)


# ------------------------------------------------------------ engine ops

def unique_rows(cm: ConfigModel, fields: np.ndarray):
    keys = cm.pack(fields)
    keys, first = np.unique(keys, return_index=True)
    return keys, fields[first]


def closure(cm: ConfigModel, seeds: np.ndarray, budget: int | None = None,
            moves: list[Move] | None = None):
    """Breadth-first closure of ``seeds`` under ``moves`` (default: all terms).

    Returns sorted keys and the matching field rows.
    """
    budget = state_budget(budget)
    moves = cm.moves if moves is None else moves
    keys, rows = unique_rows(cm, np.asarray(seeds, dtype=np.int64))
    frontier = rows
    while frontier.shape[0]:
        found = []
        for mv in moves:
            out, ok = cm.apply_move(frontier, mv)
            if ok.any():
                found.append(out[ok])
        if not found:
            break
        cand_keys, cand = unique_rows(cm, np.concatenate(found))
        new = kernels.lookup(keys, cand_keys) < 0
        if not new.any():
            break
        frontier = cand[new]
        keys = np.concatenate([keys, cand_keys[new]])
        rows = np.concatenate([rows, frontier])
        order = np.argsort(keys, kind="stable")
        keys, rows = keys[order], rows[order]
        if keys.size > budget:
            raise BudgetExceeded(f"closure exceeded the state budget of {budget} (set GADGET_BUDGET)")
    return keys, rows


def assemble(cm: ConfigModel, keys: np.ndarray, rows: np.ndarray, moves=None,
             diag: bool = True) -> sp.csr_matrix:
    """Restricted Hamiltonian on the sorted basis ``keys``; errors if a term leaves it."""
    n = keys.size
    moves = cm.moves if moves is None else moves
    r_idx, c_idx, vals = [], [], []
    src = np.arange(n)
    for mv in moves:
        out, ok = cm.apply_move(rows, mv)
        if not ok.any():
            continue
        tgt = kernels.lookup(keys, cm.pack(out[ok]))
        if (tgt < 0).any():
            raise InvarianceError(f"move {mv.name} leaves the subspace")
        r_idx.append(tgt)
        c_idx.append(src[ok])
        vals.append(np.full(tgt.size, mv.coef))
    if diag:
        r_idx.append(src)
        c_idx.append(src)
        vals.append(cm.diagonal(rows))
    if not r_idx:
        return sp.csr_matrix((n, n))
    H = sp.coo_matrix((np.concatenate(vals), (np.concatenate(r_idx), np.concatenate(c_idx))),
                      shape=(n, n)).tocsr()
    H.sum_duplicates()
    return H


def apply_hamiltonian(cm: ConfigModel, rows: np.ndarray, vec: np.ndarray):
    """Direct term-by-term H|v> for a vector supported on arbitrary rows.

    Returns (sorted keys, rows, values) of the result; no basis is needed.
    """
    parts_f = [rows]
    parts_v = [cm.diagonal(rows) * vec]
    for mv in cm.moves:
        out, ok = cm.apply_move(rows, mv)
        if ok.any():
            parts_f.append(out[ok])
            parts_v.append(mv.coef * vec[ok])
    F = np.concatenate(parts_f)
    V = np.concatenate(parts_v)
    keys = cm.pack(F)
    ukeys, first, inv = np.unique(keys, return_index=True, return_inverse=True)
    if np.iscomplexobj(V):
        vals = np.bincount(inv, V.real, ukeys.size) + 1j * np.bincount(inv, V.imag, ukeys.size)
    else:
        vals = np.bincount(inv, V, ukeys.size)
    return ukeys, F[first], vals


def sparse_vector(cm: ConfigModel, rows: np.ndarray, vec: np.ndarray):
    """Sum duplicate rows; returns (sorted keys, rows, values)."""
    keys = cm.pack(rows)
    ukeys, first, inv = np.unique(keys, return_index=True, return_inverse=True)
    if np.iscomplexobj(vec):
        vals = np.bincount(inv, vec.real, ukeys.size) + 1j * np.bincount(inv, vec.imag, ukeys.size)
    else:
        vals = np.bincount(inv, vec, ukeys.size)
    return ukeys, rows[first], vals


def vector_distance(a, b) -> float:
    """Two-norm of the difference of two (keys, ..., values) sparse vectors."""
    ka, va = a[0], a[-1]
    kb, vb = b[0], b[-1]
    keys = np.union1d(ka, kb)
    x = np.zeros(keys.size, dtype=np.result_type(va, vb))
    y = np.zeros_like(x)
    x[np.searchsorted(keys, ka)] = va
    y[np.searchsorted(keys, kb)] = vb
    return float(np.linalg.norm(x - y))
