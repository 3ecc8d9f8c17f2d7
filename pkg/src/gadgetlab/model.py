"""Hamiltonian terms for the three gadget variants.

A :class:`TermSet` holds everything needed to write the Hamiltonian down:
stabilizers, the per-star hop schedule, shield pairs, logical strings and
the prefix products that make up the connecting unitary.  Builders validate
before returning, so a TermSet in hand is internally consistent.

Shield profiles are stored as vectors over a star's local gadget label
(``m`` in 0..3 for the square variants, the compact corner label ``k`` in
0..11 for the triangular one, see :mod:`gadgetlab.configspace`).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .groups import GroupTable
from .lattice import SquareLattice, TriangularLattice, LatticeError
from .pauli import PauliOperator, commutes, multiply, product, render

SCHEMA_VERSION = 1
VARIANTS = ("toric", "quantum_double", "triangular")
QD_SHIELDS = ("same", "vertical-inverse")

# square shield profiles indexed by m = lambda mod 4
T_LEFT = np.array([1, 1, -1, 1])
T_RIGHT = np.array([1, -1, -1, -1])
T_DOWN = np.array([1, -1, 1, 1])
T_UP = np.array([1, 1, 1, -1])
# alternative lower-star vertical profile; it breaks the shield tables (kept for comparison)
T_DOWN_ALT = np.array([1, 1, 1, -1])


def _tri_profile(minus_at=(), plus_at=()):
    """Profile over k = 2*corner + (m - 1).  ``plus_at`` marks a +1 spike."""
    if plus_at:
        v = -np.ones(12, dtype=np.int64)
        v[list(plus_at)] = 1
    else:
        v = np.ones(12, dtype=np.int64)
        v[list(minus_at)] = -1
    return v


# T_{-u_j}(s) (own factor for the edge toward s+u_j) and T_{u_j} (neighbour factor)
TRI_OWN = [_tri_profile(minus_at=(5, 6)), _tri_profile(minus_at=(3, 4)), _tri_profile(minus_at=(1, 2))]
TRI_NEIGHBOUR = [_tri_profile(plus_at=(0, 11)), _tri_profile(minus_at=(9, 10)), _tri_profile(minus_at=(7, 8))]


class ModelError(ValueError):
    pass


@dataclass
class ModelSpec:
    lattice: Any
    variant: str = "toric"
    U: float = 1.0
    t: float = 0.375
    J: float = 0.09
    R: float | None = None
    group: GroupTable | None = None
    logical_row: int = 0
    logical_col: int = 0
    qd_shield: str = "same"      # or "vertical-inverse": delta(g_s, g_s'^-1) on vertical pairs

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ModelError(f"unknown variant {self.variant!r}")
        for name in ("U", "t", "J"):
            if not getattr(self, name) > 0:
                raise ModelError(f"coupling {name} must be positive")
        if self.variant == "triangular":
            if not isinstance(self.lattice, TriangularLattice):
                raise ModelError("triangular variant needs a triangular lattice")
            if self.R is None or not self.R > 0:
                raise ModelError("triangular variant needs R > 0")
        else:
            if not isinstance(self.lattice, SquareLattice):
                raise ModelError(f"{self.variant} variant needs a square lattice")
            if self.R is not None:
                raise ModelError("R only applies to the triangular variant")
        if self.variant == "quantum_double" and self.group is None:
            raise ModelError("quantum double needs a group")
        if self.qd_shield not in QD_SHIELDS:
            raise ModelError(f"unknown quantum-double shield {self.qd_shield!r}")

    def couplings(self) -> dict:
        out = {"U": self.U, "t": self.t, "J": self.J}
        if self.R is not None:
            out["R"] = self.R
        return out


@dataclass(frozen=True)
class ShieldPair:
    edge: int
    star_a: int
    profile_a: tuple[int, ...]
    star_b: int
    profile_b: tuple[int, ...]
    coef: float
    group_delta: str = ""         # quantum double: "same" -> delta(g_a, g_b), "inverse" -> delta(g_a, g_b^-1)

    def __post_init__(self):
        object.__setattr__(self, "profile_a", tuple(int(v) for v in self.profile_a))
        object.__setattr__(self, "profile_b", tuple(int(v) for v in self.profile_b))


@dataclass
class TermSet:
    spec: ModelSpec
    n_qubits: int
    stars: list = field(default_factory=list)
    plaquettes: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    hop_schedule: list = field(default_factory=list)
    shield_pairs: list[ShieldPair] = field(default_factory=list)
    logicals: dict = field(default_factory=dict)
    connector: list = field(default_factory=list)
    # quantum double only: per star, per step, list of (slot, species) with species +1 = L+, -1 = L-
    qd_hops: list = field(default_factory=list)
    qd_plaquettes: list = field(default_factory=list)   # list of [(slot, power)]

    @property
    def lattice(self):
        return self.spec.lattice

    @property
    def variant(self) -> str:
        return self.spec.variant


# ------------------------------------------------------------------ toric

def build_modified_toric(lattice: SquareLattice) -> tuple[list, list, list]:
    """Star, plaquette and edge stabilizers of the two-slot toric code."""
    n = lattice.n_qubits
    stars = [PauliOperator.from_sites(n, xs=lattice.star_qubits(s)) for s in range(lattice.n_stars)]
    plaqs = [PauliOperator.from_sites(n, zs=lattice.plaquette_qubits(p))
             for p in range(len(lattice.plaquettes))]
    edges = [PauliOperator.from_sites(n, zs=lattice.edge_qubits(e)) for e in lattice.internal_edges]
    return stars, plaqs, edges


# (kind, di, dj, slot) for the two X factors of each step, relative to star (i, j)
DEFAULT_SCHEDULE = (
    (("h", -1, 0, "u"), ("v", 0, 0, "l")),
    (("h", 0, 0, "u"), ("v", 0, 0, "r")),
    (("h", 0, 0, "d"), ("v", 0, -1, "r")),
    (("h", -1, 0, "d"), ("v", 0, -1, "l")),
)


def schedule_slots(lattice: SquareLattice, s: int, schedule=DEFAULT_SCHEDULE) -> list[list[int]]:
    i, j = lattice.stars[s]
    return [[lattice.qubit(kind, i + di, j + dj, slot) for kind, di, dj, slot in step]
            for step in schedule]


def build_hop_schedule(lattice: SquareLattice, schedule=DEFAULT_SCHEDULE) -> list[list[PauliOperator]]:
    """Per-star two-X hop operators; validated against the star/plaquette algebra."""
    n = lattice.n_qubits
    hops = [[PauliOperator.from_sites(n, xs=slots) for slots in schedule_slots(lattice, s, schedule)]
            for s in range(lattice.n_stars)]
    stars, plaqs, _ = build_modified_toric(lattice)
    _check_schedule(hops, stars, plaqs)
    return hops


def _check_schedule(hops, stars, plaqs) -> None:
    for s, steps in enumerate(hops):
        for m, op in enumerate(steps):
            if op.z or len(op.x_sites) != 2:
                raise ModelError(f"hop ({s},{m}) is not a two-site X product")
            for p, bp in enumerate(plaqs):
                if not commutes(op, bp):
                    raise ModelError(f"hop ({s},{m}) anticommutes with plaquette {p}")
        if product(steps) != stars[s]:
            raise ModelError(f"hops of star {s} do not multiply to the star operator")


def prefix_products(steps: list[PauliOperator], n: int) -> list[PauliOperator]:
    """``P[m] = steps[0] ... steps[m-1]`` for m = 0..len(steps)."""
    out = [PauliOperator.identity(n)]
    for op in steps:
        out.append(multiply(out[-1], op))
    return out


def lambda_flip_mask(prefixes: list[PauliOperator], lam: int, stride: int = 1) -> int:
    """X mask applied to the qubits after ``lam`` hops of one star.

    ``stride`` is the number of walk steps per hop operator (2 for the
    triangular gadget, whose odd steps only move the gadget).
    """
    period = (len(prefixes) - 1) * stride
    full = prefixes[-1].x
    q, r = divmod(lam, period)
    return (full if q % 2 else 0) ^ prefixes[(r + stride - 1) // stride].x


def build_shield(lattice: SquareLattice, J: float, alt_down: bool = False) -> list[ShieldPair]:
    """Gadget-gadget terms J * T(m_s) T(m_s') on every internal edge."""
    down = T_DOWN_ALT if alt_down else T_DOWN
    out = []
    for e in lattice.internal_edges:
        edge = lattice.edges[e]
        if edge.kind == "h":
            out.append(ShieldPair(e, edge.tail, tuple(T_LEFT), edge.head, tuple(T_RIGHT), J))
        else:
            out.append(ShieldPair(e, edge.tail, tuple(down), edge.head, tuple(T_UP), J))
    return out


def build_logicals(lattice: SquareLattice, row: int = 0, col: int = 0) -> dict[str, PauliOperator]:
    n = lattice.n_qubits
    L = lattice
    z1 = PauliOperator.from_sites(n, zs=[L.qubit("h", i, row, "u") for i in range(L.Lx)])
    x1 = PauliOperator.from_sites(n, xs=[q for j in range(L.Ly) for q in L.edge_qubits(L.edge_id("h", col, j))])
    z2 = PauliOperator.from_sites(n, zs=[L.qubit("v", col, j, "l") for j in range(L.Ly)])
    x2 = PauliOperator.from_sites(n, xs=[q for i in range(L.Lx) for q in L.edge_qubits(L.edge_id("v", i, row))])
    return {"X1": x1, "Z1": z1, "X2": x2, "Z2": z2}


def _check_logicals(logicals: dict, stabilizers: list) -> None:
    for name, op in logicals.items():
        for k, st in enumerate(stabilizers):
            if not commutes(op, st):
                raise ModelError(f"logical {name} anticommutes with stabilizer {k}")
    for a in ("1", "2"):
        b = "2" if a == "1" else "1"
        if commutes(logicals["X" + a], logicals["Z" + a]):
            raise ModelError(f"X{a} and Z{a} commute")
        if not commutes(logicals["X" + a], logicals["Z" + b]):
            raise ModelError(f"X{a} and Z{b} anticommute")


def build_connector(hops: list[list[PauliOperator]], n: int) -> list[list[PauliOperator]]:
    """Per star, the prefix products that U_s applies on each gadget level."""
    return [prefix_products(steps, n)[:-1] for steps in hops]


def _toric_like(spec: ModelSpec) -> TermSet:
    L = spec.lattice
    stars, plaqs, edges = build_modified_toric(L)
    stabs = stars + plaqs + edges
    for a in range(len(stabs)):
        for b in range(a + 1, len(stabs)):
            if not commutes(stabs[a], stabs[b]):
                raise ModelError(f"stabilizers {a} and {b} anticommute")
    hops = build_hop_schedule(L)
    ts = TermSet(spec, L.n_qubits, stars, plaqs, edges, hops, build_shield(L, spec.J))
    if L.periodic:
        ts.logicals = build_logicals(L, spec.logical_row, spec.logical_col)
        _check_logicals(ts.logicals, stabs)
    ts.connector = build_connector(hops, L.n_qubits)
    _check_profiles(ts)
    return ts


def _check_profiles(ts: TermSet) -> None:
    """Edge signs along the hop walk must equal the shield profile products."""
    mism = shield_table_mismatches(ts)
    if mism:
        raise ModelError(f"shield profiles disagree with edge terms at {mism[:3]}")


def shield_tables(ts: TermSet, pair: ShieldPair):
    """(edge sign table, profile product table) over the two stars' labels.

    Labels run over a full period of the hop walk (8 for square, 24 for the
    triangular variant).  The edge sign is the Z.Z value of the edge after
    the two stars have hopped from the all-zero qubit state.
    """
    n = ts.n_qubits
    stride = 2 if ts.variant == "triangular" else 1
    period = 2 * stride * len(ts.hop_schedule[pair.star_a])
    pa = prefix_products(ts.hop_schedule[pair.star_a], n)
    pb = prefix_products(ts.hop_schedule[pair.star_b], n)
    q0, q1 = 2 * pair.edge, 2 * pair.edge + 1
    emask = (1 << q0) | (1 << q1)
    local = len(pair.profile_a)
    edge_tab = np.empty((period, period), dtype=np.int64)
    prof_tab = np.empty((period, period), dtype=np.int64)
    for la in range(period):
        ma = lambda_flip_mask(pa, la, stride)
        for lb in range(period):
            flips = ma ^ lambda_flip_mask(pb, lb, stride)
            bits = flips & emask
            edge_tab[la, lb] = -1 if bin(bits).count("1") % 2 else 1
            prof_tab[la, lb] = pair.profile_a[la % local] * pair.profile_b[lb % local]
    return edge_tab, prof_tab


def shield_table_mismatches(ts: TermSet) -> list[tuple[int, int, int]]:
    out = []
    for pair in ts.shield_pairs:
        et, pt = shield_tables(ts, pair)
        for la, lb in zip(*np.nonzero(et != pt)):
            out.append((pair.edge, int(la), int(lb)))
    return out


# --------------------------------------------------------- quantum double

# species of each step's two factors: +1 on the star's outgoing edges
QD_SPECIES = ((-1, +1), (+1, +1), (+1, -1), (-1, -1))


def build_quantum_double(spec: ModelSpec) -> TermSet:
    """Two-slot quantum double: qudit slot indices reuse the square layout."""
    L = spec.lattice
    ts = TermSet(spec, L.n_qubits)
    for s in range(L.n_stars):
        steps = schedule_slots(L, s)
        ts.qd_hops.append([list(zip(slots, QD_SPECIES[m])) for m, slots in enumerate(steps)])
    for p in range(len(L.plaquettes)):
        bottom, right, top, left = L.plaquette_qubits(p)
        ts.qd_plaquettes.append([(bottom, 1), (right, 1), (top, -1), (left, -1)])
    ts.edges = [tuple(L.edge_qubits(e)) for e in L.internal_edges]
    def delta(e):
        return "inverse" if spec.qd_shield == "vertical-inverse" and L.edges[e].kind == "v" else "same"
    ts.shield_pairs = [ShieldPair(sp.edge, sp.star_a, sp.profile_a, sp.star_b, sp.profile_b,
                                  spec.J, group_delta=delta(sp.edge)) for sp in build_shield(L, spec.J)]
    _check_qd(ts)
    return ts


def qd_star_action(ts: TermSet, s: int) -> dict[int, int]:
    """Slot -> species of the full star operator A^g_s."""
    out: dict[int, int] = {}
    for step in ts.qd_hops[s]:
        for slot, sp in step:
            if slot in out:
                raise ModelError(f"star {s} acts twice on slot {slot}")
            out[slot] = sp
    return out


def qd_apply(group: GroupTable, config: np.ndarray, factors, g: int) -> np.ndarray:
    out = np.array(config, copy=True)
    for slot, sp in factors:
        out[slot] = group.mul(g, out[slot]) if sp > 0 else group.mul(out[slot], group.inv(g))
    return out


def qd_plaquette_ok(group: GroupTable, config, plaq) -> bool:
    acc = 0
    for slot, power in plaq:
        z = int(config[slot])
        acc = group.mul(acc, z if power > 0 else group.inv(z))
    return acc == 0


def _check_qd(ts: TermSet) -> None:
    """Every hop step preserves every plaquette constraint (exhaustive on plaquette slots)."""
    G = ts.spec.group
    L = ts.lattice
    import itertools
    for s in range(L.n_stars):
        qd_star_action(ts, s)
        for m, step in enumerate(ts.qd_hops[s]):
            for p, plaq in enumerate(ts.qd_plaquettes):
                slots = [sl for sl, _ in plaq]
                touched = [f for f in step if f[0] in slots]
                if not touched:
                    continue
                for vals in itertools.product(range(G.order), repeat=4):
                    cfg = np.zeros(ts.n_qubits, dtype=np.int64)
                    cfg[slots] = vals
                    before = qd_plaquette_ok(G, cfg, plaq)
                    for g in range(G.order):
                        after = qd_plaquette_ok(G, qd_apply(G, cfg, touched, g), plaq)
                        if before != after:
                            raise ModelError(f"hop ({s},{m}) breaks plaquette {p} for element {g}")


# ------------------------------------------------------------- triangular

def build_triangular(spec: ModelSpec) -> TermSet:
    L: TriangularLattice = spec.lattice
    n = L.n_qubits
    stars = [PauliOperator.from_sites(n, xs=L.star_qubits(s)) for s in range(L.n_stars)]
    plaqs = [PauliOperator.from_sites(n, zs=L.triangle_slots(t)) for t in range(len(L.triangles))]
    edges = [PauliOperator.from_sites(n, zs=L.edge_qubits(e)) for e in range(len(L.edges))]
    stabs = stars + plaqs + edges
    for a in range(len(stabs)):
        for b in range(a + 1, len(stabs)):
            if not commutes(stabs[a], stabs[b]):
                raise ModelError(f"stabilizers {a} and {b} anticommute")
    hops = [[PauliOperator.from_sites(n, xs=L.corner_slots(s, i)) for i in range(6)]
            for s in range(L.n_stars)]
    _check_schedule(hops, stars, plaqs)
    shield = []
    for s in range(L.n_stars):
        for k in range(3):
            shield.append(ShieldPair(L.edge_id(s, k), s, tuple(TRI_OWN[k]),
                                     L.translate(s, k), tuple(TRI_NEIGHBOUR[k]), spec.J))
    ts = TermSet(spec, n, stars, plaqs, edges, hops, shield)
    ts.logicals = build_triangular_logicals(L, spec.logical_row, spec.logical_col)
    _check_logicals(ts.logicals, stabs)
    # connector level k applies the hops of corners below ceil(k/2)
    ts.connector = []
    for steps in hops:
        pref = prefix_products(steps, n)
        ts.connector.append([pref[(k + 1) // 2] for k in range(12)])
    _check_profiles(ts)
    return ts


def build_triangular_logicals(L: TriangularLattice, row: int = 0, col: int = 0) -> dict:
    n = L.n_qubits
    sid = L.star_id
    z1 = PauliOperator.from_sites(n, zs=[L.qubit(L.edge_id(sid(i, row), 0), 0) for i in range(L.Lx)])
    x1 = PauliOperator.from_sites(n, xs=[q for j in range(L.Ly)
                                         for e in (L.edge_id(sid(col, j), 0), L.edge_id(sid(col + 1, j), 2))
                                         for q in L.edge_qubits(e)])
    z2 = PauliOperator.from_sites(n, zs=[L.qubit(L.edge_id(sid(col, j), 1), 0) for j in range(L.Ly)])
    x2 = PauliOperator.from_sites(n, xs=[q for i in range(L.Lx)
                                         for e in (L.edge_id(sid(i, row), 1), L.edge_id(sid(i, row), 2))
                                         for q in L.edge_qubits(e)])
    return {"X1": x1, "Z1": z1, "X2": x2, "Z2": z2}


# ---------------------------------------------------------------- entry

def build_model(spec: ModelSpec) -> TermSet:
    if spec.variant == "toric":
        return _toric_like(spec)
    if spec.variant == "quantum_double":
        return build_quantum_double(spec)
    return build_triangular(spec)


def default_spec(Lx: int = 2, Ly: int = 2, **kw) -> ModelSpec:
    return ModelSpec(SquareLattice(Lx, Ly), **kw)


# ---------------------------------------------------------- serialization

def termset_to_dict(ts: TermSet) -> dict:
    spec = ts.spec
    out: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "variant": spec.variant,
        "lattice": spec.lattice.describe(),
        "couplings": spec.couplings(),
        "n_qubits": ts.n_qubits,
    }
    if spec.group is not None:
        out["group"] = spec.group.describe()
        out["group"]["table"] = spec.group.mult.tolist()
    if spec.variant == "quantum_double":
        out["hops"] = [[[list(f) for f in step] for step in steps] for steps in ts.qd_hops]
        out["plaquettes"] = [[list(f) for f in plaq] for plaq in ts.qd_plaquettes]
        out["edges"] = [list(e) for e in ts.edges]
    else:
        out["stars"] = [render(op) for op in ts.stars]
        out["plaquettes"] = [render(op) for op in ts.plaquettes]
        out["edges"] = [render(op) for op in ts.edges]
        out["hops"] = [[render(op) for op in steps] for steps in ts.hop_schedule]
        out["logicals"] = {k: render(v) for k, v in sorted(ts.logicals.items())}
    out["shield"] = [{"edge": p.edge, "stars": [p.star_a, p.star_b], "profiles": [list(p.profile_a), list(p.profile_b)],
                      "coef": p.coef, "group_delta": p.group_delta} for p in ts.shield_pairs]
    return out


def dumps_termset(ts: TermSet) -> str:
    return json.dumps(termset_to_dict(ts), sort_keys=True, separators=(",", ":"))


def fingerprint(ts: TermSet) -> str:
    return hashlib.sha256(dumps_termset(ts).encode()).hexdigest()[:16]


__all__ = [
    "ModelSpec", "TermSet", "ShieldPair", "ModelError", "LatticeError",
    "build_model", "build_modified_toric", "build_hop_schedule", "build_shield",
    "build_logicals", "build_connector", "build_quantum_double", "build_triangular",
    "shield_tables", "shield_table_mismatches", "termset_to_dict", "dumps_termset", "fingerprint",
]
