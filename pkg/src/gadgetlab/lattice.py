"""Square and triangular lattices with two qubit slots per edge.

Square lattice conventions
--------------------------
Stars sit at integer points ``(i, j)``, indexed row-major with ``i`` fastest.
``h(i, j)`` is the horizontal edge from ``(i, j)`` to ``(i+1, j)`` and carries
slots ``u`` (upper) and ``d`` (lower); ``v(i, j)`` runs from ``(i, j)`` to
``(i, j+1)`` and carries slots ``l`` and ``r``.  Plaquette ``p(i, j)`` has
lower-left corner ``(i, j)`` and owns the slot of each boundary edge that
faces it: ``h^u(i,j)``, ``v^l(i+1,j)``, ``h^d(i,j+1)``, ``v^r(i,j)``.

A non-periodic square lattice is an open patch: it keeps every edge touching
a star (so each star has its eight slots) but only edges/plaquettes whose
corners are all stars count as internal.  A 1x1 patch is the single-star
fixture used by the tests.

Triangular lattice conventions
------------------------------
Stars at ``(i, j)`` with unit translations ``u0 = (1, 0)``, ``u1 = (0, 1)``,
``u2 = (-1, 1)`` in lattice coordinates (60 and 120 degrees in the plane).
``e(s, k)`` joins ``s`` and ``s + u_k``.  Triangles are ``U(i, j)`` with
corners ``s, s+u0, s+u1`` and ``D(i, j)`` with corners ``s+u0, s+u0+u1,
s+u1``.  Each edge has slot 0 on its ``U`` side and slot 1 on its ``D`` side.

The six gadget corners of a star occupy its six surrounding triangles,
numbered clockwise starting from the wedge at 150 degrees::

    corner 0: U(i-1, j)    corner 3: D(i, j-1)
    corner 1: D(i-1, j)    corner 4: U(i, j-1)
    corner 2: U(i, j)      corner 5: D(i-1, j-1)

This is the labeling under which the published shield profiles match the
edge-term table exactly (checked by the test suite).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

SQUARE_ROLES = ("left", "right", "down", "up")
TRI_ROLES = ("+u0", "+u1", "+u2", "-u0", "-u1", "-u2")
TRI_STEPS = ((1, 0), (0, 1), (-1, 1))


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    kind: str           # 'h' / 'v' (square) or 'e0' / 'e1' / 'e2' (triangular)
    coord: tuple[int, int]
    tail: int           # star index, -1 if outside an open patch
    head: int

    @property
    def internal(self) -> bool:
        return self.tail >= 0 and self.head >= 0


@dataclass
class SquareLattice:
    Lx: int
    Ly: int
    periodic: bool = True
    kind: str = field(default="square", init=False)

    def __post_init__(self):
        if self.periodic and (self.Lx < 2 or self.Ly < 2):
            raise LatticeError(f"degenerate torus {self.Lx}x{self.Ly}: extents must be >= 2")
        if self.Lx < 1 or self.Ly < 1:
            raise LatticeError("extents must be positive")
        self.stars = [(i, j) for j in range(self.Ly) for i in range(self.Lx)]
        self._star_index = {c: k for k, c in enumerate(self.stars)}
        self.edges: list[Edge] = []
        self._edge_index: dict[tuple[str, int, int], int] = {}
        for (i, j) in self.stars:
            for key in (("h", i - 1, j), ("h", i, j), ("v", i, j - 1), ("v", i, j)):
                self._add_edge(*key)
        self.plaquettes = [(i, j) for j in range(self._pr(self.Ly)) for i in range(self._pr(self.Lx))
                           if self._plaquette_complete(i, j)]
        self._plaquette_index = {c: k for k, c in enumerate(self.plaquettes)}

    def _pr(self, L: int) -> int:
        return L if self.periodic else L - 1

    def _wrap(self, i: int, j: int) -> tuple[int, int]:
        if self.periodic:
            return i % self.Lx, j % self.Ly
        return i, j

    def _add_edge(self, kind: str, i: int, j: int) -> None:
        key = (kind, *self._wrap(i, j))
        if key in self._edge_index:
            return
        _, a, b = key
        tail = self.star_id(a, b, strict=False)
        head = self.star_id(*((a + 1, b) if kind == "h" else (a, b + 1)), strict=False)
        self._edge_index[key] = len(self.edges)
        self.edges.append(Edge(kind, (a, b), tail, head))

    def _plaquette_complete(self, i: int, j: int) -> bool:
        corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
        return all(self.star_id(*c, strict=False) >= 0 for c in corners)

    # ------------------------------------------------------------------ ids
    @property
    def n_stars(self) -> int:
        return len(self.stars)

    @property
    def n_qubits(self) -> int:
        return 2 * len(self.edges)

    @property
    def internal_edges(self) -> list[int]:
        return [k for k, e in enumerate(self.edges) if e.internal]

    def star_id(self, i: int, j: int, strict: bool = True) -> int:
        c = self._wrap(i, j)
        k = self._star_index.get(c, -1)
        if strict and k < 0:
            raise LatticeError(f"no star at {(i, j)}")
        return k

    def edge_id(self, kind: str, i: int, j: int) -> int:
        key = (kind, *self._wrap(i, j))
        if key not in self._edge_index:
            raise LatticeError(f"no edge {key}")
        return self._edge_index[key]

    def qubit(self, kind: str, i: int, j: int, slot: str) -> int:
        """Qubit index of slot ``u``/``d`` (h edges) or ``l``/``r`` (v edges)."""
        allowed = "ud" if kind == "h" else "lr"
        if slot not in allowed:
            raise LatticeError(f"slot {slot!r} invalid for {kind} edge")
        return 2 * self.edge_id(kind, i, j) + allowed.index(slot)

    def edge_qubits(self, e: int) -> tuple[int, int]:
        return 2 * e, 2 * e + 1

    def translate(self, s: int, dx: int, dy: int) -> int:
        i, j = self.stars[self._check_star(s)]
        return self.star_id(i + dx, j + dy, strict=False)

    def _check_star(self, s: int) -> int:
        if not 0 <= s < self.n_stars:
            raise LatticeError(f"invalid star id {s}")
        return s

    # ------------------------------------------------------------ geometry
    def incident(self, s: int) -> list[tuple[int, str]]:
        """The four edges at a star with roles left/right/down/up."""
        i, j = self.stars[self._check_star(s)]
        return [(self.edge_id("h", i - 1, j), "left"), (self.edge_id("h", i, j), "right"),
                (self.edge_id("v", i, j - 1), "down"), (self.edge_id("v", i, j), "up")]

    def star_qubits(self, s: int) -> list[int]:
        return [q for e, _ in self.incident(s) for q in self.edge_qubits(e)]

    def plaquette_qubits(self, p: int) -> list[int]:
        """Inner slots of a plaquette, counterclockwise from the bottom edge."""
        if not 0 <= p < len(self.plaquettes):
            raise LatticeError(f"invalid plaquette id {p}")
        i, j = self.plaquettes[p]
        return [self.qubit("h", i, j, "u"), self.qubit("v", i + 1, j, "l"),
                self.qubit("h", i, j + 1, "d"), self.qubit("v", i, j, "r")]

    def describe(self) -> dict:
        return {"kind": self.kind, "Lx": self.Lx, "Ly": self.Ly, "periodic": self.periodic}


@dataclass
class TriangularLattice:
    Lx: int
    Ly: int
    kind: str = field(default="triangular", init=False)
    periodic: bool = field(default=True, init=False)

    def __post_init__(self):
        if self.Lx < 2 or self.Ly < 2:
            raise LatticeError(f"degenerate torus {self.Lx}x{self.Ly}: extents must be >= 2")
        self.stars = [(i, j) for j in range(self.Ly) for i in range(self.Lx)]
        N = len(self.stars)
        self.edges = []
        for s, (i, j) in enumerate(self.stars):
            for k, (dx, dy) in enumerate(TRI_STEPS):
                self.edges.append(Edge(f"e{k}", (i, j), s, self.star_id(i + dx, j + dy)))
        # triangles: U(i,j) at index star_id, D(i,j) at N + star_id
        self.triangles = [("U", c) for c in self.stars] + [("D", c) for c in self.stars]
        assert len(self.edges) == 3 * N

    @property
    def n_stars(self) -> int:
        return len(self.stars)

    @property
    def n_qubits(self) -> int:
        return 2 * len(self.edges)

    @property
    def plaquettes(self):
        return self.triangles

    def star_id(self, i: int, j: int) -> int:
        return (i % self.Lx) + self.Lx * (j % self.Ly)

    def translate(self, s: int, k: int, sign: int = 1) -> int:
        i, j = self.stars[s]
        dx, dy = TRI_STEPS[k]
        return self.star_id(i + sign * dx, j + sign * dy)

    def edge_id(self, s: int, k: int) -> int:
        return 3 * s + k

    def qubit(self, e: int, slot: int) -> int:
        return 2 * e + slot

    def edge_qubits(self, e: int) -> tuple[int, int]:
        return 2 * e, 2 * e + 1

    def triangle_id(self, kind: str, i: int, j: int) -> int:
        return self.star_id(i, j) + (0 if kind == "U" else self.n_stars)

    def triangle_slots(self, t: int) -> list[int]:
        """The three inner slots of a triangle (one per edge)."""
        kind, (i, j) = self.triangles[t]
        if kind == "U":
            edges = [self.edge_id(self.star_id(i, j), 0), self.edge_id(self.star_id(i, j), 1),
                     self.edge_id(self.star_id(i + 1, j), 2)]
            return [self.qubit(e, 0) for e in edges]
        edges = [self.edge_id(self.star_id(i + 1, j), 1), self.edge_id(self.star_id(i, j + 1), 0),
                 self.edge_id(self.star_id(i + 1, j), 2)]
        return [self.qubit(e, 1) for e in edges]

    def plaquette_qubits(self, t: int) -> list[int]:
        return self.triangle_slots(t)

    def incident(self, s: int) -> list[tuple[int, str]]:
        """Six edges at a star, roles by direction from ``s``."""
        i, j = self.stars[s]
        out = [(self.edge_id(s, k), f"+u{k}") for k in range(3)]
        for k, (dx, dy) in enumerate(TRI_STEPS):
            out.append((self.edge_id(self.star_id(i - dx, j - dy), k), f"-u{k}"))
        return out

    def star_qubits(self, s: int) -> list[int]:
        return [q for e, _ in self.incident(s) for q in self.edge_qubits(e)]

    def corner_triangles(self, s: int) -> list[int]:
        i, j = self.stars[s]
        return [self.triangle_id("U", i - 1, j), self.triangle_id("D", i - 1, j),
                self.triangle_id("U", i, j), self.triangle_id("D", i, j - 1),
                self.triangle_id("U", i, j - 1), self.triangle_id("D", i - 1, j - 1)]

    def corner_slots(self, s: int, corner: int) -> list[int]:
        """The two slots of corner triangle ``corner`` lying on edges at ``s``."""
        t = self.corner_triangles(s)[corner]
        star_edges = {e for e, _ in self.incident(s)}
        slots = [q for q in self.triangle_slots(t) if q // 2 in star_edges]
        if len(slots) != 2:
            raise LatticeError(f"corner {corner} of star {s} does not touch two star edges")
        return slots

    def describe(self) -> dict:
        return {"kind": self.kind, "Lx": self.Lx, "Ly": self.Ly, "periodic": True}


def build_lattice(kind: str, Lx: int, Ly: int, periodic: bool = True):
    if kind == "square":
        return SquareLattice(Lx, Ly, periodic)
    if kind == "triangular":
        if not periodic:
            raise LatticeError("triangular lattice is torus-only")
        return TriangularLattice(Lx, Ly)
    raise LatticeError(f"unknown lattice kind {kind!r}")


def single_star_fixture() -> SquareLattice:
    """One star with its eight slots and no internal edges or plaquettes."""
    return SquareLattice(1, 1, periodic=False)


def iter_pairs(n: int) -> Iterator[tuple[int, int]]:
    for a in range(n):
        for b in range(a + 1, n):
            yield a, b
