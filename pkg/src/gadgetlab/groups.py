"""Finite groups by multiplication table, plus the qudit site operators.

Elements are integer indices with the identity at 0.  ``mult[a, b]`` is the
index of ``a*b``.  Preset element orderings:

* ``Z<n>``: element ``k`` is ``k mod n``.
* ``S3``: permutations of (0, 1, 2) in the order
  ``e, (01), (02), (12), (012), (021)``; composition is ``(a*b)(x) = a(b(x))``.
* ``D4``: ``r^k`` for k=0..3 at indices 0..3, then ``s r^k`` at 4..7, with
  ``r`` the quarter turn and ``s`` a reflection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np


class GroupError(ValueError):
    pass


@dataclass(frozen=True)
class GroupTable:
    name: str
    mult: np.ndarray
    generators: tuple[int, ...]
    inverse: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mult = np.asarray(self.mult, dtype=np.int64)
        object.__setattr__(self, "mult", mult)
        object.__setattr__(self, "generators", tuple(int(g) for g in self.generators))
        _validate_table(mult)
        inv = np.empty(len(mult), dtype=np.int64)
        for a in range(len(mult)):
            hits = np.flatnonzero(mult[a] == 0)
            if len(hits) != 1 or mult[hits[0], a] != 0:
                raise GroupError(f"element {a} has no two-sided inverse")
            inv[a] = hits[0]
        object.__setattr__(self, "inverse", inv)
        _validate_generators(mult, self.generators)

    @property
    def order(self) -> int:
        return len(self.mult)

    def mul(self, a: int, b: int) -> int:
        return int(self.mult[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def power(self, a: int, k: int) -> int:
        out = 0
        base = a if k >= 0 else self.inv(a)
        for _ in range(abs(k)):
            out = self.mul(out, base)
        return out

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mult, self.mult.T))

    def center(self) -> list[int]:
        return [c for c in range(self.order)
                if np.array_equal(self.mult[c, :], self.mult[:, c])]

    def closure(self, elements: Sequence[int]) -> set[int]:
        """Subgroup generated by ``elements`` (brute force)."""
        found = {0}
        frontier = [0]
        while frontier:
            nxt = []
            for a in frontier:
                for g in elements:
                    b = int(self.mult[a, g])
                    if b not in found:
                        found.add(b)
                        nxt.append(b)
            frontier = nxt
        return found

    def left_perm(self, g: int) -> np.ndarray:
        """Index map of L+^g: z -> g z."""
        return self.mult[g, :].copy()

    def right_inv_perm(self, g: int) -> np.ndarray:
        """Index map of L-^g: z -> z g^-1."""
        return self.mult[:, self.inverse[g]].copy()

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != 0:
            x = self.mul(x, g)
            k += 1
        return k

    def describe(self) -> dict[str, Any]:
        return {"name": self.name, "order": self.order,
                "generators": list(self.generators)}


def _validate_table(mult: np.ndarray) -> None:
    n = mult.shape[0]
    if mult.ndim != 2 or mult.shape != (n, n) or n == 0:
        raise GroupError("multiplication table must be square and non-empty")
    if mult.min() < 0 or mult.max() >= n:
        raise GroupError("table entries out of range")
    ar = np.arange(n)
    if not (np.array_equal(mult[0], ar) and np.array_equal(mult[:, 0], ar)):
        raise GroupError("element 0 must be the identity")
    for row in mult:
        if len(set(row.tolist())) != n:
            raise GroupError("table is not a Latin square")
    # (ab)c == a(bc) for every triple
    left = mult[mult[:, :, None], ar[None, None, :]]
    right = mult[ar[:, None, None], mult[None, :, :]]
    if not np.array_equal(left, right):
        raise GroupError("table is not associative")


def _validate_generators(mult: np.ndarray, gens: tuple[int, ...]) -> None:
    n = len(mult)
    if not gens:
        raise GroupError("generating set is empty")
    if len(set(gens)) != len(gens):
        raise GroupError("duplicate generator")
    if any(g < 0 or g >= n for g in gens):
        raise GroupError("generator index out of range")
    if 0 in gens:
        raise GroupError("identity may not be a generator")
    found = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = int(mult[a, g])
                if b not in found:
                    found.add(b)
                    nxt.append(b)
        frontier = nxt
    if len(found) != n:
        raise GroupError(f"generators {list(gens)} reach only {len(found)} of {n} elements")


def cyclic_table(n: int) -> np.ndarray:
    ar = np.arange(n)
    return (ar[:, None] + ar[None, :]) % n


_S3_ELEMENTS = [(0, 1, 2), (1, 0, 2), (2, 1, 0), (0, 2, 1), (1, 2, 0), (2, 0, 1)]


def _perm_table(elements: list[tuple[int, ...]]) -> np.ndarray:
    index = {p: k for k, p in enumerate(elements)}
    n = len(elements)
    mult = np.empty((n, n), dtype=np.int64)
    for a, pa in enumerate(elements):
        for b, pb in enumerate(elements):
            mult[a, b] = index[tuple(pa[pb[x]] for x in range(len(pa)))]
    return mult


def symmetric3_table() -> np.ndarray:
    return _perm_table(_S3_ELEMENTS)


def dihedral4_table() -> np.ndarray:
    # act on square corners 0..3; r: x -> x+1, s: x -> -x
    r = (1, 2, 3, 0)
    s = (0, 3, 2, 1)
    ident = (0, 1, 2, 3)

    def comp(a, b):
        return tuple(a[b[x]] for x in range(4))

    rots = [ident]
    for _ in range(3):
        rots.append(comp(r, rots[-1]))
    elements = rots + [comp(s, rk) for rk in rots]
    return _perm_table(elements)


PRESETS = {"S3": symmetric3_table, "D4": dihedral4_table}


def build_group(descriptor: str | dict, generators: Sequence[int] | None = None) -> GroupTable:
    """Build a validated group.

    ``descriptor`` is a preset name (``"Z2"``, ``"Z3"``, ..., ``"S3"``,
    ``"D4"``) or a dict ``{"table": [[...]], "generators": [...]}``.  The
    generating set is never inferred.
    """
    if isinstance(descriptor, dict):
        table = descriptor.get("table")
        if table is None:
            name = descriptor.get("preset")
            if name is None:
                raise GroupError("group descriptor needs 'preset' or 'table'")
            return build_group(name, descriptor.get("generators", generators))
        gens = descriptor.get("generators", generators)
        if gens is None:
            raise GroupError("explicit table needs a generator list")
        return GroupTable(descriptor.get("name", "custom"), np.asarray(table), tuple(gens))

    name = str(descriptor).strip()
    if generators is None:
        raise GroupError(f"group {name!r}: generating set must be given explicitly")
    if name.upper().startswith("Z") and name[1:].isdigit():
        n = int(name[1:])
        if n < 2:
            raise GroupError("cyclic group needs n >= 2")
        return GroupTable(f"Z{n}", cyclic_table(n), tuple(generators))
    key = name.upper()
    if key not in PRESETS:
        raise GroupError(f"unknown group preset {name!r}")
    return GroupTable(key, PRESETS[key](), tuple(generators))


@dataclass(frozen=True)
class SiteOps:
    """Dense |G|-dimensional site operators for a group."""

    group: GroupTable

    def _check(self, g: int) -> int:
        if not 0 <= g < self.group.order:
            raise IndexError(f"element {g} out of range for order {self.group.order}")
        return g

    def _perm_matrix(self, perm: np.ndarray) -> np.ndarray:
        n = self.group.order
        mat = np.zeros((n, n))
        mat[perm, np.arange(n)] = 1.0
        return mat

    def L_plus(self, g: int) -> np.ndarray:
        return self._perm_matrix(self.group.left_perm(self._check(g)))

    def L_minus(self, g: int) -> np.ndarray:
        return self._perm_matrix(self.group.right_inv_perm(self._check(g)))

    def T_plus(self, h: int) -> np.ndarray:
        mat = np.zeros((self.group.order,) * 2)
        mat[self._check(h), h] = 1.0
        return mat

    def T_minus(self, h: int) -> np.ndarray:
        hi = self.group.inv(self._check(h))
        mat = np.zeros((self.group.order,) * 2)
        mat[hi, hi] = 1.0
        return mat


def group_site_ops(group: GroupTable) -> SiteOps:
    return SiteOps(group)
