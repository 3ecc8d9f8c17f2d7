"""Signed X/Z tensor-product operators on a register of qubits.

An operator is stored as ``i**k * X^x * Z^z`` where ``x`` and ``z`` are bit
masks (plain Python ints, bit ``j`` = qubit ``j``) and ``k`` is the phase
exponent mod 4.  The X factors are written to the left of the Z factors, so
acting on a computational basis state ``|c>`` gives
``i**k * (-1)**popcount(z & c) * |c ^ x>``.

Qubit indices are opaque here; the lattice module decides what they mean.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliOperator:
    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("negative qubit count")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError("mask exceeds qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n)

    @classmethod
    def from_sites(cls, n: int, xs: Iterable[int] = (), zs: Iterable[int] = (),
                   phase: int = 0) -> "PauliOperator":
        """Build from site lists.  Repeated sites cancel pairwise."""
        x = z = 0
        for j in xs:
            x ^= 1 << _check_site(j, n)
        for j in zs:
            z ^= 1 << _check_site(j, n)
        return cls(n, x, z, phase)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0 and self.phase == 0

    @property
    def x_sites(self) -> list[int]:
        return _bits(self.x)

    @property
    def z_sites(self) -> list[int]:
        return _bits(self.z)

    @property
    def support(self) -> list[int]:
        return _bits(self.x | self.z)

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return multiply(self, other)

    def __str__(self) -> str:
        return render(self)

    def to_dense(self) -> np.ndarray:
        """Dense 2**n matrix.  Test oracle only; keep n small."""
        if self.n > 12:
            raise ValueError("dense form limited to 12 qubits")
        dim = 1 << self.n
        mat = np.zeros((dim, dim), dtype=complex)
        amp0 = 1j ** self.phase
        for c in range(dim):
            sign = -1 if _popcount(self.z & c) & 1 else 1
            mat[c ^ self.x, c] = amp0 * sign
        return mat


def _check_site(j: int, n: int) -> int:
    if not 0 <= j < n:
        raise IndexError(f"qubit {j} outside register of {n}")
    return j


def _bits(v: int) -> list[int]:
    out = []
    j = 0
    while v:
        if v & 1:
            out.append(j)
        v >>= 1
        j += 1
    return out


def _same_register(p: PauliOperator, q: PauliOperator) -> None:
    if p.n != q.n:
        raise ValueError(f"site count mismatch: {p.n} vs {q.n}")


def multiply(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    """Exact product ``p @ q``.

    Moving ``Z^{z_p}`` past ``X^{x_q}`` costs ``(-1)**|z_p & x_q|``.
    """
    _same_register(p, q)
    phase = p.phase + q.phase + 2 * _popcount(p.z & q.x)
    return PauliOperator(p.n, p.x ^ q.x, p.z ^ q.z, phase)


def product(ops: Iterable[PauliOperator], n: int | None = None) -> PauliOperator:
    ops = list(ops)
    if not ops:
        if n is None:
            raise ValueError("empty product needs a register size")
        return PauliOperator.identity(n)
    acc = ops[0]
    for op in ops[1:]:
        acc = multiply(acc, op)
    return acc


def commutes(p: PauliOperator, q: PauliOperator) -> bool:
    _same_register(p, q)
    return (_popcount(p.x & q.z) + _popcount(p.z & q.x)) % 2 == 0


def apply_to_config(p: PauliOperator, config: int, n: int | None = None) -> tuple[int, complex]:
    """Act on basis state ``|config>``; returns the new config and its amplitude."""
    if n is not None and n != p.n:
        raise ValueError(f"config has {n} sites, operator has {p.n}")
    if config < 0 or config >> p.n:
        raise ValueError("config exceeds register")
    sign = -1 if _popcount(p.z & config) & 1 else 1
    return config ^ p.x, (1j ** p.phase) * sign


def render(p: PauliOperator) -> str:
    """Canonical text form, e.g. ``+ X{0,3} Z{1}`` or ``-i I``."""
    parts = [_PHASE_TEXT[p.phase]]
    if p.x:
        parts.append("X{" + ",".join(map(str, p.x_sites)) + "}")
    if p.z:
        parts.append("Z{" + ",".join(map(str, p.z_sites)) + "}")
    if not (p.x or p.z):
        parts.append("I")
    return " ".join(parts)


def parse(text: str, n: int) -> PauliOperator:
    """Inverse of :func:`render`."""
    tokens = text.split()
    if not tokens:
        raise ValueError("empty operator text")
    inv = {v: k for k, v in _PHASE_TEXT.items()}
    if tokens[0] not in inv:
        raise ValueError(f"bad phase token {tokens[0]!r}")
    phase = inv[tokens[0]]
    xs: list[int] = []
    zs: list[int] = []
    for tok in tokens[1:]:
        if tok == "I":
            continue
        if len(tok) < 3 or tok[1] != "{" or tok[-1] != "}" or tok[0] not in "XZ":
            raise ValueError(f"bad factor token {tok!r}")
        sites = [int(s) for s in tok[2:-1].split(",") if s]
        (xs if tok[0] == "X" else zs).extend(sites)
    return PauliOperator.from_sites(n, xs, zs, phase)
