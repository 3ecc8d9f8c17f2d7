"""Raw six-corner gadget of one triangular star.

Each corner i = 0..5 carries m in {0, 1, 2}.  The raising operator is a sum
of two branch types per corner:

    |2><1|_i (x) A_s(i)        and        |0><2|_i (x) |1><0|_{i+1}

The compact encoding used by the configuration engine keeps only the
single-particle sector (one corner nonzero) and labels it k = 2i + (m - 1).
This module works on all 3^6 corner states to check that the restriction
is exact.
"""

from __future__ import annotations

import itertools

import numpy as np

CORNERS = 6
LEVELS = 3


def corner_states() -> np.ndarray:
    return np.array(list(itertools.product(range(LEVELS), repeat=CORNERS)), dtype=np.int64)


def occupation(states: np.ndarray) -> np.ndarray:
    return np.count_nonzero(states, axis=-1)


def raise_branches(state):
    """All (new_state, corner, applies_flip) reached by one raising step."""
    out = []
    for i in range(CORNERS):
        if state[i] == 1:
            new = list(state)
            new[i] = 2
            out.append((tuple(new), i, True))
        j = (i + 1) % CORNERS
        if state[i] == 2 and state[j] == 0:
            new = list(state)
            new[i], new[j] = 0, 1
            out.append((tuple(new), i, False))
    return out


def occupation_violations() -> int:
    """Raising branches that change the corner occupation; zero means [H, n_s] = 0."""
    bad = 0
    for st in corner_states():
        n0 = int(np.count_nonzero(st))
        for new, _, _ in raise_branches(tuple(st)):
            bad += int(np.count_nonzero(new) != n0)
    return bad


def compact_label(state) -> int | None:
    """k = 2i + (m - 1) for single-particle states, else None."""
    nz = [i for i, m in enumerate(state) if m]
    if len(nz) != 1:
        return None
    i = nz[0]
    return 2 * i + state[i] - 1


def compact_sector_mismatches() -> int:
    """Single-particle raising must be exactly k -> k+1 (mod 12), flipping A_s(k/2) on even k."""
    bad = 0
    for st in corner_states():
        st = tuple(int(v) for v in st)
        k = compact_label(st)
        if k is None:
            continue
        moves = raise_branches(st)
        if len(moves) != 1:
            bad += 1
            continue
        new, corner, flip = moves[0]
        ok = compact_label(new) == (k + 1) % 12 and flip == (k % 2 == 0) and corner == k // 2
        bad += int(not ok)
    return bad
