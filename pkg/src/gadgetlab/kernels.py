"""Hot loops of the configuration-space engine.

Every kernel exists twice: a numba ``@njit`` version and a plain numpy
version with identical results.  ``GADGET_NUMBA=0`` in the environment (or a
missing numba install) selects the numpy path at import time;
:func:`use_backend` switches at runtime, mainly for tests and benchmarks.

Configurations are rows of a small-integer field array (one column per
gadget spin / qubit / qudit).  A row is packed into an int64 key with a
mixed-radix weight vector so that sets of configurations can be sorted and
searched.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def _numba_requested() -> bool:
    return os.environ.get("GADGET_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


# ---------------------------------------------------------------- numpy path

def pack_numpy(fields: np.ndarray, weights: np.ndarray) -> np.ndarray:
    keys = np.zeros(fields.shape[0], dtype=np.int64)
    for c in range(fields.shape[1]):
        keys += fields[:, c].astype(np.int64) * weights[c]
    return keys


def unpack_numpy(keys: np.ndarray, radices: np.ndarray) -> np.ndarray:
    out = np.empty((keys.shape[0], radices.shape[0]), dtype=np.int64)
    rem = keys.copy()
    for c in range(radices.shape[0]):
        rem, out[:, c] = np.divmod(rem, radices[c])
    return out


def apply_branches_numpy(fields, cond_field, cond_value, cond_ptr, act_field, act_table, act_ptr):
    """Apply a move made of mutually exclusive branches.

    Branch ``b`` fires on rows where ``fields[:, cond_field[k]] == cond_value[k]``
    for all ``k`` in ``cond_ptr[b]:cond_ptr[b+1]``; it then maps column
    ``act_field[a]`` through permutation row ``act_table[a]`` for its actions.
    Returns ``(new_fields, fired)`` where ``fired[r]`` is the branch index or -1.
    """
    n = fields.shape[0]
    out = fields.copy()
    fired = np.full(n, -1, dtype=np.int64)
    for b in range(len(cond_ptr) - 1):
        mask = np.ones(n, dtype=bool)
        for k in range(cond_ptr[b], cond_ptr[b + 1]):
            mask &= fields[:, cond_field[k]] == cond_value[k]
        if not mask.any():
            continue
        if (fired[mask] >= 0).any():
            raise ValueError("move branches overlap")
        fired[mask] = b
        for a in range(act_ptr[b], act_ptr[b + 1]):
            col = act_field[a]
            out[mask, col] = act_table[a][fields[mask, col]]
    return out, fired


def lookup_numpy(sorted_keys: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Positions of ``query`` in ``sorted_keys``; -1 where absent."""
    if sorted_keys.size == 0:
        return np.full(query.shape[0], -1, dtype=np.int64)
    pos = np.searchsorted(sorted_keys, query)
    pos_c = np.minimum(pos, sorted_keys.size - 1)
    hit = sorted_keys[pos_c] == query
    return np.where(hit, pos_c, -1).astype(np.int64)


def parity_numpy(fields: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Sum mod 2 of the selected binary columns, per row."""
    return (fields[:, cols].sum(axis=1) & 1).astype(np.int64)


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:
    @njit(cache=True)
    def _pack_nb(fields, weights):
        n, f = fields.shape
        keys = np.zeros(n, dtype=np.int64)
        for r in range(n):
            acc = 0
            for c in range(f):
                acc += fields[r, c] * weights[c]
            keys[r] = acc
        return keys

    @njit(cache=True)
    def _unpack_nb(keys, radices):
        n = keys.shape[0]
        f = radices.shape[0]
        out = np.empty((n, f), dtype=np.int64)
        for r in range(n):
            rem = keys[r]
            for c in range(f):
                out[r, c] = rem % radices[c]
                rem //= radices[c]
        return out

    @njit(cache=True)
    def _apply_branches_nb(fields, cond_field, cond_value, cond_ptr, act_field, act_table, act_ptr):
        n, f = fields.shape
        out = fields.copy()
        fired = np.full(n, -1, dtype=np.int64)
        nb = cond_ptr.shape[0] - 1
        overlap = False
        for r in range(n):
            for b in range(nb):
                ok = True
                for k in range(cond_ptr[b], cond_ptr[b + 1]):
                    if fields[r, cond_field[k]] != cond_value[k]:
                        ok = False
                        break
                if not ok:
                    continue
                if fired[r] >= 0:
                    overlap = True
                    continue
                fired[r] = b
                for a in range(act_ptr[b], act_ptr[b + 1]):
                    col = act_field[a]
                    out[r, col] = act_table[a, fields[r, col]]
        return out, fired, overlap

    @njit(cache=True)
    def _lookup_nb(sorted_keys, query):
        n = query.shape[0]
        m = sorted_keys.shape[0]
        out = np.full(n, -1, dtype=np.int64)
        for r in range(n):
            lo = 0
            hi = m
            q = query[r]
            while lo < hi:
                mid = (lo + hi) >> 1
                if sorted_keys[mid] < q:
                    lo = mid + 1
                else:
                    hi = mid
            if lo < m and sorted_keys[lo] == q:
                out[r] = lo
        return out

    @njit(cache=True)
    def _parity_nb(fields, cols):
        n = fields.shape[0]
        out = np.zeros(n, dtype=np.int64)
        for r in range(n):
            acc = 0
            for c in cols:
                acc += fields[r, c]
            out[r] = acc & 1
        return out


def _apply_branches_numba(fields, cond_field, cond_value, cond_ptr, act_field, act_table, act_ptr):
    out, fired, overlap = _apply_branches_nb(fields, cond_field, cond_value, cond_ptr,
                                             act_field, act_table, act_ptr)
    if overlap:
        raise ValueError("move branches overlap")
    return out, fired


_BACKENDS = {
    "numpy": {"pack": pack_numpy, "unpack": unpack_numpy, "apply_branches": apply_branches_numpy,
              "lookup": lookup_numpy, "parity": parity_numpy},
}
if HAVE_NUMBA:
    _BACKENDS["numba"] = {"pack": _pack_nb, "unpack": _unpack_nb,
                          "apply_branches": _apply_branches_numba,
                          "lookup": _lookup_nb, "parity": _parity_nb}

_active = "numba" if (HAVE_NUMBA and _numba_requested()) else "numpy"


def backend() -> str:
    return _active


def use_backend(name: str) -> str:
    """Switch kernels; returns the previous backend name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable (have {sorted(_BACKENDS)})")
    prev, _active = _active, name
    return prev


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def _as_i64(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.int64)


def pack(fields, weights) -> np.ndarray:
    return _BACKENDS[_active]["pack"](_as_i64(fields), _as_i64(weights))


def unpack(keys, radices) -> np.ndarray:
    return _BACKENDS[_active]["unpack"](_as_i64(keys), _as_i64(radices))


def apply_branches(fields, cond_field, cond_value, cond_ptr, act_field, act_table, act_ptr):
    return _BACKENDS[_active]["apply_branches"](
        _as_i64(fields), _as_i64(cond_field), _as_i64(cond_value), _as_i64(cond_ptr),
        _as_i64(act_field), _as_i64(act_table), _as_i64(act_ptr))


def lookup(sorted_keys, query) -> np.ndarray:
    return _BACKENDS[_active]["lookup"](_as_i64(sorted_keys), _as_i64(query))


def parity(fields, cols) -> np.ndarray:
    return _BACKENDS[_active]["parity"](_as_i64(fields), _as_i64(cols))
