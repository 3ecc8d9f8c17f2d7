"""Lowest eigenpairs of real symmetric operators.

Two independent routes: dense ``numpy.linalg.eigh`` and a matrix-free
thick-restart Lanczos (Krylov-Schur form) with full reorthogonalization.
The iterative path is deterministic for a fixed seed; the start vector is
drawn from ``numpy.random.default_rng(seed)`` and can be passed through a
projector so the whole Krylov space stays inside a symmetry sector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

DENSE_LIMIT = 8192
DEGENERACY_TOL = 1e-9


class ConvergenceError(RuntimeError):
    pass


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residuals: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"eigenvalues": [float(v) for v in self.eigenvalues],
                "residuals": [float(r) for r in self.residuals], "solver": dict(self.meta)}


def _as_operator(matrix):
    if callable(matrix) and not hasattr(matrix, "shape"):
        raise TypeError("callable operators need an explicit dimension; use lanczos()")
    if sp.issparse(matrix):
        return matrix.tocsr()
    return np.asarray(matrix)


def check_symmetric(matrix, tol: float = 1e-12) -> None:
    if sp.issparse(matrix):
        d = abs(matrix - matrix.T)
        err = d.max() if d.nnz else 0.0
    else:
        err = np.abs(matrix - matrix.T).max() if matrix.size else 0.0
    scale = max(1.0, _norm_estimate(matrix))
    if err > tol * scale:
        raise ValueError(f"matrix is not symmetric (max asymmetry {err:.3g})")


def _norm_estimate(matrix) -> float:
    if sp.issparse(matrix):
        return float(abs(matrix).sum(axis=1).max()) if matrix.nnz else 0.0
    return float(np.abs(matrix).sum(axis=1).max()) if matrix.size else 0.0


def eigensolve(matrix, k: int = 1, method: str = "auto", tol: float = 1e-12, max_iter: int = 2000,
               seed: int = 0, vectors: bool = True, project: Callable | None = None,
               ncv: int | None = None) -> Spectrum:
    """k lowest eigenpairs of a real symmetric matrix (dense array or scipy sparse)."""
    A = _as_operator(matrix)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    check_symmetric(A)
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "iterative"
    norm = _norm_estimate(A)
    if method == "dense":
        dense = A.toarray() if sp.issparse(A) else A
        w, v = np.linalg.eigh(dense)
        w, v = w[:k], v[:, :k]
        res = np.linalg.norm(dense @ v - v * w, axis=0)
        return Spectrum(w, v if vectors else None, res, {"method": "dense", "dim": n, "norm": norm})
    if method != "iterative":
        raise ValueError(f"unknown method {method!r}")
    return deflated_lanczos(lambda x: A @ x, n, k, tol=tol, max_iter=max_iter, seed=seed,
                            vectors=vectors, project=project, ncv=ncv, norm=norm)


def deflated_lanczos(matvec, n: int, k: int = 1, tol: float = 1e-12, max_iter: int = 2000,
                     seed: int = 0, vectors: bool = True, project: Callable | None = None,
                     ncv: int | None = None, norm: float | None = None, max_rounds: int = 8) -> Spectrum:
    """Repeated Lanczos runs, each orthogonal to every pair found so far.

    A single Krylov sequence sees one copy of each degenerate level; fresh
    runs in the orthogonal complement pick up the missing copies.  Stops when
    a round finds nothing below the current k-th value.
    """
    found_w: list[float] = []
    found_v: list[np.ndarray] = []
    meta = {"method": "lanczos", "rounds": 0, "applies": 0, "dim": n, "seed": seed}
    for rnd in range(max_rounds):
        Q = np.array(found_v) if found_v else None

        def proj(x, Q=Q):
            if project is not None:
                x = project(x)
            if Q is not None:
                x = x - Q.T @ (Q @ x)
                x = x - Q.T @ (Q @ x)
            return x

        kk = min(k, n - len(found_v))
        if kk <= 0:
            break
        try:
            part = lanczos(matvec, n, kk, tol=tol, max_iter=max_iter, seed=seed + rnd, vectors=True,
                           project=proj, ncv=ncv, norm=norm)
        except (ValueError, ConvergenceError):
            if rnd == 0:
                raise
            break          # complement exhausted within the sector
        meta["rounds"] += 1
        meta["applies"] += part.meta["applies"]
        meta["ncv"] = part.meta["ncv"]
        kth = sorted(found_w)[k - 1] if len(found_w) >= k else np.inf
        scale = norm if norm else max(1.0, abs(float(part.eigenvalues[0])))
        new = part.eigenvalues < kth - tol * scale * 10
        if not new.any():
            break
        for i in np.flatnonzero(new):
            found_w.append(float(part.eigenvalues[i]))
            found_v.append(part.eigenvectors[:, i])
    order = np.argsort(found_w, kind="stable")[:k]
    w = np.array(found_w)[order]
    V = np.array(found_v)[order].T
    res = np.array([np.linalg.norm(matvec(V[:, i]) - w[i] * V[:, i]) for i in range(len(w))])
    if w.size < k:
        raise ConvergenceError(f"only {w.size} of {k} eigenpairs found")
    return Spectrum(w, V if vectors else None, res, meta)


def lanczos(matvec: Callable[[np.ndarray], np.ndarray], n: int, k: int = 1, tol: float = 1e-12,
            max_iter: int = 2000, seed: int = 0, vectors: bool = True, project: Callable | None = None,
            ncv: int | None = None, norm: float | None = None, v0: np.ndarray | None = None) -> Spectrum:
    """Thick-restart Lanczos for the k lowest eigenpairs.

    Convergence: every wanted Ritz pair has ``|b . y| <= tol * scale`` where
    ``scale`` is ``norm`` if given, else the largest Ritz value magnitude.
    ``max_iter`` caps the number of operator applications.
    """
    m = ncv or min(n, max(2 * k + 20, 40))
    m = min(m, n)
    if k > m:
        raise ValueError("k exceeds the Krylov dimension")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) if v0 is None else np.array(v0, dtype=float)
    if project is not None:
        v = project(v)
    nv = np.linalg.norm(v)
    if nv == 0:
        raise ValueError("start vector vanishes (empty symmetry sector?)")
    V = np.zeros((m + 1, n))
    V[0] = v / nv
    Hm = np.zeros((m + 1, m))
    start = 0
    applies = 0
    restarts = 0
    while True:
        for j in range(start, m):
            w = matvec(V[j])
            applies += 1
            if project is not None:
                w = project(w)
            h = V[:j + 1] @ w
            w -= V[:j + 1].T @ h
            h2 = V[:j + 1] @ w             # second Gram-Schmidt pass
            w -= V[:j + 1].T @ h2
            h += h2
            beta = np.linalg.norm(w)
            Hm[:j + 1, j] = h
            Hm[j + 1, j] = beta
            if beta < 1e-14 * max(1.0, abs(h[-1])):
                # invariant subspace found: the Ritz values are exact
                m_eff = j + 1
                T = 0.5 * (Hm[:m_eff, :m_eff] + Hm[:m_eff, :m_eff].T)
                theta, Y = np.linalg.eigh(T)
                if m_eff < k:
                    raise ConvergenceError(f"Krylov space closed at dimension {m_eff} < k={k}")
                return _finish(matvec, V[:m_eff], theta, Y, k, vectors,
                               {"method": "lanczos", "applies": applies, "restarts": restarts,
                                "ncv": m, "dim": n, "seed": seed, "exhausted": True})
            V[j + 1] = w / beta
        T = Hm[:m, :m]
        T = 0.5 * (T + T.T)
        theta, Y = np.linalg.eigh(T)
        b = Hm[m, :m]
        scale = norm if norm else max(1.0, float(np.abs(theta).max()))
        err = np.abs(b @ Y[:, :k])
        if np.all(err <= tol * scale):
            return _finish(matvec, V[:m], theta, Y, k, vectors,
                           {"method": "lanczos", "applies": applies, "restarts": restarts,
                            "ncv": m, "dim": n, "seed": seed})
        if applies >= max_iter:
            raise ConvergenceError(f"no convergence after {applies} operator applications "
                                   f"(worst Ritz residual {err.max():.3g})")
        keep = min(m - 1, max(k + (m - k) // 2, k + 1))
        Vk = Y[:, :keep].T @ V[:m]
        newH = np.zeros_like(Hm)
        newH[:keep, :keep] = np.diag(theta[:keep])
        newH[keep, :keep] = b @ Y[:, :keep]
        V[:keep] = Vk
        V[keep] = V[m]
        V[keep + 1:] = 0.0
        Hm = newH
        start = keep
        restarts += 1


def _finish(matvec, basis, theta, Y, k, vectors, meta) -> Spectrum:
    vecs = (Y[:, :k].T @ basis).T
    vecs /= np.linalg.norm(vecs, axis=0)
    res = np.array([np.linalg.norm(matvec(vecs[:, i]) - theta[i] * vecs[:, i]) for i in range(k)])
    return Spectrum(theta[:k].copy(), vecs if vectors else None, res, meta)


def ground_info(spec: Spectrum, degeneracy_tol: float = DEGENERACY_TOL, scale: float = 1.0):
    """(E0, degeneracy, gap) from an ascending spectrum."""
    ev = np.sort(np.asarray(spec.eigenvalues if isinstance(spec, Spectrum) else spec, dtype=float))
    if ev.size < 2:
        raise ValueError("need at least two levels to define a gap")
    e0 = float(ev[0])
    tol = degeneracy_tol * scale
    deg = int(np.count_nonzero(ev - e0 <= tol))
    if deg == ev.size:
        raise ValueError("all returned levels are degenerate; request more eigenvalues")
    return e0, deg, float(ev[deg] - e0)


def ring_hop(n: int, t: float) -> np.ndarray:
    h = np.zeros((n, n))
    for a in range(n):
        h[a, (a + 1) % n] = h[(a + 1) % n, a] = -t
    return h
