"""Numba kernels against the numpy fallback.

Times the individual kernels on synthetic rows and a full subspace closure
plus assembly, and checks both backends return identical arrays.

    python benchmarks/bench_kernels.py [--repeat 5] [--rows 200000]
"""

import argparse
import time

import numpy as np

from gadgetlab import kernels
from gadgetlab.configspace import assemble, closure, config_model
from gadgetlab.lattice import TriangularLattice
from gadgetlab.model import ModelSpec, build_model, default_spec


def best_of(fn, repeat):
    out, best = None, np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def kernel_cases(cm, n_rows, rng):
    rows = rng.integers(0, cm.radices, size=(n_rows, cm.n_fields))
    keys = np.sort(cm.pack(rows))
    query = cm.pack(rng.integers(0, cm.radices, size=(n_rows, cm.n_fields)))
    move = cm.hop_moves[0][0]
    return {
        "pack": lambda: cm.pack(rows),
        "unpack": lambda: cm.unpack(keys),
        "lookup": lambda: kernels.lookup(keys, query),
        "apply_move": lambda: cm.apply_move(rows, move)[0],
    }


def pipeline_cases():
    out = {}
    for name, spec in [("toric 2x2", default_spec()),
                       ("triangular 2x2", ModelSpec(TriangularLattice(2, 2), "triangular", R=1.0))]:
        cm = config_model(build_model(spec))

        def run(cm=cm):
            keys, rows = closure(cm, cm.reference())
            H = assemble(cm, keys, rows)
            return np.concatenate([keys.astype(float), H.data])
        out[f"closure+assemble {name}"] = run
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--rows", type=int, default=200_000)
    args = ap.parse_args()
    backends = kernels.available_backends()
    if "numba" not in backends:
        print("numba unavailable; only the numpy path can be timed")
    cm = config_model(build_model(ModelSpec(TriangularLattice(2, 2), "triangular", R=1.0)))
    cases = {**kernel_cases(cm, args.rows, np.random.default_rng(0)), **pipeline_cases()}
    prev = kernels.backend()
    print(f"{'case':34s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup  same")
    try:
        for name, fn in cases.items():
            times, outs = {}, {}
            for b in backends:
                kernels.use_backend(b)
                fn()                        # warm-up, includes jit compilation
                times[b], outs[b] = best_of(fn, args.repeat)
            same = all(np.array_equal(outs[backends[0]], outs[b]) for b in backends)
            speed = times["numpy"] / times["numba"] if "numba" in times else 1.0
            print(f"{name:34s}" + "".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
                  + f"{speed:11.1f}x  {same}")
    finally:
        kernels.use_backend(prev)


if __name__ == "__main__":
    main()
