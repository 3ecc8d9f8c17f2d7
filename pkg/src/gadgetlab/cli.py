"""Command-line front end.

    gadgetlab build     --config model.ini --out terms.json
    gadgetlab verify    --suite algebra|shield|invariance|unitary|excitation|all [--config model.ini]
    gadgetlab spectrum  [--config model.ini] --sector all|0..3|q:<i,j,...> --k 2
    gadgetlab certify   --params U,t,J,beta_lr,beta_du
    gadgetlab optimize  [--grid J=lo:hi:step,t=...,beta_lr=...,beta_du=...] [--landscape out.csv]

Every command prints (or writes with ``--report``) a versioned JSON report.
Exit status: 0 when every check passes, 1 when a check fails, 2 on usage,
configuration or budget errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .checks import SUITES, Check, _plain, run_suite, sector_spectra
from .config import ConfigError, load_config, render_config
from .configspace import BudgetExceeded, InvarianceError, config_model
from .model import ModelSpec, build_model, default_spec, dumps_termset, fingerprint

REPORT_SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _spec(args) -> ModelSpec:
    return load_config(args.config) if args.config else default_spec()


def _report(command, argv, spec: ModelSpec | None, checks: list[Check], results: dict, timings: dict) -> dict:
    rep = {
        "schema_version": REPORT_SCHEMA,
        "package_version": __version__,
        "command": command,
        "argv": list(argv),
        "checks": [c.to_dict() for c in checks],
        "passed": all(c.passed or c.informational for c in checks),
        "results": _plain(results),
        "timings": timings,
    }
    if spec is not None:
        rep["config"] = render_config(spec)
        rep["fingerprint"] = fingerprint(build_model(spec))
    return rep


# ------------------------------------------------------------ commands

def cmd_build(args):
    spec = _spec(args)
    t0 = time.perf_counter()
    ts = build_model(spec)
    text = dumps_termset(ts)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    results = {"n_qubits": ts.n_qubits, "shield_pairs": len(ts.shield_pairs), "out": args.out}
    return spec, [], results, {"build_s": time.perf_counter() - t0}


def cmd_verify(args):
    spec = _spec(args)
    suites = SUITES if args.suite == "all" else [args.suite]
    checks, timings = [], {}
    for s in suites:
        cs, dt = run_suite(s, spec)
        for c in cs:
            c.name = f"{s}: {c.name}"
        checks += cs
        timings[f"{s}_s"] = dt
    return spec, checks, {}, timings


def _parse_sector(text: str, n_qubits: int):
    if text == "all":
        return "logical", [0, 1, 2, 3]
    if text.isdigit():
        sec = int(text)
        if sec not in range(4):
            raise UsageError("logical sector must be 0..3")
        return "logical", [sec]
    if text.startswith("q:"):
        try:
            qs = [int(v) for v in text[2:].split(",") if v]
        except ValueError:
            raise UsageError(f"bad qubit list in sector {text!r}") from None
        if any(not 0 <= q < n_qubits for q in qs):
            raise UsageError(f"qubit index out of range 0..{n_qubits - 1}")
        d = np.zeros(n_qubits, dtype=np.int64)
        d[qs] = 1
        return "config", d
    raise UsageError(f"unrecognized sector {text!r} (use all, 0..3 or q:i,j,...)")


def cmd_spectrum(args):
    from .spectral import eigensolve, ground_info
    from .subspace import assemble_restricted, enumerate_subspace, export_matrix_market
    spec = _spec(args)
    if spec.variant == "quantum_double":
        raise UsageError("spectrum supports the toric and triangular variants")
    ts = build_model(spec)
    cm = config_model(ts)
    kind, what = _parse_sector(args.sector, ts.n_qubits)
    t0 = time.perf_counter()
    checks = []
    if kind == "logical":
        res = sector_spectra(cm, what, args.k, args.method, seed=args.seed)
        results = {"sectors": res}
        grounds = [v["eigenvalues"][0] for v in res.values()]
        if len(grounds) > 1:
            spread = max(grounds) - min(grounds)
            checks.append(Check("sector ground energies degenerate", spread <= 1e-10 * spec.U, spread,
                                1e-10 * spec.U, "independent eigensolves per sector"))
        worst = max(max(v["residuals"]) for v in res.values())
        checks.append(Check("eigenpair residuals", worst <= 1e-8, worst, 1e-8, "||Hv - Ev||"))
    else:
        basis = enumerate_subspace(cm, what, with_labels=False)
        H = assemble_restricted(basis)
        sp_ = eigensolve(H, min(args.k, basis.size), method=args.method, vectors=False, seed=args.seed)
        results = {"dim": basis.size, **sp_.to_dict()}
        worst = float(sp_.residuals.max())
        checks.append(Check("eigenpair residuals", worst <= 1e-8, worst, 1e-8, "||Hv - Ev||"))
        if args.k >= 2:
            try:
                e0, deg, gap = ground_info(sp_, scale=spec.U)
                results.update({"E0": e0, "degeneracy": deg, "gap": gap})
            except ValueError as exc:
                results["ground_info"] = str(exc)
        if args.export:
            export_matrix_market(H, args.export, comment=f"fingerprint {fingerprint(ts)}")
            results["export"] = args.export
    return spec, checks, results, {"spectrum_s": time.perf_counter() - t0}


def _parse_params(text: str):
    from .certify import GapParams
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--params needs five numbers, got {text!r}") from None
    if len(vals) != 5:
        raise UsageError("--params is U,t,J,beta_lr,beta_du")
    try:
        return GapParams(*vals)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_certify(args):
    from .certify import certify_refined, coarse_bound
    p = _parse_params(args.params)
    t0 = time.perf_counter()
    cert = certify_refined(p, target=args.target * p.U)
    coarse = coarse_bound(p.U, p.t, p.J)
    checks = [
        Check("vortex gap above half the target", cert.vortex_gap > args.target * p.U / 2, cert.vortex_gap,
              args.target * p.U / 2, "dense h_s eigenvalues"),
        Check("certified gap reaches target", cert.verdict, cert.certified_gap, args.target * p.U,
              "min(3 x per-star margin, intra bound)",
              detail={"inter": cert.inter_bound, "intra": cert.intra_bound,
                      "resolved_inter": cert.resolved_inter_bound}),
        Check("coarse three-star chain", coarse["verdict"], coarse["lower_bound"], -3 * p.U,
              "dense three-ring eigenvalue + exact chain enumeration", informational=True),
    ]
    return None, checks, {"certificate": cert.to_dict(), "coarse": coarse}, {"certify_s": time.perf_counter() - t0}


def _parse_grid(text: str | None) -> dict:
    if not text or text == "default":
        return {}
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"bad grid entry {part!r}")
        key, val = part.split("=", 1)
        key = key.strip()
        if key not in ("J", "t", "beta_lr", "beta_du"):
            raise UsageError(f"unknown grid axis {key!r}")
        try:
            nums = [float(v) for v in val.split(":")]
        except ValueError:
            raise UsageError(f"bad grid range {val!r}") from None
        if len(nums) == 1:
            out[key] = nums
        elif len(nums) == 3 and nums[2] > 0 and nums[1] >= nums[0]:
            out[key] = tuple(nums)
        else:
            raise UsageError(f"grid range must be value or lo:hi:step, got {val!r}")
    return out


def cmd_optimize(args):
    from .certify import REFERENCE_POINT, GapParams, certify_refined, optimize_params, within_one_step
    grid = _parse_grid(args.grid)
    t0 = time.perf_counter()
    res = optimize_params(grid)
    if args.landscape:
        res.write_csv(args.landscape)
    J, t, bl, bd = REFERENCE_POINT
    ref = certify_refined(GapParams(1.0, t, J, bl, bd), resolve=False).certified_gap
    checks = [Check("grid optimum at least the reference point", res.best_gap >= ref - 1e-12, res.best_gap, ref,
                    "exhaustive grid", informational=True),
              Check("reference point within one grid step of optimum",
                    within_one_step(res.best, GapParams(1.0, t, J, bl, bd), res.axes), True, True,
                    "grid geometry", informational=True)]
    results = {"best": vars(res.best), "best_gap": res.best_gap, "reference_gap": ref,
               "axes": {k: [float(v[0]), float(v[-1]), len(v)] for k, v in res.axes.items()},
               "landscape": args.landscape}
    return None, checks, results, {"optimize_s": time.perf_counter() - t0}


COMMANDS = {"build": cmd_build, "verify": cmd_verify, "spectrum": cmd_spectrum, "certify": cmd_certify,
            "optimize": cmd_optimize}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gadgetlab", description="Two-body gadget Hamiltonian workbench")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", help="write the JSON report here instead of stdout")
    common.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="serialize the term set")
    p.add_argument("--config", required=True)
    p.add_argument("--out")

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("--suite", required=True, choices=list(SUITES) + ["all"])
    p.add_argument("--config")

    p = sub.add_parser("spectrum", parents=[common], help="lowest energies of a subspace")
    p.add_argument("--config")
    p.add_argument("--sector", default="all")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--method", choices=["auto", "dense", "iterative"], default="auto")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--export", help="Matrix Market file for the restricted Hamiltonian (q: sectors)")

    p = sub.add_parser("certify", parents=[common], help="gap certificate at one parameter point")
    p.add_argument("--params", required=True, help="U,t,J,beta_lr,beta_du")
    p.add_argument("--target", type=float, default=0.075, help="target gap in units of U")

    p = sub.add_parser("optimize", parents=[common], help="grid search of the certified gap")
    p.add_argument("--grid", default="default")
    p.add_argument("--landscape", help="CSV output of every grid point")
    return ap


def _set_threads(n: int | None) -> None:
    if n is None:
        return
    if n < 1:
        raise UsageError("--threads must be positive")
    try:
        import numba
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    except ImportError:
        pass


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.command == "spectrum" and args.k < 1:
        print("gadgetlab: error: --k must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        _set_threads(args.threads)
        spec, checks, results, timings = COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"gadgetlab: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"gadgetlab: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"gadgetlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvarianceError as exc:
        print(f"gadgetlab: invariance violation: {exc}", file=sys.stderr)
        return EXIT_FAIL
    rep = _report(args.command, argv, spec, checks, results, timings)
    text = json.dumps(rep, indent=2, sort_keys=True, default=_plain)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    for c in checks:
        tag = "ok  " if c.passed else ("info" if c.informational else "FAIL")
        print(f"[{tag}] {c.name}: {c.measured}", file=sys.stderr)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


if __name__ == "__main__":          # pragma: no cover
    sys.exit(main())
