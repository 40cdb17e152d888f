"""Command-line front door.

Subcommands: ``solve`` a problem file, ``certify`` a solution, ``bench``
the power-flow experiment, ``check`` declared constants against sampled
estimates.  Progress goes to stderr; machine-readable artifacts only to
files under the output directory.

Exit codes: 0 success / convergence; 1 parse or usage failure; 2 iteration
budget exhausted (solve) or failed benchmark run; 3 divergence;
4 certificate failure (LICQ / nonpositive constant) or contradicted
declaration (check).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bench as bench_mod
from .certificate import build_certificate, format_report
from .errors import CertificateError, ProblemFormatError
from .oracle import estimate_mu, estimate_smoothness, grid_solve
from .problem import load_problem
from .solver import SolverConfig, run

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_MAX_ITERS = 2
EXIT_DIVERGED = 3
EXIT_CERTIFICATE = 4


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load(path):
    prob, declared = load_problem(path)
    return prob, prob.to_spec(declared)


def _reference(args, prob, spec, rho):
    if getattr(args, "reference", None):
        with open(args.reference, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return np.asarray(raw["x_star"], dtype=float), np.asarray(raw["lambda_star"], dtype=float)
    if spec.n <= 3:
        ref = grid_solve(spec, (prob.lo, prob.hi), rho=rho)
        return ref.x_star, ref.lambda_star
    raise ValueError(
        "no reference solution: pass --reference for problems with n > 3"
    )


def cmd_solve(args) -> int:
    prob, spec = _load(args.file)
    cfg = SolverConfig(
        alpha=args.alpha, rho=args.rho, max_iters=args.max_iters, stop_tol=args.stop_tol
    )
    rng = np.random.default_rng(args.seed)
    x0 = rng.uniform(prob.lo, prob.hi)
    lam0 = np.zeros(spec.m)
    trace = run(spec, cfg, x0, lam0)
    os.makedirs(args.out, exist_ok=True)
    trace.write_csv(os.path.join(args.out, "trace.csv"))
    from .solver import kkt_residual

    res = kkt_residual(spec, trace.final_x, trace.final_lam, args.rho)
    summary = {
        "status": trace.status,
        "iterations": trace.iterations,
        "x": list(trace.final_x),
        "lambda": list(trace.final_lam),
        "kkt": {
            "stationarity": res.stationarity,
            "primal_infeas": res.primal_infeas,
            "dual_infeas": res.dual_infeas,
            "complementarity": res.complementarity,
            "fixed_point_gap": res.fixed_point_gap,
        },
        "left_box": trace.left_box,
        "diagnostic": trace.diagnostic,
    }
    with open(os.path.join(args.out, "solution.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    _log(f"solve: {trace.status} after {trace.iterations} iterations")
    if trace.status == "converged":
        return EXIT_OK
    if trace.status == "diverged":
        _log(trace.diagnostic)
        return EXIT_DIVERGED
    return EXIT_MAX_ITERS


def cmd_certify(args) -> int:
    prob, spec = _load(args.file)
    x_star, lam_star = _reference(args, prob, spec, args.rho)
    d0 = args.d0 if args.d0 is not None else float(
        np.sqrt(x_star @ x_star + lam_star @ lam_star)
    )
    try:
        cert = build_certificate(
            spec, x_star, lam_star, rho=args.rho, d0=d0, safety=args.safety
        )
    except CertificateError as exc:
        _log(f"certify: {exc}")
        return EXIT_CERTIFICATE
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "certificate.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_report(cert))
    _log(f"certify: gamma = {cert.gamma!r}, alpha_max = {cert.alpha_max!r}")
    return EXIT_OK


def cmd_bench(args) -> int:
    plan = bench_mod.ExperimentPlan(
        rho=args.rho,
        alpha=args.alpha,
        max_iters=args.max_iters,
        stop_tol=args.stop_tol,
        master_seed=args.seed,
    )
    report = bench_mod.run_experiment(plan)
    bench_mod.write_report(report, args.out)
    bad = [r for r in report.runs if r.status != "converged"]
    _log(f"bench: {len(report.runs)} runs, {len(bad)} failed")
    return EXIT_OK if not bad else EXIT_MAX_ITERS


def cmd_check(args) -> int:
    prob, spec = _load(args.file)
    tol = 1e-9
    failures = []
    l_est, smooth_est = estimate_smoothness(
        spec, (prob.lo, prob.hi), samples=500, seed=args.seed
    )
    if l_est > spec.l_smooth * (1 + tol) + tol:
        failures.append(f"l_smooth declared {spec.l_smooth!r} but sampled ratio {l_est!r}")
    for i, ((L_dec, B_dec), (L_est, B_est)) in enumerate(
        zip(spec.constraint_smoothness, smooth_est)
    ):
        if L_est > L_dec * (1 + tol) + tol:
            failures.append(f"L_g[{i}] declared {L_dec!r} but sampled ratio {L_est!r}")
        if B_est > B_dec * (1 + tol) + tol:
            failures.append(f"B_g[{i}] declared {B_dec!r} but sampled norm {B_est!r}")
    if spec.n <= 3:
        ref = grid_solve(spec, (prob.lo, prob.hi), rho=args.rho)
        center = ref.x_star
    else:
        center = 0.5 * (prob.lo + prob.hi)
    mu_est = estimate_mu(spec, center, samples=2000, radius=1.0, seed=args.seed)
    if mu_est < spec.mu - tol:
        failures.append(f"mu declared {spec.mu!r} but sampled growth ratio {mu_est!r}")
    for line in failures:
        _log(f"check: CONTRADICTED: {line}")
    if not failures:
        _log("check: all declared constants consistent with sampled estimates")
    return EXIT_OK if not failures else EXIT_CERTIFICATE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="augpdg",
        description="Augmented primal-dual gradient solver and rate-certificate tool",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp, file_required=True):
        if file_required:
            sp.add_argument("file", help="problem file (JSON)")
        sp.add_argument("--alpha", type=float, default=0.1, help="stepsize")
        sp.add_argument("--rho", type=float, default=0.1, help="penalty parameter")
        sp.add_argument("--max-iters", type=int, default=20_000)
        sp.add_argument("--stop-tol", type=float, default=1e-10)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default="augpdg-out", help="output directory")

    sp = sub.add_parser("solve", help="run the solver on a problem file")
    common(sp)
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("certify", help="compute the linear-rate certificate")
    common(sp)
    sp.add_argument("--d0", type=float, default=None, help="initial-distance radius")
    sp.add_argument("--safety", type=float, default=0.9)
    sp.add_argument("--reference", default=None, help="JSON file with x_star/lambda_star")
    sp.set_defaults(fn=cmd_certify)

    sp = sub.add_parser("bench", help="run the power-flow benchmark")
    common(sp, file_required=False)
    sp.set_defaults(fn=cmd_bench)

    sp = sub.add_parser("check", help="validate declared constants by sampling")
    common(sp)
    sp.set_defaults(fn=cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ProblemFormatError as exc:
        _log(f"{args.subcommand}: {exc}")
        return EXIT_PARSE
    except FileNotFoundError as exc:
        _log(f"{args.subcommand}: {exc}")
        return EXIT_PARSE
    except ValueError as exc:
        _log(f"{args.subcommand}: {exc}")
        return EXIT_PARSE
    except CertificateError as exc:
        _log(f"{args.subcommand}: {exc}")
        return EXIT_CERTIFICATE


if __name__ == "__main__":
    raise SystemExit(main())
