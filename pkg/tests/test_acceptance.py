"""Acceptance suite: one test per headline guarantee of the package.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` or in
the captured output of a failing test) and then asserts, so the pytest
verdict per test is the criterion verdict.
"""

import filecmp
import json

import numpy as np
import pytest

from augpdg.bench import (
    BUS_LIMITS,
    ExperimentPlan,
    run_experiment,
    sample_initial,
)
from augpdg.certificate import build_certificate, q_delta_matrix, sym_eig_extremes
from augpdg.cli import main as cli_main
from augpdg.lagrangian import aug_value, grad_lambda, grad_x
from augpdg.oracle import (
    grid_solve,
    random_kkt_instance,
    solve_powerflow_analytic,
)
from augpdg.problem import eval_constraints, power_flow_problem
from augpdg.solver import SolverConfig, run


def _verdict(num: int, ok: bool, detail: str) -> None:
    print(f"[criterion {num}] {'PASS' if ok else 'FAIL'}: {detail}")


def test_criterion_1_multiplier_nonnegativity():
    """50 random problems, alpha = rho, 1000 steps: lambda_k >= 0 exactly."""
    rng = np.random.default_rng(1)
    failures = 0
    for seed in range(50):
        _, spec, ref = random_kkt_instance(seed, n_range=(2, 8), m_range=(2, 8))
        step_size = float(rng.uniform(0.005, 0.02))
        cfg = SolverConfig(alpha=step_size, rho=step_size, max_iters=1000, stop_tol=0.0)
        x0 = ref.x_star + rng.uniform(-1.0, 1.0, size=spec.n)
        lam0 = rng.uniform(0.0, 1.0, size=spec.m)
        trace = run(spec, cfg, x0, lam0)
        if trace.status == "diverged" or not np.all(trace.lams >= 0.0):
            failures += 1
    ok = failures == 0
    _verdict(1, ok, f"{50 - failures}/50 runs kept every multiplier iterate >= 0 exactly")
    assert ok


def test_criterion_2_kkt_pairs_are_equilibria():
    """KKT pairs are fixed points; 1e-2 perturbations move by > 1e-6."""
    cfg = SolverConfig(alpha=0.5, rho=1.0)
    rng = np.random.default_rng(2)
    max_fixed_move = 0.0
    min_perturbed_move = np.inf
    for seed in range(20):
        _, spec, ref = random_kkt_instance(seed)
        x, lam = ref.x_star, ref.lambda_star

        def one_step_move(x0, lam0):
            gx = grad_x(spec, x0, lam0, cfg.rho)
            gl = grad_lambda(spec, x0, lam0, cfg.rho)
            dx = -cfg.alpha * gx
            dl = cfg.alpha * gl
            return float(np.sqrt(dx @ dx + dl @ dl))

        max_fixed_move = max(max_fixed_move, one_step_move(x, lam))

        u = rng.standard_normal(spec.n + spec.m)
        u /= np.linalg.norm(u)
        x_p = x + 1e-2 * u[: spec.n]
        lam_p = lam + 1e-2 * np.abs(u[spec.n:])  # keep the dual point admissible
        min_perturbed_move = min(min_perturbed_move, one_step_move(x_p, lam_p))

    ok = max_fixed_move < 1e-12 and min_perturbed_move > 1e-6
    _verdict(
        2,
        ok,
        f"fixed-point move {max_fixed_move:.3g} < 1e-12 and perturbed move "
        f"{min_perturbed_move:.3g} > 1e-6 over 20 oracle pairs",
    )
    assert ok


def test_criterion_3_gradients_match_finite_differences():
    """grad_x / grad_lambda vs central differences at 1000 non-kink points."""
    h = 1e-6
    rho = 1.0
    worst = 0.0
    checked = 0
    rng = np.random.default_rng(3)
    for seed in range(100, 120):
        _, spec, ref = random_kkt_instance(seed)
        points = 0
        while points < 50:
            x = ref.x_star + rng.uniform(-1.0, 1.0, size=spec.n)
            lam = rng.uniform(0.0, 2.0, size=spec.m)
            g, _ = eval_constraints(spec, x)
            if np.min(np.abs(rho * g + lam)) < 1e-3:
                continue  # too close to a clamp kink for central differences
            points += 1
            checked += 1

            gx = grad_x(spec, x, lam, rho)
            fd_x = np.empty(spec.n)
            for j in range(spec.n):
                e = np.zeros(spec.n)
                e[j] = h
                fd_x[j] = (aug_value(spec, x + e, lam, rho)
                           - aug_value(spec, x - e, lam, rho)) / (2 * h)
            worst = max(worst, np.linalg.norm(fd_x - gx) / max(np.linalg.norm(gx), 1.0))

            gl = grad_lambda(spec, x, lam, rho)
            fd_l = np.empty(spec.m)
            for j in range(spec.m):
                e = np.zeros(spec.m)
                e[j] = h
                fd_l[j] = (aug_value(spec, x, lam + e, rho)
                           - aug_value(spec, x, lam - e, rho)) / (2 * h)
            worst = max(worst, np.linalg.norm(fd_l - gl) / max(np.linalg.norm(gl), 1.0))

    ok = checked == 1000 and worst < 1e-5
    _verdict(3, ok, f"max relative gradient error {worst:.3g} over {checked} points")
    assert ok


def test_criterion_4_benchmark_reproduction():
    """Power-flow experiment at rho = alpha = 0.1: 3 regimes x 10 seeds."""
    report = run_experiment(ExperimentPlan())
    base_norm = report.reference.stacked_norm

    converged = sum(r.status == "converged" for r in report.runs)
    terminal_ok = sum(
        r.status == "converged" and r.norm_dist[-1] * base_norm <= 1e-6
        for r in report.runs
    )
    monotone_ok = 0
    speedup_ok = 0
    for r in report.runs:
        if r.status != "converged":
            continue
        d = r.norm_dist[min(100, len(r.norm_dist) - 1):]
        if np.all(np.diff(d) <= 1e-12):
            monotone_ok += 1
        if r.late_rate < r.early_rate:
            speedup_ok += 1

    ok = (
        converged == 30
        and terminal_ok == 30
        and monotone_ok == 30
        and speedup_ok >= 28
    )
    _verdict(
        4,
        ok,
        f"{converged}/30 converged, {terminal_ok}/30 within 1e-6 of the analytic "
        f"optimum, {monotone_ok}/30 monotone after burn-in, {speedup_ok}/30 with "
        "late-phase contraction faster than early-phase",
    )
    assert ok


def test_criterion_5_certificate_envelope():
    """Error stays below C (1-gamma)^k d0^2 and V decays by (1-gamma) per step."""
    d0 = 0.5
    slack = 1.0 + 1e-9
    envelope_ok = True
    decay_ok = True
    for seed in range(10):
        _, spec, ref = random_kkt_instance(seed)
        cert = build_certificate(spec, ref.x_star, ref.lambda_star, rho=1.0, d0=d0)
        x0, lam0 = sample_initial(ref, d0, seed, spec.n, spec.m)
        cfg = SolverConfig(alpha=cert.alpha, rho=1.0, max_iters=2000, stop_tol=0.0)
        trace = run(
            spec, cfg, x0, lam0,
            reference=(ref.x_star, ref.lambda_star),
            lyapunov=(cert.jacobian, cert.delta),
        )
        env = cert.envelope(trace.ks)
        if not np.all(trace.dist_to_ref**2 <= env * slack):
            envelope_ok = False
        v = trace.lyapunov
        if not np.all(v[1:] <= (1.0 - cert.gamma) * v[:-1] * slack):
            decay_ok = False
    ok = envelope_ok and decay_ok
    _verdict(
        5,
        ok,
        f"envelope bound {'held' if envelope_ok else 'violated'} and per-step "
        f"Lyapunov decay {'held' if decay_ok else 'violated'} on 10 certified runs",
    )
    assert ok


def test_criterion_6_rate_degrades_with_radius():
    """Certificate gamma at d0 = 0.1 ||z*|| strictly exceeds gamma at 10 ||z*||."""
    S = np.asarray(BUS_LIMITS)
    prob = power_flow_problem(S, 4.0 * S)
    spec = prob.to_spec()
    ref = solve_powerflow_analytic(S, 4.0 * S)
    base = ref.stacked_norm
    cert_near = build_certificate(spec, ref.x_star, ref.lambda_star, rho=0.1, d0=0.1 * base)
    cert_far = build_certificate(spec, ref.x_star, ref.lambda_star, rho=0.1, d0=10.0 * base)
    ok = cert_near.gamma > cert_far.gamma
    _verdict(
        6,
        ok,
        f"gamma(0.1 d*) = {cert_near.gamma!r} vs gamma(10 d*) = {cert_far.gamma!r} "
        f"(pi* {cert_near.pi_star:.6f} vs {cert_far.pi_star:.6f})",
    )
    assert ok


def test_criterion_7_eigen_routine():
    """sym_eig_extremes vs the analytic spectrum of the coupled form."""
    rng = np.random.default_rng(7)
    worst_random = 0.0
    for _ in range(50):
        m = int(rng.integers(1, 21))
        n = int(rng.integers(1, 21))
        J = rng.standard_normal((m, n))
        sigma_max = np.linalg.svd(J, compute_uv=False)[0]
        delta = 0.9 / sigma_max
        lo, hi = sym_eig_extremes(q_delta_matrix(J, delta))
        worst_random = max(
            worst_random,
            abs(lo - (1.0 - delta * sigma_max)),
            abs(hi - (1.0 + delta * sigma_max)),
        )

    worst_hand = 0.0
    hand_cases = [
        (np.array([[2.0, 1.0], [1.0, 2.0]]), (1.0, 3.0)),
        (np.diag([2.0, 5.0, -1.0]), (-1.0, 5.0)),
        # tridiagonal (2, 1) matrix: eigenvalues 2 and 2 +- sqrt(2)
        (
            np.array([[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]]),
            (2.0 - np.sqrt(2.0), 2.0 + np.sqrt(2.0)),
        ),
    ]
    for M, (lo_true, hi_true) in hand_cases:
        lo, hi = sym_eig_extremes(M)
        worst_hand = max(worst_hand, abs(lo - lo_true), abs(hi - hi_true))

    ok = worst_random < 1e-8 and worst_hand < 1e-10
    _verdict(
        7,
        ok,
        f"max spectrum error {worst_random:.3g} on 50 random coupled forms, "
        f"{worst_hand:.3g} on hand-solved cases",
    )
    assert ok


def test_criterion_8_oracles_agree():
    """Grid and analytic power-flow oracles agree to 1e-6 on single-bus cases."""
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(10):
        S = float(rng.uniform(0.5, 3.0))
        p_v = float(np.sqrt(S) * rng.uniform(1.5, 4.0))
        analytic = solve_powerflow_analytic(np.array([S]), np.array([p_v]), box_halfwidth=10.0)
        prob = power_flow_problem(np.array([S]), np.array([p_v]), box_halfwidth=10.0)
        grid = grid_solve(prob.to_spec(), (prob.lo, prob.hi))
        worst = max(
            worst,
            float(np.max(np.abs(grid.x_star - analytic.x_star))),
            float(np.max(np.abs(grid.lambda_star - analytic.lambda_star))),
        )
    ok = worst < 1e-6
    _verdict(8, ok, f"max coordinate disagreement {worst:.3g} over 10 random cases")
    assert ok


def test_criterion_9_bench_determinism(tmp_path):
    """Two bench invocations with one master seed: byte-identical summaries."""
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    code_a = cli_main(["bench", "--seed", "123", "--out", str(out_a)])
    code_b = cli_main(["bench", "--seed", "123", "--out", str(out_b)])
    same_code = code_a == code_b
    same_bytes = filecmp.cmp(out_a / "summary.csv", out_b / "summary.csv", shallow=False)
    same_plot = filecmp.cmp(out_a / "plot_data.csv", out_b / "plot_data.csv", shallow=False)
    ok = same_code and same_bytes and same_plot
    _verdict(9, ok, "summary and plot files byte-identical across two invocations")
    assert ok
