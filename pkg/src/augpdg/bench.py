"""Benchmark harness: the n=10 power-flow experiment.

Builds the dispatch instance with S fixed to the ten stock bus limits
and p_v = 4 S, then runs the solver from randomly drawn initial pairs at
three initial-distance regimes (0.1, 5 and 10 times the reference norm),
ten seeds each, at rho = alpha = 0.1, and records normalized-distance
curves plus per-phase geometric contraction factors.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .oracle import ReferenceSolution, solve_powerflow_analytic
from .problem import ProblemSpec, StructuredProblem, power_flow_problem
from .solver import SolverConfig, kkt_residual, run

BUS_LIMITS = (2.7, 1.35, 2.7, 1.35, 2.025, 2.025, 2.7, 2.7, 1.35, 2.025)

SUMMARY_HEADER = "d0_multiplier,seed,iters,final_kkt,early_rate,late_rate,status"
PLOT_HEADER = "d0_multiplier,seed,k,norm_dist"


@dataclass(frozen=True)
class PowerFlowInstance:
    n: int
    S: np.ndarray
    p_v: np.ndarray
    problem: StructuredProblem
    spec: ProblemSpec


def build_instance(S, p_v=None, box_halfwidth: float = 200.0) -> PowerFlowInstance:
    S = np.asarray(S, dtype=float)
    p_v = 4.0 * S if p_v is None else np.asarray(p_v, dtype=float)
    prob = power_flow_problem(S, p_v, box_halfwidth=box_halfwidth)
    return PowerFlowInstance(n=S.shape[0], S=S, p_v=p_v, problem=prob, spec=prob.to_spec())


def build_default_instance() -> PowerFlowInstance:
    """The n = 10 instance with the stock bus limits and p_v = 4 S."""
    return build_instance(BUS_LIMITS)


def sample_initial(ref: ReferenceSolution, d0: float, seed: int, n: int, m: int):
    """Random (x0, lambda0) at exact stacked distance d0 from the reference.

    A uniform direction on the stacked unit sphere is scaled to d0 and added
    to the reference; the multiplier block is clamped to the nonnegative
    orthant (which can only shrink its deviation) and the primal block is
    rescaled so the stacked distance is restored exactly.
    """
    if d0 <= 0:
        raise ValueError("d0 must be positive")
    rng = np.random.default_rng(seed)
    for _ in range(100):
        u = rng.standard_normal(n + m)
        u /= np.linalg.norm(u)
        dx = d0 * u[:n]
        lam0 = np.maximum(ref.lambda_star + d0 * u[n:], 0.0)
        dl = lam0 - ref.lambda_star
        rem = d0**2 - dl @ dl
        nx = np.linalg.norm(dx)
        if rem < 0 or nx == 0.0:
            continue
        x0 = ref.x_star + (np.sqrt(rem) / nx) * dx
        return x0, lam0
    raise RuntimeError("failed to sample an initial pair at the requested distance")


@dataclass(frozen=True)
class ExperimentPlan:
    rho: float = 0.1
    alpha: float = 0.1
    d0_multipliers: Tuple[float, ...] = (0.1, 5.0, 10.0)
    seeds_per_case: int = 10
    max_iters: int = 20_000
    stop_tol: float = 1e-10
    master_seed: int = 0

    def __post_init__(self):
        mults = self.d0_multipliers
        if len(set(mults)) != len(mults) or any(m <= 0 for m in mults):
            raise ValueError("d0 multipliers must be positive and distinct")
        if self.seeds_per_case < 1:
            raise ValueError("seeds_per_case must be >= 1")


@dataclass
class RunRecord:
    d0_multiplier: float
    seed: int
    iters: int
    final_kkt: float
    early_rate: float
    late_rate: float
    status: str
    norm_dist: np.ndarray
    ks: np.ndarray


@dataclass
class ExperimentReport:
    plan: ExperimentPlan
    instance: PowerFlowInstance
    reference: ReferenceSolution
    runs: List[RunRecord]

    @property
    def all_converged(self) -> bool:
        return all(r.status == "converged" for r in self.runs)


def _phase_rates(dists: np.ndarray) -> Tuple[float, float]:
    """Geometric-mean per-step contraction over the first and last 10%."""
    K = len(dists) - 1
    if K < 2:
        return float("nan"), float("nan")
    w = max(1, K // 10)
    with np.errstate(divide="ignore"):
        early = (dists[w] / dists[0]) ** (1.0 / w)
        late = (dists[K] / dists[K - w]) ** (1.0 / w)
    return float(early), float(late)


def run_experiment(plan: ExperimentPlan, instance: Optional[PowerFlowInstance] = None) -> ExperimentReport:
    """Execute the full grid of (distance regime x seed) runs.

    Diverged runs are recorded with their status and the experiment
    continues.  Runs are reduced in (multiplier index, seed index) order so
    the report is deterministic for a fixed master seed.
    """
    inst = instance if instance is not None else build_default_instance()
    ref = solve_powerflow_analytic(inst.S, inst.p_v, rho=plan.rho)
    base_norm = ref.stacked_norm
    cfg = SolverConfig(
        alpha=plan.alpha,
        rho=plan.rho,
        max_iters=plan.max_iters,
        stop_tol=plan.stop_tol,
        record_every=1,
    )
    n, m = inst.spec.n, inst.spec.m
    runs: List[RunRecord] = []
    for mi, mult in enumerate(plan.d0_multipliers):
        d0 = mult * base_norm
        for si in range(plan.seeds_per_case):
            seed = int(np.random.SeedSequence([plan.master_seed, mi, si]).generate_state(1)[0])
            x0, lam0 = sample_initial(ref, d0, seed, n, m)
            trace = run(inst.spec, cfg, x0, lam0, reference=(ref.x_star, ref.lambda_star))
            dists = trace.dist_to_ref / base_norm
            early, late = _phase_rates(dists)
            final_kkt = kkt_residual(inst.spec, trace.final_x, trace.final_lam, plan.rho).max()
            runs.append(
                RunRecord(
                    d0_multiplier=mult,
                    seed=si,
                    iters=trace.iterations,
                    final_kkt=float(final_kkt),
                    early_rate=early,
                    late_rate=late,
                    status=trace.status,
                    norm_dist=dists,
                    ks=trace.ks,
                )
            )
    return ExperimentReport(plan=plan, instance=inst, reference=ref, runs=runs)


def summary_csv(report: ExperimentReport) -> str:
    lines = [SUMMARY_HEADER]
    for r in report.runs:
        lines.append(
            f"{r.d0_multiplier!r},{r.seed},{r.iters},{r.final_kkt!r},"
            f"{r.early_rate!r},{r.late_rate!r},{r.status}"
        )
    return "\n".join(lines) + "\n"


def write_report(report: ExperimentReport, outdir) -> None:
    """Write per-run curves, the summary table and the long-format plot data."""
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "summary.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(summary_csv(report))
    plot_lines = [PLOT_HEADER]
    for r in report.runs:
        name = f"run_m{r.d0_multiplier:g}_s{r.seed}.csv"
        with open(os.path.join(outdir, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("k,norm_dist\n")
            for k, d in zip(r.ks, r.norm_dist):
                fh.write(f"{int(k)},{float(d)!r}\n")
        for k, d in zip(r.ks, r.norm_dist):
            plot_lines.append(f"{r.d0_multiplier!r},{r.seed},{int(k)},{float(d)!r}")
    with open(os.path.join(outdir, "plot_data.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(plot_lines) + "\n")
