"""Independent reference solutions and assumption estimators.

Everything here is deliberately decoupled from the primal-dual iteration so
it can serve as an oracle against which the solver and the rate certificate
are validated: an analytic per-coordinate solve of the power-flow family, a
brute-force grid solve for low dimensions, sampled estimators for the
declared regularity constants, and a generator of random instances with an
exactly known optimal pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.optimize

from .problem import (
    AffineConstraint,
    ProblemSpec,
    QuadraticConstraint,
    StructuredProblem,
    eval_constraints,
    eval_objective,
    power_flow_problem,
)
from .solver import KktResidual, kkt_residual

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class ReferenceSolution:
    x_star: np.ndarray
    lambda_star: np.ndarray
    method: str  # "analytic" | "grid" | "projected-gradient-refined"
    residual: KktResidual

    @property
    def stacked_norm(self) -> float:
        return float(np.sqrt(self.x_star @ self.x_star + self.lambda_star @ self.lambda_star))


def solve_powerflow_analytic(S, p_v, rho: float = 0.1, box_halfwidth: float = 200.0) -> ReferenceSolution:
    """Closed-form optimum of the power-flow dispatch family.

    When ``p_v_i > sqrt(S_i)`` the capacity constraint binds for every bus:
    ``p_i* = sqrt(S_i)``, ``q_i* = 0`` and the capacity multiplier is
    ``(p_v_i - sqrt(S_i)) / sqrt(S_i)``; the box multipliers vanish.  Falls
    back to the grid oracle when the precondition fails.
    """
    S = np.asarray(S, dtype=float)
    p_v = np.asarray(p_v, dtype=float)
    n = S.shape[0]
    prob = power_flow_problem(S, p_v, box_halfwidth=box_halfwidth)
    spec = prob.to_spec()
    if np.any(p_v <= np.sqrt(S)):
        return grid_solve(spec, (prob.lo, prob.hi), rho=rho)
    root_S = np.sqrt(S)
    x_star = np.concatenate([root_S, np.zeros(n)])
    lam_star = np.concatenate([(p_v - root_S) / root_S, np.zeros(2 * n)])
    res = kkt_residual(spec, x_star, lam_star, rho)
    if res.max() > 1e-10:
        raise RuntimeError(f"analytic solution failed its KKT check: {res.max():.3g}")
    return ReferenceSolution(x_star=x_star, lambda_star=lam_star, method="analytic", residual=res)


def grid_solve(
    p: ProblemSpec,
    box: Tuple[np.ndarray, np.ndarray],
    resolution: int = 101,
    rho: float = 1.0,
    feas_tol: float = 1e-9,
    active_tol: float = 1e-5,
) -> ReferenceSolution:
    """Brute-force oracle: exhaustive feasible-grid minimization plus polish.

    Exponential in the dimension; restricted to n <= 3.  Multipliers are
    recovered by a nonnegative least-squares stationarity fit over the
    constraints that are nearly active at the polished point.
    """
    if p.n > 3:
        raise ValueError("grid_solve is restricted to n <= 3")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    lo, hi = np.asarray(box[0], dtype=float), np.asarray(box[1], dtype=float)
    axes = [np.linspace(lo[j], hi[j], resolution) for j in range(p.n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)

    best_val = np.inf
    best_x = None
    for x in points:
        g, _ = eval_constraints(p, x)
        # grid points rarely sit exactly on the boundary; accept a loose
        # margin here, the polish step restores strict feasibility
        if np.max(g) > max(feas_tol, 1e-3):
            continue
        val, _ = eval_objective(p, x)
        if val < best_val:
            best_val = val
            best_x = x
    if best_x is None:
        raise RuntimeError("no feasible grid point found")

    cons = [
        {
            "type": "ineq",
            "fun": lambda x, i=i: -p.constraints[i](x)[0],
            "jac": lambda x, i=i: -p.constraints[i](x)[1],
        }
        for i in range(p.m)
    ]
    sol = scipy.optimize.minimize(
        lambda x: eval_objective(p, x)[0],
        best_x,
        jac=lambda x: eval_objective(p, x)[1],
        constraints=cons,
        method="SLSQP",
        options={"ftol": 1e-14, "maxiter": 500},
    )
    x_star = np.asarray(sol.x, dtype=float)

    g, jac = eval_constraints(p, x_star)
    _, grad_f = eval_objective(p, x_star)
    near_active = np.nonzero(np.abs(g) <= active_tol)[0]
    lam_star = np.zeros(p.m)
    if len(near_active):
        lam_act, _ = scipy.optimize.nnls(jac[near_active].T, -grad_f)
        lam_star[near_active] = lam_act
    res = kkt_residual(p, x_star, lam_star, rho)
    return ReferenceSolution(x_star=x_star, lambda_star=lam_star, method="grid", residual=res)


def estimate_mu(p: ProblemSpec, x_star, samples: int = 1000, radius: float = 1.0, seed: int = 0) -> float:
    """Sampled minimum of the quadratic-gradient-growth ratio around x*.

    An upper estimate of the true growth parameter (a minimum over a finite
    sample can only overestimate the infimum).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    x_star = p.check_x(x_star)
    rng = np.random.default_rng(seed)
    _, grad_star = eval_objective(p, x_star)
    best = np.inf
    for _ in range(samples):
        u = rng.standard_normal(p.n)
        u /= np.linalg.norm(u)
        x = x_star + radius * rng.uniform(1e-3, 1.0) * u
        _, grad = eval_objective(p, x)
        diff = x - x_star
        best = min(best, float((grad - grad_star) @ diff / (diff @ diff)))
    return best


def estimate_smoothness(p: ProblemSpec, box, samples: int = 500, seed: int = 0):
    """Sampled Lipschitz ratios and gradient norms over the box.

    Returns ``(l_est, [(L_gi_est, B_gi_est)])``; these are lower estimates
    of the true constants (a maximum over a finite sample can only
    underestimate the supremum).
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    lo, hi = np.asarray(box[0], dtype=float), np.asarray(box[1], dtype=float)
    rng = np.random.default_rng(seed)
    xs = rng.uniform(lo, hi, size=(samples, p.n))
    ys = rng.uniform(lo, hi, size=(samples, p.n))

    l_est = 0.0
    L_est = np.zeros(p.m)
    B_est = np.zeros(p.m)
    for x, y in zip(xs, ys):
        _, gx = eval_objective(p, x)
        _, gy = eval_objective(p, y)
        dist = np.linalg.norm(x - y)
        if dist > 0:
            l_est = max(l_est, float(np.linalg.norm(gx - gy) / dist))
        _, jx = eval_constraints(p, x)
        _, jy = eval_constraints(p, y)
        B_est = np.maximum(B_est, np.linalg.norm(jx, axis=1))
        B_est = np.maximum(B_est, np.linalg.norm(jy, axis=1))
        if dist > 0:
            L_est = np.maximum(L_est, np.linalg.norm(jx - jy, axis=1) / dist)
    return l_est, [(float(L), float(B)) for L, B in zip(L_est, B_est)]


def random_kkt_instance(
    seed: int,
    n_range: Tuple[int, int] = (2, 4),
    m_range: Tuple[int, int] = (2, 4),
    box_halfwidth: float = 3.0,
) -> Tuple[StructuredProblem, ProblemSpec, ReferenceSolution]:
    """Random structured problem with an exactly known KKT pair.

    The optimal point, active constraints and multipliers are drawn first;
    the objective's linear term is then chosen so stationarity holds at the
    drawn point.  Active constraint gradients are resampled until they are
    well conditioned (LICQ with margin).
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    m = int(rng.integers(m_range[0], m_range[1] + 1))
    n_active = int(rng.integers(1, min(n, m) + 1))

    x_star = rng.uniform(-1.0, 1.0, size=n)
    # SPD objective Hessian with eigenvalues in [0.8, 3]
    Qm = np.linalg.qr(rng.standard_normal((n, n)))[0]
    H = Qm @ np.diag(rng.uniform(0.8, 3.0, size=n)) @ Qm.T
    H = 0.5 * (H + H.T)

    for _ in range(100):
        grads = rng.standard_normal((n_active, n))
        grads /= np.linalg.norm(grads, axis=1, keepdims=True)
        gram = grads @ grads.T
        if np.linalg.eigvalsh(gram)[0] > 0.05:
            break
    else:
        raise RuntimeError("failed to draw well-conditioned active gradients")

    cons = []
    lam_star = np.zeros(m)
    for i in range(m):
        is_active = i < n_active
        if rng.random() < 0.5:
            # quadratic constraint with prescribed gradient at x_star
            Qc = np.linalg.qr(rng.standard_normal((n, n)))[0]
            A = Qc @ np.diag(rng.uniform(0.0, 1.0, size=n)) @ Qc.T
            A = 0.5 * (A + A.T)
            target = grads[i] if is_active else rng.standard_normal(n)
            b = target - A @ x_star
            value_at_star = 0.0 if is_active else -float(rng.uniform(0.3, 1.0))
            d = value_at_star - (0.5 * x_star @ (A @ x_star) + b @ x_star)
            cons.append(QuadraticConstraint(A=A, b=b, d=float(d)))
        else:
            a = grads[i] if is_active else rng.standard_normal(n)
            value_at_star = 0.0 if is_active else -float(rng.uniform(0.3, 1.0))
            beta = float(a @ x_star - value_at_star)
            cons.append(AffineConstraint(a=np.asarray(a, dtype=float), beta=beta))
        if is_active:
            lam_star[i] = rng.uniform(0.2, 1.0)

    grad_active = lam_star[:n_active] @ grads
    c = -(H @ x_star) - grad_active
    lo = x_star - box_halfwidth
    hi = x_star + box_halfwidth
    prob = StructuredProblem(H=H, c=c, r=0.0, constraints=tuple(cons), lo=lo, hi=hi)
    spec = prob.to_spec()
    res = kkt_residual(spec, x_star, lam_star, rho=1.0)
    if res.max() > RESIDUAL_TOL:
        raise RuntimeError(f"constructed pair fails KKT check: {res.max():.3g}")
    ref = ReferenceSolution(x_star=x_star, lambda_star=lam_star, method="analytic", residual=res)
    return prob, spec, ref
