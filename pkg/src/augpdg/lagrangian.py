"""Augmented Lagrangian L(x, lambda) = f(x) + U_rho(x, lambda) and gradients.

The penalty term smooths the multiplier update through the componentwise
nonnegative clamp:

    U_rho(x, l) = sum_i ([rho g_i(x) + l_i]_+^2 - l_i^2) / (2 rho)

All evaluations are in double precision and the clamp compares exactly
against 0 (no tolerance); at a clamp kink the closed-form one-sided value is
returned.
"""

from __future__ import annotations

import numpy as np

from .problem import ProblemSpec, eval_constraints, eval_objective


def project_nonneg(v) -> np.ndarray:
    """Componentwise projection onto the nonnegative orthant."""
    return np.maximum(np.asarray(v, dtype=float), 0.0)


def _check_args(p: ProblemSpec, lam, rho: float) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (p.m,):
        raise ValueError(f"expected lambda of shape ({p.m},), got {lam.shape}")
    if rho <= 0:
        raise ValueError("rho must be positive")
    return lam


def aug_value(p: ProblemSpec, x, lam, rho: float) -> float:
    """Evaluate L(x, lambda) = f(x) + U_rho(x, lambda)."""
    lam = _check_args(p, lam, rho)
    fval, _ = eval_objective(p, x)
    g, _ = eval_constraints(p, x)
    clamped = project_nonneg(rho * g + lam)
    return fval + float(np.sum(clamped**2 - lam**2) / (2.0 * rho))


def grad_x(p: ProblemSpec, x, lam, rho: float) -> np.ndarray:
    """Primal gradient: grad f(x) + sum_i [rho g_i(x) + l_i]_+ grad g_i(x)."""
    lam = _check_args(p, lam, rho)
    _, grad_f = eval_objective(p, x)
    g, jac = eval_constraints(p, x)
    clamped = project_nonneg(rho * g + lam)
    return grad_f + jac.T @ clamped


def grad_lambda(p: ProblemSpec, x, lam, rho: float) -> np.ndarray:
    """Dual gradient: component i is ([rho g_i(x) + l_i]_+ - l_i) / rho."""
    lam = _check_args(p, lam, rho)
    g, _ = eval_constraints(p, x)
    return (project_nonneg(rho * g + lam) - lam) / rho
