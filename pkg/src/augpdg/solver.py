"""The augmented primal-dual gradient iteration and its diagnostics.

One step performs a gradient descent move on the primal block and a clamped
gradient ascent move on the dual block, both evaluated at the current pair
(simultaneous Jacobi-style update):

    x_{k+1} = x_k - alpha * grad_x L(x_k, l_k)
    l_{k+1} = l_k + alpha * grad_l L(x_k, l_k)

The dual update is computed in the equivalent convex-combination form
``(1 - alpha/rho) l_k + (alpha/rho) [rho g(x_k) + l_k]_+`` so nonnegativity
of the multipliers is exact in floating point whenever ``alpha <= rho``.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import NumericError
from .lagrangian import project_nonneg
from .problem import ProblemSpec, eval_constraints, eval_objective

DIVERGENCE_GUARD = 1e12

TRACE_CSV_HEADER = "k,fixed_point_gap,stationarity,primal_infeas,complementarity,dist_to_ref,lyapunov"


@dataclass
class SolverConfig:
    """Stepsize alpha, penalty rho, iteration budget and stopping rule.

    The iteration is defined for any positive alpha, but multiplier
    nonnegativity requires ``alpha <= rho``; violating it produces a warning,
    not an error.
    """

    alpha: float
    rho: float
    max_iters: int = 100_000
    stop_tol: float = 1e-10
    record_every: int = 1

    def __post_init__(self):
        if self.alpha <= 0 or self.rho <= 0:
            raise ValueError("alpha and rho must be positive")
        if self.max_iters < 1 or self.record_every < 1:
            raise ValueError("max_iters and record_every must be >= 1")
        if self.stop_tol < 0:
            raise ValueError("stop_tol must be nonnegative")
        if self.alpha > self.rho:
            warnings.warn(
                f"alpha={self.alpha} exceeds rho={self.rho}; multiplier "
                "nonnegativity is no longer guaranteed",
                stacklevel=2,
            )


@dataclass
class IterateState:
    k: int
    x: np.ndarray
    lam: np.ndarray


@dataclass
class KktResidual:
    """Residuals that jointly vanish exactly at a KKT pair."""

    stationarity: float
    primal_infeas: float
    dual_infeas: float
    complementarity: float
    fixed_point_gap: float

    def max(self) -> float:
        return max(
            self.stationarity,
            self.primal_infeas,
            self.dual_infeas,
            self.complementarity,
            self.fixed_point_gap,
        )


@dataclass
class Trace:
    """Per-iteration record of a solver run.

    ``status`` is one of ``"converged"``, ``"max_iters"`` or ``"diverged"``;
    ``left_box`` flags whether any iterate left the problem's declared
    operating box (where the constraint constants were certified).
    """

    ks: np.ndarray
    xs: np.ndarray
    lams: np.ndarray
    fixed_point_gap: np.ndarray
    stationarity: np.ndarray
    primal_infeas: np.ndarray
    dual_infeas: np.ndarray
    complementarity: np.ndarray
    dist_to_ref: Optional[np.ndarray]
    lyapunov: Optional[np.ndarray]
    status: str
    left_box: bool = False
    diagnostic: str = ""

    @property
    def final_x(self) -> np.ndarray:
        return self.xs[-1]

    @property
    def final_lam(self) -> np.ndarray:
        return self.lams[-1]

    @property
    def iterations(self) -> int:
        return int(self.ks[-1])

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(TRACE_CSV_HEADER + "\n")
        for i, k in enumerate(self.ks):
            dist = repr(float(self.dist_to_ref[i])) if self.dist_to_ref is not None else ""
            lyap = repr(float(self.lyapunov[i])) if self.lyapunov is not None else ""
            out.write(
                f"{int(k)},{float(self.fixed_point_gap[i])!r},{float(self.stationarity[i])!r},"
                f"{float(self.primal_infeas[i])!r},{float(self.complementarity[i])!r},{dist},{lyap}\n"
            )
        return out.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())


def _residuals(grad_f, g, jac, lam, rho) -> KktResidual:
    clamped = project_nonneg(rho * g + lam)
    return KktResidual(
        stationarity=float(np.linalg.norm(grad_f + jac.T @ lam)),
        primal_infeas=float(np.max(project_nonneg(g), initial=0.0)),
        dual_infeas=float(np.max(project_nonneg(-lam), initial=0.0)),
        complementarity=float(np.max(np.abs(lam * g), initial=0.0)),
        fixed_point_gap=float(np.linalg.norm(lam - clamped)),
    )


def kkt_residual(p: ProblemSpec, x, lam, rho: float) -> KktResidual:
    """KKT residuals of the pair (x, lambda) at penalty rho."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (p.m,):
        raise ValueError(f"expected lambda of shape ({p.m},), got {lam.shape}")
    _, grad_f = eval_objective(p, x)
    g, jac = eval_constraints(p, x)
    return _residuals(grad_f, g, jac, lam, rho)


def _update(x, lam, grad_f, g, jac, alpha, rho):
    clamped = project_nonneg(rho * g + lam)
    x_next = x - alpha * (grad_f + jac.T @ clamped)
    t = alpha / rho
    lam_next = (1.0 - t) * lam + t * clamped
    return x_next, lam_next


def step(p: ProblemSpec, s: IterateState, c: SolverConfig) -> IterateState:
    """One simultaneous primal-descent / dual-ascent step."""
    x = p.check_x(s.x)
    lam = np.asarray(s.lam, dtype=float)
    _, grad_f = eval_objective(p, x)
    g, jac = eval_constraints(p, x)
    if not (np.all(np.isfinite(grad_f)) and np.all(np.isfinite(g)) and np.all(np.isfinite(jac))):
        raise NumericError("non-finite oracle value", iteration=s.k)
    x_next, lam_next = _update(x, lam, grad_f, g, jac, c.alpha, c.rho)
    return IterateState(k=s.k + 1, x=x_next, lam=lam_next)


def run(
    p: ProblemSpec,
    c: SolverConfig,
    x0,
    lambda0,
    reference: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    lyapunov: Optional[Tuple[np.ndarray, float]] = None,
) -> Trace:
    """Iterate until ``stationarity + fixed_point_gap <= stop_tol`` or budget.

    Parameters
    ----------
    reference : (x_star, lambda_star), optional
        When given, the stacked distance ``sqrt(||x-x*||^2 + ||l-l*||^2)``
        is recorded per entry.
    lyapunov : (J, delta), optional
        Jacobian at the reference and coupling weight; when given together
        with ``reference``, the cross-coupled quadratic-form value is
        recorded per entry.
    """
    x = p.check_x(x0)
    lam = np.asarray(lambda0, dtype=float)
    if lam.shape != (p.m,):
        raise ValueError(f"expected lambda0 of shape ({p.m},), got {lam.shape}")
    if np.any(lam < 0):
        raise ValueError("lambda0 must be componentwise nonnegative")
    if reference is not None:
        x_star = np.asarray(reference[0], dtype=float)
        lam_star = np.asarray(reference[1], dtype=float)
    if lyapunov is not None:
        J_ref, delta = np.asarray(lyapunov[0], dtype=float), float(lyapunov[1])

    ks: List[int] = []
    xs: List[np.ndarray] = []
    lams: List[np.ndarray] = []
    cols = {name: [] for name in
            ("fp", "stat", "prim", "dual", "comp", "dist", "lyap")}

    status = "max_iters"
    diagnostic = ""
    left_box = False
    k = 0

    def record(k, x, lam, res):
        ks.append(k)
        xs.append(x.copy())
        lams.append(lam.copy())
        cols["fp"].append(res.fixed_point_gap)
        cols["stat"].append(res.stationarity)
        cols["prim"].append(res.primal_infeas)
        cols["dual"].append(res.dual_infeas)
        cols["comp"].append(res.complementarity)
        if reference is not None:
            dx = x - x_star
            dl = lam - lam_star
            cols["dist"].append(float(np.sqrt(dx @ dx + dl @ dl)))
            if lyapunov is not None:
                cols["lyap"].append(float(dx @ dx + dl @ dl + 2.0 * delta * dl @ (J_ref @ dx)))

    while True:
        _, grad_f = eval_objective(p, x)
        g, jac = eval_constraints(p, x)
        finite = np.all(np.isfinite(grad_f)) and np.all(np.isfinite(g)) and np.all(np.isfinite(jac))
        if not finite:
            status = "diverged"
            diagnostic = f"non-finite oracle value at iteration {k}"
            break
        if not left_box and not p.in_box(x):
            left_box = True
        res = _residuals(grad_f, g, jac, lam, c.rho)
        if np.linalg.norm(x) > DIVERGENCE_GUARD or np.linalg.norm(lam) > DIVERGENCE_GUARD:
            status = "diverged"
            diagnostic = (
                f"iterate norm exceeded {DIVERGENCE_GUARD:g} at iteration {k}; "
                "the stepsize likely violates the admissible bound of the rate "
                "certificate (alpha_max)"
            )
            record(k, x, lam, res)
            break
        is_record_step = (k % c.record_every == 0)
        done = (res.stationarity + res.fixed_point_gap <= c.stop_tol) or (k >= c.max_iters)
        if is_record_step or done:
            record(k, x, lam, res)
        if done:
            status = "converged" if res.stationarity + res.fixed_point_gap <= c.stop_tol else "max_iters"
            break
        x, lam = _update(x, lam, grad_f, g, jac, c.alpha, c.rho)
        k += 1

    return Trace(
        ks=np.array(ks, dtype=int),
        xs=np.array(xs),
        lams=np.array(lams),
        fixed_point_gap=np.array(cols["fp"]),
        stationarity=np.array(cols["stat"]),
        primal_infeas=np.array(cols["prim"]),
        dual_infeas=np.array(cols["dual"]),
        complementarity=np.array(cols["comp"]),
        dist_to_ref=np.array(cols["dist"]) if reference is not None else None,
        lyapunov=np.array(cols["lyap"]) if (reference is not None and lyapunov is not None) else None,
        status=status,
        left_box=left_box,
        diagnostic=diagnostic,
    )
