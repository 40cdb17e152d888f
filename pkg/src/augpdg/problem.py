"""Problem definitions: oracle-based specs and structured quadratic instances.

A :class:`ProblemSpec` packages the objective/constraint oracles of the
inequality-constrained convex program

    minimize f(x)  subject to  g_i(x) <= 0,  i = 1..m,

together with the declared regularity constants (quadratic gradient growth
``mu``, objective smoothness ``l_smooth`` and per-constraint smoothness /
gradient bounds).  :class:`StructuredProblem` is the concrete class of
quadratic objectives with quadratic or affine constraints; its regularity
constants are derived over a user-declared bounded box.
"""

from __future__ import annotations

import json
import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import ProblemFormatError

Oracle = Callable[[np.ndarray], Tuple[float, np.ndarray]]


@dataclass(frozen=True)
class ProblemSpec:
    """Evaluable constrained problem with declared regularity constants.

    Parameters
    ----------
    n, m : int
        Primal dimension and number of inequality constraints.
    objective : callable
        ``x -> (f(x), grad f(x))``.
    constraints : sequence of callables
        Per-constraint oracles ``x -> (g_i(x), grad g_i(x))``.
    mu : float
        Quadratic gradient growth parameter of the objective.
    l_smooth : float
        Lipschitz constant of the objective gradient.
    constraint_smoothness : sequence of (L_gi, B_gi)
        Gradient Lipschitz constant and gradient norm bound per constraint,
        valid over the declared operating box.
    box : (lo, hi) arrays, optional
        Operating box over which the constraint constants were declared.
        Solver runs flag iterates that leave this box.
    constraint_block : callable, optional
        Fused evaluator ``x -> (values (m,), jacobian (m, n))``; used instead
        of the per-constraint loop when present (must agree with it).
    """

    n: int
    m: int
    objective: Oracle
    constraints: Tuple[Oracle, ...]
    mu: float
    l_smooth: float
    constraint_smoothness: Tuple[Tuple[float, float], ...]
    box: Optional[Tuple[np.ndarray, np.ndarray]] = None
    constraint_block: Optional[Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]] = None

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("need n >= 1 and m >= 1")
        if len(self.constraints) != self.m:
            raise ValueError("constraint oracle count != m")
        if len(self.constraint_smoothness) != self.m:
            raise ValueError("constraint_smoothness count != m")
        if not (self.mu > 0 and self.l_smooth > 0):
            raise ValueError("mu and l_smooth must be positive")
        for i, (L, B) in enumerate(self.constraint_smoothness):
            if L < 0 or B <= 0:
                raise ValueError(
                    f"constraint {i}: need L_g >= 0 and B_g > 0, got ({L}, {B})"
                )

    def check_x(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected x of shape ({self.n},), got {x.shape}")
        return x

    def in_box(self, x) -> bool:
        if self.box is None:
            return True
        lo, hi = self.box
        return bool(np.all(x >= lo) and np.all(x <= hi))


def eval_objective(p: ProblemSpec, x) -> Tuple[float, np.ndarray]:
    """Evaluate ``(f(x), grad f(x))``."""
    x = p.check_x(x)
    val, grad = p.objective(x)
    return float(val), np.asarray(grad, dtype=float)


def eval_constraints(p: ProblemSpec, x) -> Tuple[np.ndarray, np.ndarray]:
    """Evaluate all constraints: values ``(m,)`` and Jacobian ``(m, n)``.

    Row ``i`` of the Jacobian is ``grad g_i(x)``.
    """
    x = p.check_x(x)
    if p.constraint_block is not None:
        vals, jac = p.constraint_block(x)
        return np.asarray(vals, dtype=float), np.asarray(jac, dtype=float)
    vals = np.empty(p.m)
    jac = np.empty((p.m, p.n))
    for i, oracle in enumerate(p.constraints):
        gi, gradi = oracle(x)
        vals[i] = gi
        jac[i] = gradi
    return vals, jac


def finite_diff_check(p: ProblemSpec, x, h: float = 1e-5) -> dict:
    """Central-difference check of all gradient oracles at ``x``.

    Returns a dict with the per-oracle relative errors and their maximum.
    Relative error is measured against ``max(||grad||, 1)`` to stay defined
    at points with vanishing gradients.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = p.check_x(x)

    def central(fun, x):
        g = np.empty(p.n)
        for j in range(p.n):
            e = np.zeros(p.n)
            e[j] = h
            g[j] = (fun(x + e) - fun(x - e)) / (2 * h)
        return g

    _, grad_f = eval_objective(p, x)
    fd_f = central(lambda y: p.objective(y)[0], x)
    err_f = np.linalg.norm(fd_f - grad_f) / max(np.linalg.norm(grad_f), 1.0)

    errs_g = []
    _, jac = eval_constraints(p, x)
    for i, oracle in enumerate(p.constraints):
        fd = central(lambda y, i=i: p.constraints[i](y)[0], x)
        errs_g.append(np.linalg.norm(fd - jac[i]) / max(np.linalg.norm(jac[i]), 1.0))

    errs_g = np.array(errs_g) if errs_g else np.zeros(0)
    return {
        "objective_rel_error": float(err_f),
        "constraint_rel_errors": errs_g,
        "max_rel_error": float(max(err_f, errs_g.max() if len(errs_g) else 0.0)),
    }


# ---------------------------------------------------------------------------
# Structured quadratic instances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticConstraint:
    """g(x) = 0.5 x'Ax + b'x + d with A symmetric PSD."""

    A: np.ndarray
    b: np.ndarray
    d: float


@dataclass(frozen=True)
class AffineConstraint:
    """g(x) = a'x - beta."""

    a: np.ndarray
    beta: float


_PSD_TOL = 1e-10


def _check_psd(M: np.ndarray, name: str) -> None:
    if not np.allclose(M, M.T, atol=1e-12):
        raise ProblemFormatError(f"{name} is not symmetric")
    w = np.linalg.eigvalsh(M)
    scale = max(abs(w[-1]), 1.0)
    if w[0] < -_PSD_TOL * scale:
        raise ProblemFormatError(
            f"{name} is not positive semidefinite: eigenvalue {w[0]:.6g} < 0"
        )


@dataclass(frozen=True)
class StructuredProblem:
    """Quadratic objective with quadratic/affine inequality constraints.

    Objective is ``f(x) = 0.5 x'Hx + c'x + r`` with ``H`` symmetric PSD.
    Regularity constants are derived over the declared box ``[lo, hi]``:
    ``l_smooth = lambda_max(H)``, ``mu = lambda_min(H)``,
    ``L_gi = lambda_max(A_i)`` and ``B_gi = sup_box ||A_i x + b_i||``.
    """

    H: np.ndarray
    c: np.ndarray
    r: float
    constraints: Tuple[object, ...]
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        _check_psd(H, "H")
        for i, con in enumerate(self.constraints):
            if isinstance(con, QuadraticConstraint):
                _check_psd(np.asarray(con.A, dtype=float), f"A_{i}")
        if not np.all(self.hi > self.lo):
            raise ProblemFormatError("box must satisfy hi > lo componentwise")

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m(self) -> int:
        return len(self.constraints)

    def objective_value(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
        Hx = self.H @ x
        return 0.5 * x @ Hx + self.c @ x + self.r, Hx + self.c

    def constraint_arrays(self):
        """Stacked (A, B, d) tensors for fused evaluation.

        ``A`` is (m, n, n), ``B`` is (m, n) and ``d`` is (m,); affine
        constraints contribute a zero A slice.
        """
        m, n = self.m, self.n
        A = np.zeros((m, n, n))
        B = np.zeros((m, n))
        d = np.zeros(m)
        for i, con in enumerate(self.constraints):
            if isinstance(con, QuadraticConstraint):
                A[i] = con.A
                B[i] = con.b
                d[i] = con.d
            elif isinstance(con, AffineConstraint):
                B[i] = con.a
                d[i] = -con.beta
            else:
                raise TypeError(f"unknown constraint type: {type(con)!r}")
        return A, B, d

    def derived_constants(self):
        """(mu, l_smooth, [(L_gi, B_gi)]) valid over the declared box."""
        w = np.linalg.eigvalsh(self.H)
        mu, l_smooth = float(w[0]), float(w[-1])
        smooth = []
        for i, con in enumerate(self.constraints):
            if isinstance(con, AffineConstraint):
                smooth.append((0.0, float(np.linalg.norm(con.a))))
            else:
                L = float(np.linalg.eigvalsh(con.A)[-1])
                B = _sup_gradient_norm(con.A, con.b, self.lo, self.hi)
                smooth.append((L, B))
        return mu, l_smooth, smooth

    def to_spec(self, declared: Optional[dict] = None) -> ProblemSpec:
        """Build a :class:`ProblemSpec` with fused oracles.

        ``declared`` may override any of ``mu``, ``l_smooth`` and
        ``constraint_smoothness`` (e.g. for testing contradiction checks).
        """
        mu, l_smooth, smooth = self.derived_constants()
        if declared:
            mu = declared.get("mu", mu)
            l_smooth = declared.get("l_smooth", l_smooth)
            smooth = declared.get("constraint_smoothness", smooth)
        A, B, d = self.constraint_arrays()

        def block(x, A=A, B=B, d=d):
            Ax = A @ x                        # (m, n)
            vals = 0.5 * (Ax @ x) + B @ x + d
            return vals, Ax + B

        def one(i):
            def oracle(x, i=i):
                con = self.constraints[i]
                if isinstance(con, AffineConstraint):
                    return con.a @ x - con.beta, con.a.copy()
                Ax = con.A @ x
                return 0.5 * x @ Ax + con.b @ x + con.d, Ax + con.b
            return oracle

        return ProblemSpec(
            n=self.n,
            m=self.m,
            objective=self.objective_value,
            constraints=tuple(one(i) for i in range(self.m)),
            mu=mu,
            l_smooth=l_smooth,
            constraint_smoothness=tuple((float(L), float(Bg)) for L, Bg in smooth),
            box=(self.lo.copy(), self.hi.copy()),
            constraint_block=block,
        )


def _sup_gradient_norm(A, b, lo, hi, max_support=16):
    """sup over the box of ||A x + b||.

    The norm is convex in x, so the supremum sits at a box vertex.  Only
    coordinates in the support of A matter; if the support is too large the
    vertex enumeration is replaced by the safe bound ||A|| R + ||b|| with R
    the largest vertex norm.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    support = np.nonzero(np.any(A != 0.0, axis=0))[0]
    if len(support) > max_support:
        corners = np.where(np.abs(lo) > np.abs(hi), lo, hi)
        R = float(np.linalg.norm(corners))
        return float(np.linalg.norm(A, 2) * R + np.linalg.norm(b))
    best = float(np.linalg.norm(b))
    base = np.zeros(A.shape[1])
    for bits in itertools.product(*[(lo[j], hi[j]) for j in support]):
        x = base.copy()
        x[list(support)] = bits
        best = max(best, float(np.linalg.norm(A @ x + b)))
    return best


# ---------------------------------------------------------------------------
# Power-flow instance family (quadratic dispatch with per-bus capacity)
# ---------------------------------------------------------------------------

def power_flow_problem(S, p_v, box_halfwidth=200.0) -> StructuredProblem:
    """Quadratic dispatch problem over x = (p_1..p_n, q_1..q_n).

    Objective ``sum_i (p_i - p_v_i)^2 + q_i^2``; constraints
    ``p_i^2 + q_i^2 - S_i <= 0`` plus the box rows ``-p_i <= 0`` and
    ``p_i - p_v_i <= 0`` encoded as affine inequalities.
    """
    S = np.asarray(S, dtype=float)
    p_v = np.asarray(p_v, dtype=float)
    n = S.shape[0]
    if p_v.shape != (n,) or np.any(S <= 0) or np.any(p_v <= 0):
        raise ValueError("S and p_v must be positive vectors of equal length")
    dim = 2 * n
    H = 2.0 * np.eye(dim)
    c = np.concatenate([-2.0 * p_v, np.zeros(n)])
    r = float(p_v @ p_v)
    cons = []
    for i in range(n):
        A = np.zeros((dim, dim))
        A[i, i] = 2.0
        A[n + i, n + i] = 2.0
        cons.append(QuadraticConstraint(A=A, b=np.zeros(dim), d=-float(S[i])))
    for i in range(n):
        a = np.zeros(dim)
        a[i] = -1.0
        cons.append(AffineConstraint(a=a, beta=0.0))
    for i in range(n):
        a = np.zeros(dim)
        a[i] = 1.0
        cons.append(AffineConstraint(a=a, beta=float(p_v[i])))
    lo = -box_halfwidth * np.ones(dim)
    hi = box_halfwidth * np.ones(dim)
    return StructuredProblem(H=H, c=c, r=r, constraints=tuple(cons), lo=lo, hi=hi)


# ---------------------------------------------------------------------------
# Problem files
# ---------------------------------------------------------------------------

def load_problem(path) -> Tuple[StructuredProblem, Optional[dict]]:
    """Load a structured problem from a JSON file.

    Expected fields: ``n``, ``objective: {H, c, r}``,
    ``constraints: [{type: "quadratic", A, b, d} | {type: "affine", a, beta}]``,
    ``box: {lo, hi}`` and optional ``declared_constants``.
    Returns the problem plus the declared-constants override (or None).
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return problem_from_dict(raw)


def problem_from_dict(raw: dict) -> Tuple[StructuredProblem, Optional[dict]]:
    try:
        n = int(raw["n"])
        obj = raw["objective"]
        H = np.asarray(obj["H"], dtype=float)
        c = np.asarray(obj["c"], dtype=float)
        r = float(obj.get("r", 0.0))
        cons_raw = raw["constraints"]
        box = raw["box"]
        lo = np.asarray(box["lo"], dtype=float)
        hi = np.asarray(box["hi"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemFormatError(f"malformed problem document: {exc}") from exc
    if H.shape != (n, n) or c.shape != (n,) or lo.shape != (n,) or hi.shape != (n,):
        raise ProblemFormatError("objective/box dimensions inconsistent with n")
    cons = []
    for i, entry in enumerate(cons_raw):
        kind = entry.get("type")
        if kind == "quadratic":
            A = np.asarray(entry["A"], dtype=float)
            b = np.asarray(entry["b"], dtype=float)
            d = float(entry["d"])
            if A.shape != (n, n) or b.shape != (n,):
                raise ProblemFormatError(f"constraint {i}: bad dimensions")
            cons.append(QuadraticConstraint(A=A, b=b, d=d))
        elif kind == "affine":
            a = np.asarray(entry["a"], dtype=float)
            beta = float(entry["beta"])
            if a.shape != (n,):
                raise ProblemFormatError(f"constraint {i}: bad dimensions")
            cons.append(AffineConstraint(a=a, beta=beta))
        else:
            raise ProblemFormatError(f"constraint {i}: unknown type {kind!r}")
    if not cons:
        raise ProblemFormatError("at least one constraint is required")
    prob = StructuredProblem(H=H, c=c, r=r, constraints=tuple(cons), lo=lo, hi=hi)
    declared = raw.get("declared_constants")
    if declared is not None:
        declared = dict(declared)
        if "constraint_smoothness" in declared:
            declared["constraint_smoothness"] = [
                (float(L), float(B)) for L, B in declared["constraint_smoothness"]
            ]
    return prob, declared
