"""Linear-rate certificates for the augmented primal-dual gradient iteration.

Given a verified optimal pair (x*, lambda*), this module evaluates every
constant of the semi-global linear rate guarantee: the active-set curvature
``kappa``, the coupling weight ``delta``, the admissible stepsize bound
``alpha_max``, the contraction factor ``gamma = min{c1, c2, c3}`` and the
conditioning constant ``C`` of the cross-coupled quadratic form

    Q_delta = [[I, delta J'], [delta J, I]]

whose value along the stacked error is the Lyapunov function used for decay
diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import CertificateError
from .problem import ProblemSpec, eval_constraints
from .solver import kkt_residual

DEFAULT_ACT_TOL = 1e-7
DEFAULT_SAFETY = 0.9
_PI_FIXED_POINT_TOL = 1e-12
_PI_FIXED_POINT_ROUNDS = 100


def sym_eig_extremes(M) -> Tuple[float, float]:
    """Extreme eigenvalues (min, max) of a symmetric matrix.

    Backed by LAPACK's symmetric eigensolver; meets 1e-10 relative accuracy
    at the dense sizes used here (up to a few hundred).
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    if M.size and np.max(np.abs(M - M.T)) > 1e-12 * max(1.0, np.max(np.abs(M))):
        raise ValueError("matrix is not symmetric")
    w = np.linalg.eigvalsh(M)
    return float(w[0]), float(w[-1])


@dataclass(frozen=True)
class ActiveSetInfo:
    """Active/inactive partition at x* and the active Jacobian curvature."""

    active: np.ndarray           # indices with |g_i(x*)| <= act_tol
    inactive: np.ndarray
    jacobian_active: np.ndarray  # |I| x n
    jacobian_full: np.ndarray    # m x n
    g_star: np.ndarray           # constraint values at x*
    kappa: float


def active_set(p: ProblemSpec, x_star, act_tol: float = DEFAULT_ACT_TOL) -> ActiveSetInfo:
    """Partition constraints at x* and compute kappa = lambda_min(J_I J_I')."""
    g, jac = eval_constraints(p, x_star)
    if np.max(g) > act_tol:
        raise ValueError(
            f"x_star is infeasible: max g_i = {np.max(g):.6g} > act_tol={act_tol:g}"
        )
    mask = np.abs(g) <= act_tol
    active = np.nonzero(mask)[0]
    inactive = np.nonzero(~mask)[0]
    if len(active) == 0:
        raise CertificateError(
            "no active constraints at x_star; the rate constants are undefined "
            "(kappa would vanish)"
        )
    J_I = jac[active]
    lam_min, lam_max = sym_eig_extremes(J_I @ J_I.T)
    if lam_min <= 1e-12 * max(lam_max, 1.0):
        raise CertificateError(
            f"LICQ violated: lambda_min(J_I J_I') = {lam_min:.6g} is not positive"
        )
    return ActiveSetInfo(
        active=active,
        inactive=inactive,
        jacobian_active=J_I,
        jacobian_full=jac,
        g_star=g,
        kappa=lam_min,
    )


@dataclass(frozen=True)
class _Constants:
    """Aggregate smoothness constants and the derived a/b/theta constants."""

    mu: float
    l: float
    L_g: float
    B_g: float
    kappa: float
    theta1: float
    a1: float
    a2: float
    a3: float
    a4: float
    a5: float
    b1: float
    b2: float


def _rate_constants(
    p: ProblemSpec, info: ActiveSetInfo, rho: float, lambda_star, alt_a1: bool = False
) -> _Constants:
    smooth = np.asarray(p.constraint_smoothness, dtype=float)
    L_g = float(np.sqrt(np.sum(smooth[:, 0] ** 2)))
    B_g = float(np.sqrt(np.sum(smooth[:, 1] ** 2)))
    l = p.l_smooth
    kappa = info.kappa
    theta1 = rho * B_g**2 + L_g * float(np.linalg.norm(lambda_star))
    # a1 bounds a squared-gradient term, so the dimensionally consistent
    # form carries 2l^2; alt_a1 selects the looser 2l variant.
    a1 = (2.0 * l + 4.0 * theta1**2) if alt_a1 else (2.0 * l**2 + 4.0 * theta1**2)
    a2 = 4.0 * B_g**2
    a3 = (
        2.0 * B_g**2 * l**2 / kappa
        + 2.0 * B_g**2 * theta1**2 / kappa
        + 2.0 * B_g**2 / (kappa * rho**2)
        + kappa * B_g**2 * rho**2 / 4.0
    )
    a4 = B_g**2 * l**2 / 2.0 + B_g**2 * theta1**2 + 2.0 * B_g**2
    a5 = B_g**2 + 2.0 / rho**2
    b1 = a1 + 2.0 * B_g**2
    b2 = a2 + 2.0 / rho**2
    return _Constants(
        mu=p.mu, l=l, L_g=L_g, B_g=B_g, kappa=kappa, theta1=theta1,
        a1=a1, a2=a2, a3=a3, a4=a4, a5=a5, b1=b1, b2=b2,
    )


def compute_pi_star(p: ProblemSpec, info: ActiveSetInfo, rho: float, C: float, d0: float) -> float:
    """Inactive-margin constant: [rho max_{i inactive} g_i(x*)/(sqrt(C) d0) + 1]_+^2.

    Zero when every constraint is active (the block it controls is vacuous).
    """
    if d0 <= 0:
        raise ValueError("d0 must be positive")
    if C < 1.0:
        raise ValueError("C must be >= 1")
    if len(info.inactive) == 0:
        return 0.0
    g_max = float(np.max(info.g_star[info.inactive]))
    if g_max >= 0:
        raise ValueError("inactive constraints must satisfy g_i(x*) < 0")
    val = rho * g_max / (np.sqrt(C) * d0) + 1.0
    return max(val, 0.0) ** 2


def _delta_bound(consts: _Constants, rho: float, pi_star: float) -> float:
    one_minus = 1.0 - pi_star
    terms = [consts.mu / (2.0 * consts.a3), 1.0 / consts.B_g]
    mid_den = 2.0 * rho * (consts.kappa + 8.0 * consts.B_g**2 + consts.L_g**2 * one_minus)
    terms.append(one_minus / mid_den)
    return min(terms)


def compute_delta(
    p: ProblemSpec,
    info: ActiveSetInfo,
    rho: float,
    pi_star: float,
    lambda_star,
    safety: float = DEFAULT_SAFETY,
    alt_a1: bool = False,
) -> float:
    """Coupling weight delta, a safety fraction below its admissible bound."""
    if not 0.0 <= pi_star < 1.0:
        raise CertificateError(f"pi_star = {pi_star} leaves no admissible delta")
    if not 0.0 < safety < 1.0:
        raise ValueError("safety must lie in (0, 1)")
    consts = _rate_constants(p, info, rho, lambda_star, alt_a1)
    bound = _delta_bound(consts, rho, pi_star)
    if bound <= 0:
        raise CertificateError("delta bound is nonpositive")
    return safety * bound


def _alpha_bound(consts: _Constants, rho: float, delta: float, pi_star: float) -> float:
    # Third term tightened from 2 mu / (b1 + 2 a4 delta) to keep c1 positive
    # even when a3 * delta is close to mu / 2.
    head = consts.mu - consts.a3 * delta
    if head <= 0:
        raise CertificateError("a3 * delta >= mu: delta too large for a positive c1")
    terms = {
        "one": 1.0,
        "rho": rho,
        "primal": 2.0 * head / (consts.b1 + 2.0 * consts.a4 * delta),
        "dual": consts.kappa * delta / (2.0 * consts.b2 + 4.0 * consts.a5 * delta),
        "margin": (1.0 - pi_star) / (2.0 * rho * (consts.b2 + 2.0 * consts.a5 * delta)),
    }
    for name, val in terms.items():
        if val <= 0:
            raise CertificateError(f"stepsize bound term {name!r} = {val:.6g} is nonpositive")
    return min(terms.values())


def _gamma_terms(consts: _Constants, rho: float, delta: float, pi_star: float, alpha: float):
    c1 = consts.mu * alpha - consts.a3 * delta * alpha \
        - consts.b1 * alpha**2 / 2.0 - consts.a4 * delta * alpha**2
    c2 = consts.kappa * delta * alpha / 4.0 - consts.b2 * alpha**2 / 2.0 \
        - consts.a5 * delta * alpha**2
    c3 = alpha * (1.0 - pi_star) / (2.0 * rho) \
        - (delta * alpha * consts.kappa + consts.b2 * alpha**2 + 2.0 * consts.a5 * delta * alpha**2) / 2.0 \
        - 4.0 * alpha * delta * consts.B_g**2
    return c1, c2, c3


@dataclass(frozen=True)
class RateCertificate:
    """All constants of the semi-global linear rate guarantee.

    The guaranteed envelope for runs started within stacked distance ``d0``
    of the reference pair, at stepsize ``alpha``:

        ||x_k - x*||^2 + ||l_k - l*||^2 <= C (1 - gamma)^k d0^2
    """

    kappa: float
    theta1: float
    a1: float
    a2: float
    a3: float
    a4: float
    a5: float
    b1: float
    b2: float
    L_g: float
    B_g: float
    delta: float
    alpha_max: float
    alpha: float
    gamma: float
    c1: float
    c2: float
    c3: float
    C: float
    pi_star: float
    d0: float
    rho: float
    mu: float
    l_smooth: float
    x_star: np.ndarray
    lambda_star: np.ndarray
    jacobian: np.ndarray
    active: np.ndarray

    def envelope(self, k) -> np.ndarray:
        """Squared-error bound C (1 - gamma)^k d0^2 at iteration(s) k."""
        return self.C * (1.0 - self.gamma) ** np.asarray(k, dtype=float) * self.d0**2


def compute_alpha_max(
    p: ProblemSpec,
    info: ActiveSetInfo,
    rho: float,
    delta: float,
    pi_star: float,
    lambda_star,
    alt_a1: bool = False,
) -> float:
    """Admissible stepsize bound at fixed delta and pi_star."""
    consts = _rate_constants(p, info, rho, lambda_star, alt_a1)
    return _alpha_bound(consts, rho, delta, pi_star)


def compute_gamma(
    p: ProblemSpec,
    info: ActiveSetInfo,
    rho: float,
    delta: float,
    pi_star: float,
    lambda_star,
    alpha: float,
    alt_a1: bool = False,
) -> Tuple[float, float, float, float]:
    """(gamma, c1, c2, c3) at the given stepsize; all three must be positive."""
    consts = _rate_constants(p, info, rho, lambda_star, alt_a1)
    c1, c2, c3 = _gamma_terms(consts, rho, delta, pi_star, alpha)
    for name, val in (("c1", c1), ("c2", c2), ("c3", c3)):
        if val <= 0:
            raise CertificateError(f"{name} = {val:.6g} <= 0: alpha too large")
    gamma = min(c1, c2, c3, 1.0 - 1e-12)
    return gamma, c1, c2, c3


def q_delta_matrix(J: np.ndarray, delta: float) -> np.ndarray:
    """Assemble the cross-coupled form [[I, delta J'], [delta J, I]]."""
    J = np.asarray(J, dtype=float)
    m, n = J.shape
    Q = np.eye(n + m)
    Q[:n, n:] = delta * J.T
    Q[n:, :n] = delta * J
    return Q


def _conditioning(J: np.ndarray, delta: float) -> float:
    lam_min, lam_max = sym_eig_extremes(q_delta_matrix(J, delta))
    if lam_min <= 0:
        raise CertificateError(
            f"Q_delta is not positive definite (lambda_min = {lam_min:.6g})"
        )
    return lam_max / lam_min


def lyapunov_value(x, lam, x_star, lambda_star, J, delta: float) -> float:
    """Quadratic-form value of the stacked error under Q_delta."""
    J = np.asarray(J, dtype=float)
    sigma_max = float(np.linalg.norm(J, 2)) if J.size else 0.0
    if delta * sigma_max >= 1.0:
        raise ValueError("delta * ||J|| >= 1: Q_delta is not positive definite")
    dx = np.asarray(x, dtype=float) - np.asarray(x_star, dtype=float)
    dl = np.asarray(lam, dtype=float) - np.asarray(lambda_star, dtype=float)
    return float(dx @ dx + dl @ dl + 2.0 * delta * dl @ (J @ dx))


def build_certificate(
    p: ProblemSpec,
    x_star,
    lambda_star,
    rho: float,
    d0: float,
    safety: float = DEFAULT_SAFETY,
    act_tol: float = DEFAULT_ACT_TOL,
    alt_a1: bool = False,
    kkt_tol: float = 1e-8,
) -> RateCertificate:
    """Assemble the full certificate at reference pair (x*, lambda*).

    pi_star, delta and C are mutually dependent; they are resolved by a
    fixed-point iteration seeded with pi_star evaluated at delta = 0.5 / B_g.
    """
    x_star = np.asarray(x_star, dtype=float)
    lambda_star = np.asarray(lambda_star, dtype=float)
    res = kkt_residual(p, x_star, lambda_star, rho)
    if res.max() > kkt_tol:
        raise ValueError(
            f"reference pair is not KKT: max residual {res.max():.6g} > {kkt_tol:g}"
        )
    info = active_set(p, x_star, act_tol)
    consts = _rate_constants(p, info, rho, lambda_star, alt_a1)
    J = info.jacobian_full

    C = _conditioning(J, 0.5 / consts.B_g)
    pi_star = compute_pi_star(p, info, rho, C, d0)
    delta = None
    for _ in range(_PI_FIXED_POINT_ROUNDS):
        if pi_star >= 1.0:
            raise CertificateError(f"pi_star = {pi_star} leaves no admissible delta")
        delta = safety * _delta_bound(consts, rho, pi_star)
        if delta <= 0:
            raise CertificateError("delta bound is nonpositive")
        C = _conditioning(J, delta)
        pi_new = compute_pi_star(p, info, rho, C, d0)
        if abs(pi_new - pi_star) < _PI_FIXED_POINT_TOL:
            pi_star = pi_new
            break
        pi_star = pi_new
    else:
        raise CertificateError("pi_star/delta/C fixed point did not converge")

    alpha_max = _alpha_bound(consts, rho, delta, pi_star)
    alpha = safety * alpha_max
    c1, c2, c3 = _gamma_terms(consts, rho, delta, pi_star, alpha)
    for name, val in (("c1", c1), ("c2", c2), ("c3", c3)):
        if val <= 0:
            raise CertificateError(f"{name} = {val:.6g} <= 0 at alpha = {alpha:.6g}")
    gamma = min(c1, c2, c3, 1.0 - 1e-12)

    return RateCertificate(
        kappa=consts.kappa, theta1=consts.theta1,
        a1=consts.a1, a2=consts.a2, a3=consts.a3, a4=consts.a4, a5=consts.a5,
        b1=consts.b1, b2=consts.b2, L_g=consts.L_g, B_g=consts.B_g,
        delta=delta, alpha_max=alpha_max, alpha=alpha,
        gamma=gamma, c1=c1, c2=c2, c3=c3,
        C=C, pi_star=pi_star, d0=d0, rho=rho,
        mu=p.mu, l_smooth=p.l_smooth,
        x_star=x_star, lambda_star=lambda_star,
        jacobian=J, active=info.active,
    )


_REPORT_FIELDS = (
    "kappa", "theta1", "a1", "a2", "a3", "a4", "a5", "b1", "b2",
    "L_g", "B_g", "delta", "alpha_max", "alpha", "gamma",
    "c1", "c2", "c3", "C", "pi_star", "d0", "rho", "mu", "l_smooth",
)


def format_report(cert: RateCertificate) -> str:
    """Flat diffable ``name = value`` report of every certificate constant."""
    lines = [f"{name} = {getattr(cert, name)!r}" for name in _REPORT_FIELDS]
    return "\n".join(lines) + "\n"
