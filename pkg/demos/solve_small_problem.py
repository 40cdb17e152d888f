"""Solve a one-dimensional constrained quadratic and inspect the trace.

minimize (x - 2)^2  subject to  x - 1 <= 0

The unconstrained minimum x = 2 is infeasible, so the constraint binds:
x* = 1 with multiplier lambda* = 2.  The script runs the primal-dual
iteration from scratch and prints how the KKT residuals decay.
"""

import numpy as np

from augpdg import (
    AffineConstraint,
    SolverConfig,
    StructuredProblem,
    kkt_residual,
    run,
)

prob = StructuredProblem(
    H=np.array([[2.0]]),
    c=np.array([-4.0]),
    r=4.0,
    constraints=(AffineConstraint(a=np.array([1.0]), beta=1.0),),
    lo=np.array([-5.0]),
    hi=np.array([5.0]),
)
spec = prob.to_spec()

cfg = SolverConfig(alpha=0.3, rho=1.0, max_iters=10_000, stop_tol=1e-12)
trace = run(spec, cfg, x0=np.array([0.0]), lambda0=np.zeros(1))

print(f"status: {trace.status} after {trace.iterations} iterations")
print(f"x  = {trace.final_x}")
print(f"lam = {trace.final_lam}")

print("\n  k   stationarity   fixed_point_gap")
for i in range(0, len(trace.ks), max(1, len(trace.ks) // 12)):
    print(f"{trace.ks[i]:4d}   {trace.stationarity[i]:12.3e}   {trace.fixed_point_gap[i]:12.3e}")

res = kkt_residual(spec, trace.final_x, trace.final_lam, cfg.rho)
print(f"\nfinal KKT residual (max over components): {res.max():.3e}")
