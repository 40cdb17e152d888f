import json

import numpy as np
import pytest

from augpdg.problem import (
    AffineConstraint,
    ProblemSpec,
    QuadraticConstraint,
    StructuredProblem,
)


def structured_to_dict(prob: StructuredProblem, declared=None) -> dict:
    cons = []
    for con in prob.constraints:
        if isinstance(con, QuadraticConstraint):
            cons.append(
                {"type": "quadratic", "A": con.A.tolist(), "b": con.b.tolist(), "d": con.d}
            )
        else:
            cons.append({"type": "affine", "a": con.a.tolist(), "beta": con.beta})
    doc = {
        "n": prob.n,
        "objective": {"H": prob.H.tolist(), "c": prob.c.tolist(), "r": prob.r},
        "constraints": cons,
        "box": {"lo": prob.lo.tolist(), "hi": prob.hi.tolist()},
    }
    if declared is not None:
        doc["declared_constants"] = declared
    return doc


def write_problem_file(path, prob: StructuredProblem, declared=None):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(structured_to_dict(prob, declared), fh)


@pytest.fixture
def one_d_problem():
    """f(x) = (x - 2)^2, g(x) = x - 1 <= 0; optimum x* = 1, lambda* = 2."""
    return StructuredProblem(
        H=np.array([[2.0]]),
        c=np.array([-4.0]),
        r=4.0,
        constraints=(AffineConstraint(a=np.array([1.0]), beta=1.0),),
        lo=np.array([-5.0]),
        hi=np.array([5.0]),
    )


def plain_spec(n, m, objective, constraints, smooth=None, mu=1.0, l_smooth=1.0):
    """ProblemSpec wrapper for ad-hoc oracles in tests.

    mu / l_smooth defaults are placeholders for operations that do not
    consult the declared constants.
    """
    if smooth is None:
        smooth = tuple((1.0, 1.0) for _ in range(m))
    return ProblemSpec(
        n=n,
        m=m,
        objective=objective,
        constraints=tuple(constraints),
        mu=mu,
        l_smooth=l_smooth,
        constraint_smoothness=tuple(smooth),
    )


def zero_objective(n):
    return lambda x: (0.0, np.zeros(n))
