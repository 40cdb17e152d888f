import dataclasses
import json

import numpy as np
import pytest

from augpdg.errors import ProblemFormatError
from augpdg.problem import (
    AffineConstraint,
    ProblemSpec,
    QuadraticConstraint,
    StructuredProblem,
    eval_constraints,
    eval_objective,
    finite_diff_check,
    load_problem,
    power_flow_problem,
)

from conftest import write_problem_file


def test_spec_validation():
    obj = lambda x: (0.0, np.zeros(2))
    con = lambda x: (0.0, np.zeros(2))
    with pytest.raises(ValueError):
        ProblemSpec(n=2, m=2, objective=obj, constraints=(con,), mu=1.0,
                    l_smooth=1.0, constraint_smoothness=((1.0, 1.0), (1.0, 1.0)))
    with pytest.raises(ValueError):
        ProblemSpec(n=2, m=1, objective=obj, constraints=(con,), mu=0.0,
                    l_smooth=1.0, constraint_smoothness=((1.0, 1.0),))
    with pytest.raises(ValueError):
        ProblemSpec(n=2, m=1, objective=obj, constraints=(con,), mu=1.0,
                    l_smooth=1.0, constraint_smoothness=((1.0, 0.0),))
    # affine constraints have a vanishing gradient-Lipschitz constant
    p = ProblemSpec(n=2, m=1, objective=obj, constraints=(con,), mu=1.0,
                    l_smooth=1.0, constraint_smoothness=((0.0, 1.0),))
    assert p.constraint_smoothness[0][0] == 0.0


def test_check_x_shape():
    prob = power_flow_problem(np.array([1.0]), np.array([4.0]))
    spec = prob.to_spec()
    with pytest.raises(ValueError):
        spec.check_x(np.zeros(3))


def test_power_flow_values_by_hand():
    # n = 1 bus: f(p, q) = (p - 10.8)^2 + q^2, capacity p^2 + q^2 <= 2.7
    prob = power_flow_problem(np.array([2.7]), np.array([10.8]))
    spec = prob.to_spec()
    x = np.array([1.0, 1.0])
    val, grad = eval_objective(spec, x)
    assert val == pytest.approx(97.04, abs=1e-12)
    assert grad == pytest.approx([-19.6, 2.0], abs=1e-12)
    g, jac = eval_constraints(spec, x)
    assert g == pytest.approx([-0.7, -1.0, -9.8], abs=1e-12)
    assert jac[0] == pytest.approx([2.0, 2.0], abs=1e-12)
    assert jac[1] == pytest.approx([-1.0, 0.0], abs=1e-12)
    assert jac[2] == pytest.approx([1.0, 0.0], abs=1e-12)


def test_power_flow_invalid_inputs():
    with pytest.raises(ValueError):
        power_flow_problem(np.array([1.0, -1.0]), np.array([4.0, 4.0]))
    with pytest.raises(ValueError):
        power_flow_problem(np.array([1.0]), np.array([4.0, 4.0]))


def test_fused_block_matches_per_constraint_loop():
    rng = np.random.default_rng(3)
    prob = power_flow_problem(np.array([2.7, 1.35, 2.025]), np.array([10.8, 5.4, 8.1]))
    spec = prob.to_spec()
    spec_loop = dataclasses.replace(spec, constraint_block=None)
    for _ in range(20):
        x = rng.uniform(-5.0, 5.0, size=spec.n)
        g_blk, j_blk = eval_constraints(spec, x)
        g_loop, j_loop = eval_constraints(spec_loop, x)
        np.testing.assert_allclose(g_blk, g_loop, atol=1e-13)
        np.testing.assert_allclose(j_blk, j_loop, atol=1e-13)


def test_derived_constants_by_hand():
    prob = StructuredProblem(
        H=np.diag([1.0, 4.0]),
        c=np.zeros(2),
        r=0.0,
        constraints=(
            AffineConstraint(a=np.array([3.0, 4.0]), beta=1.0),
            QuadraticConstraint(A=np.eye(2), b=np.zeros(2), d=-1.0),
        ),
        lo=np.array([-2.0, -2.0]),
        hi=np.array([2.0, 2.0]),
    )
    mu, l_smooth, smooth = prob.derived_constants()
    assert mu == pytest.approx(1.0, abs=1e-12)
    assert l_smooth == pytest.approx(4.0, abs=1e-12)
    assert smooth[0] == pytest.approx((0.0, 5.0), abs=1e-12)
    # sup over the box of ||x|| is at a corner: sqrt(8)
    assert smooth[1] == pytest.approx((1.0, np.sqrt(8.0)), abs=1e-12)


def test_power_flow_gradient_bound():
    # capacity-constraint gradient (2p, 2q) over the +-200 box peaks at a corner
    prob = power_flow_problem(np.array([1.0]), np.array([4.0]))
    spec = prob.to_spec()
    L, B = spec.constraint_smoothness[0]
    assert L == pytest.approx(2.0, abs=1e-12)
    assert B == pytest.approx(400.0 * np.sqrt(2.0), rel=1e-12)


def test_finite_diff_check_clean_gradients():
    rng = np.random.default_rng(7)
    prob = power_flow_problem(np.array([2.7, 1.35]), np.array([10.8, 5.4]))
    spec = prob.to_spec()
    for _ in range(5):
        out = finite_diff_check(spec, rng.uniform(-3, 3, size=spec.n))
        assert out["max_rel_error"] < 1e-8


def test_load_problem_roundtrip(tmp_path, one_d_problem):
    path = tmp_path / "p.json"
    write_problem_file(path, one_d_problem)
    prob, declared = load_problem(path)
    assert declared is None
    np.testing.assert_allclose(prob.H, one_d_problem.H)
    np.testing.assert_allclose(prob.c, one_d_problem.c)
    assert prob.m == 1
    spec = prob.to_spec()
    val, grad = eval_objective(spec, np.array([0.0]))
    assert val == pytest.approx(4.0)
    assert grad == pytest.approx([-4.0])


def test_load_problem_declared_override(tmp_path, one_d_problem):
    path = tmp_path / "p.json"
    write_problem_file(path, one_d_problem, declared={"mu": 0.5})
    prob, declared = load_problem(path)
    spec = prob.to_spec(declared)
    assert spec.mu == 0.5


def test_load_problem_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{ not json")
    with pytest.raises(ProblemFormatError, match="line"):
        load_problem(path)


def test_load_problem_missing_field(tmp_path, one_d_problem):
    from conftest import structured_to_dict

    doc = structured_to_dict(one_d_problem)
    del doc["objective"]
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ProblemFormatError):
        load_problem(path)


def test_load_problem_not_psd(tmp_path, one_d_problem):
    from conftest import structured_to_dict

    doc = structured_to_dict(one_d_problem)
    doc["objective"]["H"] = [[-2.0]]
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ProblemFormatError, match="positive semidefinite"):
        load_problem(path)


def test_load_problem_unknown_constraint_type(tmp_path, one_d_problem):
    from conftest import structured_to_dict

    doc = structured_to_dict(one_d_problem)
    doc["constraints"][0]["type"] = "cubic"
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ProblemFormatError, match="unknown type"):
        load_problem(path)


def test_structured_problem_bad_box():
    with pytest.raises(ProblemFormatError):
        StructuredProblem(
            H=np.eye(1), c=np.zeros(1), r=0.0,
            constraints=(AffineConstraint(a=np.ones(1), beta=0.0),),
            lo=np.array([1.0]), hi=np.array([-1.0]),
        )
