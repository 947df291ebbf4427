import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monge_fem.analysis import convergence_rates, convexity_report, error_norms
from monge_fem.fe_space import FeFunction, build_space, interpolate
from monge_fem.mesh import build_uniform_square_mesh
from monge_fem.problems import QUADRATIC, TEST1
from monge_fem.quadrature import collapsed_rule, rule_for_degree
from monge_fem.solver import MarchingOperator, SolverConfig, initial_guess


def test_reproduced_quadratic_has_no_error():
    space = build_space(build_uniform_square_mesh(4), 2)
    e = error_norms(interpolate(space, QUADRATIC.g), QUADRATIC.exact_u, QUADRATIC.exact_grad_u)
    assert e.l2_error <= 1e-12 and e.h1_error <= 1e-12 and e.broken_h1_error <= 1e-12
    assert e.min_lambda1 == pytest.approx(1.0) and e.max_lambda2 == pytest.approx(1.0)


def test_constant_error_norms():
    space = build_space(build_uniform_square_mesh(3), 2)
    one = FeFunction(space, np.ones(space.n_dof))
    e = error_norms(one, lambda x, y: 0 * x, lambda x, y: (0 * x, 0 * x))
    assert e.l2_error == pytest.approx(1.0, abs=1e-14)
    assert e.h1_error == pytest.approx(1.0, abs=1e-14)


def test_broken_norm_equals_global_for_continuous_fields(rng):
    space = build_space(build_uniform_square_mesh(4), 3)
    u = FeFunction(space, rng.standard_normal(space.n_dof))
    e = error_norms(u, TEST1.exact_u, TEST1.exact_grad_u)
    assert e.broken_h1_error == pytest.approx(e.h1_error, rel=1e-12)


def test_rate_examples():
    assert convergence_rates([(0.5, 4e-2), (0.25, 1e-2)])[1] == pytest.approx(2.0, abs=1e-12)
    assert convergence_rates([(1 / 16, 1.28e-2), (1 / 32, 6.4e-3)])[1] == pytest.approx(1.0, abs=1e-12)
    assert convergence_rates([(1 / 16, 1.79e-1), (1 / 32, 6.54e-2)])[1] == pytest.approx(1.45, abs=0.01)
    r = convergence_rates([(1 / 16, 2.76e-3), (1 / 32, 7.35e-4), (1 / 64, 1.86e-4)])
    assert math.isnan(r[0]) and r[1] == pytest.approx(1.909, abs=1e-3) and r[2] == pytest.approx(1.982, abs=1e-3)


def test_rate_edge_cases():
    assert convergence_rates([]) == []
    assert all(math.isnan(r) for r in convergence_rates([(0.5, 1e-3)]))
    r = convergence_rates([(0.5, 1e-3), (0.25, 0.0), (0.125, 1e-4), (0.0625, "diverged"), (0.03125, 1e-5)])
    assert [math.isnan(v) for v in r] == [True, True, True, True, True]
    assert math.isnan(convergence_rates([(0.5, 1e-13), (0.25, 1e-14)], floor=1e-12)[1])


@settings(max_examples=50, deadline=None)
@given(
    c=st.floats(1e-3, 1e3),
    p=st.floats(0.5, 4.0),
    n0=st.sampled_from([2, 4, 8]),
)
def test_rates_recover_power_laws(c, p, n0):
    hs = [1.0 / (n0 * 2**k) for k in range(4)]
    rates = convergence_rates([(h, c * h**p) for h in hs])
    np.testing.assert_allclose(rates[1:], p, atol=1e-9)


def test_convexity_examples():
    space = build_space(build_uniform_square_mesh(4), 2)
    rule = rule_for_degree(4)
    assert convexity_report(interpolate(space, QUADRATIC.g), rule) == pytest.approx((1.0, 1.0, 0))
    saddle = interpolate(space, lambda x, y: x * x - y * y)
    lo, hi, flagged = convexity_report(saddle, rule)
    assert lo == pytest.approx(-2.0) and hi == pytest.approx(2.0) and flagged == space.mesh.n_triangles


def test_exact_test1_hessian_bracket():
    # D^2 u = e^{r^2/2} (I + x x^T): eigenvalues e^{r^2/2} and e^{r^2/2}(1 + r^2)
    g = np.linspace(0, 1, 201)
    x, y = np.meshgrid(g, g)
    r2 = x * x + y * y
    lam1 = np.exp(r2 / 2)
    lam2 = np.exp(r2 / 2) * (1 + r2)
    assert lam1.min() == pytest.approx(1.0) and lam2.max() == pytest.approx(3 * math.e)


def test_error_quadrature_is_converged():
    op = MarchingOperator.build(TEST1, build_uniform_square_mesh(32), SolverConfig())
    u = initial_guess(op)
    a = error_norms(u, TEST1.exact_u, TEST1.exact_grad_u, rule=rule_for_degree(6))
    b = error_norms(u, TEST1.exact_u, TEST1.exact_grad_u, rule=collapsed_rule(12))
    assert abs(a.l2_error - b.l2_error) / b.l2_error < 5e-3
    assert abs(a.h1_error - b.h1_error) / b.h1_error < 5e-3
