import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.flows.closed_forms import bm_chart_margin, closed_form_bm, closed_form_coefficients
from src.flows.generators import get_generator, monomial, sine
from src.flows.scalar import (
    EXP_MEAN,
    SEAM,
    FlowSolution,
    G_of,
    alpha_of,
    beta_of,
    dFdx_check,
    flow_coefficients,
    semigroup_defect,
    solve_F,
)
from src.flows.time_one import time1_flow
from src.geometry.errors import OutOfChartError
from src.geometry.fields import VectorField
from src.geometry.jet import Jet

# (name, generator, a, x, F, G, alpha)
FLOW_CASES = [
    ("x at a=1", monomial(1), 1.0, 2.0, 2.0 * math.e, 2.0 * (1.0 - math.e), 1.0 / (math.e - 1.0)),
    ("x^2 at a=0.5", monomial(2), 0.5, 1.0, 2.0, -2.0, 0.5),
    ("x^2 at a=-1", monomial(2), -1.0, 1.0, 0.5, -0.5, 2.0),
    ("x^3 at a=0.375", monomial(3), 0.375, 1.0, 2.0, (1.0 - 2.0) / 0.375, 0.375),
]


@pytest.mark.parametrize("name,f,a,x,F,G,alpha", FLOW_CASES, ids=[c[0] for c in FLOW_CASES])
def test_flow_values(name, f, a, x, F, G, alpha):
    assert solve_F(f, a, x) == pytest.approx(F, rel=1e-10)
    assert G_of(f, a, x) == pytest.approx(G, rel=1e-9)
    assert alpha_of(f, a, x) == pytest.approx(alpha, rel=1e-9)


@pytest.mark.parametrize("name,f,a,x,F,G,alpha", FLOW_CASES, ids=[c[0] for c in FLOW_CASES])
def test_closed_forms_agree_with_the_flow(name, f, a, x, F, G, alpha):
    closed = closed_form_bm(f.degree, a, x)
    np.testing.assert_allclose(closed, (F, G, alpha), rtol=1e-12)


@pytest.mark.parametrize("a", [-1.0, 0.5, 2.0])
def test_G_of_linear_flow_is_exponential_mean(a):
    x = 0.8
    assert G_of(monomial(1), a, x) == pytest.approx(-x * EXP_MEAN(a), rel=1e-9)


@pytest.mark.parametrize("x", [-1.0, 0.0, 0.3, 2.0])
def test_alpha_is_one_at_zero_time(x):
    assert alpha_of(monomial(2), 0.0, x) == 1.0
    assert G_of(monomial(2), 0.0, x) == -(x**2)


def test_alpha_at_a_zero_of_f():
    # f(0) = 0: alpha is 1/E(a f'(0)) for a simple zero, 1 for a double one
    assert alpha_of(monomial(1), 0.7, 0.0) == pytest.approx(1.0 / EXP_MEAN(0.7))
    assert alpha_of(monomial(2), 0.7, 0.0) == pytest.approx(1.0)


def test_beta_at_zero_time_is_half_the_derivative():
    assert beta_of(monomial(2), 0.0, 0.6) == pytest.approx(0.6)
    assert beta_of(sine(), 0.0, 0.4) == pytest.approx(math.cos(0.4) / 2.0)


@pytest.mark.parametrize("f", [monomial(2), sine()], ids=lambda f: f.name)
@pytest.mark.parametrize("x", [-1.0, 0.4, 1.5])
def test_variational_system_at_zero_time(f, x):
    coeffs = flow_coefficients(f, 0.0, x)
    assert coeffs.F == x
    assert coeffs.alpha == 1.0
    assert coeffs.beta == pytest.approx(beta_of(f, 0.0, x), rel=1e-12)
    assert coeffs.beta == pytest.approx(flow_coefficients(f, 1e-9, x).beta, rel=1e-6, abs=1e-9)


@pytest.mark.parametrize("m,a,x", [(2, 1.0, 1.0), (2, 2.0, 0.75), (3, 0.5, -1.0)])
def test_closed_form_rejects_points_outside_the_chart(m, a, x):
    assert bm_chart_margin(m, a, x) <= 0.0
    with pytest.raises(OutOfChartError):
        closed_form_coefficients(m, a, x)


def test_flow_blow_up_is_out_of_chart():
    with pytest.raises(OutOfChartError):
        solve_F(monomial(2), 2.0, 1.0)


def test_jet_flow_carries_derivatives():
    aj, xj = Jet.variables([0.5, 1.0], 1)
    F = solve_F(monomial(2), aj, xj)
    # F = x/(1 - a x)
    assert F.value == pytest.approx(2.0)
    np.testing.assert_allclose(F.gradient, [4.0, 4.0], rtol=1e-9)


@pytest.mark.parametrize("f", [monomial(1), monomial(2), sine()], ids=lambda f: f.name)
def test_dFdx_matches_generator_ratio(f):
    assert dFdx_check(f, 0.4, 0.9) < 1e-7


def test_dFdx_check_is_undefined_at_zeros():
    with pytest.raises(ValueError):
        dFdx_check(monomial(2), 0.4, 0.0)


small = st.floats(min_value=-0.4, max_value=0.4)


@given(small, small, st.floats(min_value=-0.9, max_value=0.9))
def test_semigroup(a, a_prime, x):
    assert semigroup_defect(sine(), a, a_prime, x) < 1e-10


@pytest.mark.parametrize("f", [monomial(1), monomial(2), sine()], ids=lambda f: f.name)
@pytest.mark.parametrize("x", [-0.8, 0.5, 1.3])
def test_seam_branches_agree(f, x):
    below = alpha_of(f, SEAM * (1.0 - 1e-9), x)
    above = alpha_of(f, SEAM * (1.0 + 1e-9), x)
    assert abs(below - above) < 1e-7
    assert abs(G_of(f, SEAM * (1.0 - 1e-9), x) - G_of(f, SEAM * (1.0 + 1e-9), x)) < 1e-7 * max(1.0, abs(f(x)))


@pytest.mark.parametrize("a,x", [(0.3, 0.7), (-0.6, 1.1), (1e-5, 0.4), (0.5, 0.0), (0.0, 0.7), (0.0, -1.2)])
def test_variational_system_matches_closed_form(a, x):
    ode = flow_coefficients(monomial(2), a, x).values()
    closed = closed_form_coefficients(2, a, x).values()
    np.testing.assert_allclose(ode, closed, rtol=1e-9, atol=1e-12)


def test_exp_mean():
    assert EXP_MEAN(0.0) == 1.0
    assert EXP_MEAN(1.0) == pytest.approx(math.e - 1.0)
    assert EXP_MEAN.derivative(0.0) == pytest.approx(0.5)
    # the series and recurrence branches meet at |a| = 1
    assert EXP_MEAN.derivative(0.999999, 2) == pytest.approx(EXP_MEAN.derivative(1.000001, 2), rel=1e-5)


def test_flow_solution_residual():
    for method in (FlowSolution.METHOD_ODE, FlowSolution.METHOD_CLOSED_FORM):
        solution = FlowSolution(monomial(2), method=method)
        assert solution.residual(0.3, 0.8) < 1e-9


def test_flow_solution_needs_a_monomial_for_closed_forms():
    with pytest.raises(ValueError):
        FlowSolution(sine(), method=FlowSolution.METHOD_CLOSED_FORM)


def test_time_one_flow_of_commuting_fields():
    fields = [
        VectorField.from_function(2, lambda x, y: [x, 0.0], name="x d_x"),
        VectorField.from_function(2, lambda x, y: [0.0, 1.0], name="d_y"),
    ]
    end = time1_flow(fields, [0.4, -0.3], [1.5, 0.2])
    np.testing.assert_allclose(end, [1.5 * math.exp(0.4), -0.1], rtol=1e-10)
    np.testing.assert_allclose(time1_flow(fields, [0.0, 0.0], [1.5, 0.2]), [1.5, 0.2])


def test_generator_registry():
    assert get_generator("monomial", m=3)(2.0) == 8.0
    assert get_generator("scaled_monomial", m=2)(2.0, [1.0]) == 8.0
    assert get_generator("desing", k=1, eps=0.3)(0.0) > 0.0
    with pytest.raises(ValueError):
        get_generator("cosh")


def test_generator_parameter_count_is_checked():
    with pytest.raises(ValueError):
        monomial(2)(1.0, [0.5])


def test_declared_zero_set():
    assert sine().check_zero_set(-4.0, 4.0)
    assert monomial(3).check_zero_set(-1.0, 1.0)


def test_linear_flow_on_the_oracle_grid():
    grid = np.linspace(-2.0, 2.0, 33)
    f = monomial(1)
    worst = max(abs(solve_F(f, a, x) - x * math.exp(a)) for a in grid for x in grid)
    assert worst < 1e-9
