import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.desingularization.convergence import convergence_report, derivative_sups
from src.desingularization.family import DesingFamily, build_h, desingularized_poisson, h_eps, h_eps_inverse
from src.desingularization.groupoid import (
    block_pfaffian,
    desing_alpha,
    desing_F,
    desing_groupoid_chart,
    flow_residual,
    in_range,
    seam_jump,
)
from src.flows.closed_forms import closed_form_bm
from src.flows.scalar import alpha_of
from src.geometry.errors import OutOfChartError
from src.geometry.probes import ChartBox


@pytest.mark.parametrize("k", [1, 2, 3])
def test_profile_anchors(k):
    h = build_h(k)
    assert h(0.0) == 0.0
    assert h(1.0) == pytest.approx(2.0 - 1.0 / (2 * k - 1), rel=1e-10)
    assert h(1.0 + 1e-9) == pytest.approx(h(1.0 - 1e-9), abs=1e-7)
    assert h(-0.4) == -h(0.4)
    assert h.verify() > 0.0


def test_profile_tail_slope():
    h = build_h(1)
    assert h.h_prime(2.0) == pytest.approx(0.25)
    assert h(2.0) == pytest.approx(1.5)


def test_rescaled_profile_value():
    family = DesingFamily(1, 0.5)
    assert h_eps(family, 1.0) == pytest.approx(7.0)
    assert family.limit == pytest.approx(8.0)


@pytest.mark.parametrize("k,eps", [(1, 0.3), (2, 0.5)])
def test_h_eps_prime_outside_the_support(k, eps):
    family = DesingFamily(k, eps)
    for x in (family.width, 0.5, -0.7, 2.0):
        assert family.h_eps_prime(x) == pytest.approx(abs(x) ** (-2 * k))
        assert family.g_eps(x) == 0.0


@pytest.mark.parametrize("x", [0.0, 0.02, -0.05, 0.08])
def test_h_eps_prime_matches_a_difference_quotient(x):
    family = DesingFamily(1, 0.3)
    step = 1e-5 * family.width
    quotient = (family.h_eps(x + step) - family.h_eps(x - step)) / (2.0 * step)
    assert quotient == pytest.approx(family.h_eps_prime(x), rel=1e-6)


@given(st.floats(min_value=-0.6, max_value=0.6))
def test_inverse_round_trip(x):
    family = DesingFamily(1, 0.3)
    assert h_eps_inverse(family, h_eps(family, x)) == pytest.approx(x, abs=1e-9)


def test_inverse_outside_the_range():
    family = DesingFamily(1, 0.3)
    with pytest.raises(OutOfChartError):
        family.h_eps_inverse(family.limit)


@pytest.mark.parametrize("k,eps", [(1, 0.3), (1, 0.1), (2, 0.4)])
def test_g_eps_shape(k, eps):
    family = DesingFamily(k, eps)
    assert family.g_eps(0.0) == pytest.approx(eps ** (4 * k) * family.h.amplitude, rel=1e-12)
    xs = np.linspace(-2.0 * family.width, 2.0 * family.width, 101)
    values = np.array([family.g_eps(x) for x in xs])
    assert np.all(values >= 0.0)
    assert np.all(values[np.abs(xs) >= family.width] == 0.0)
    assert all(family.f_eps(x) > 0.0 for x in xs)


def test_eps_zero_is_the_singular_structure():
    family = DesingFamily(1, 0.0)
    assert family.g_eps(0.3) == 0.0
    with pytest.raises(ValueError):
        family.h_eps(0.3)
    assert family.generator().degree == 2


@pytest.mark.parametrize("eps", [1.0, -1.5])
def test_eps_out_of_range(eps):
    with pytest.raises(ValueError):
        DesingFamily(1, eps)


@pytest.mark.parametrize("k", [1, 2])
def test_convergence_orders(k):
    report = convergence_report(k, [0.4, 0.2, 0.1, 0.05])
    assert report.passed, report
    np.testing.assert_allclose(report.observed_orders, report.expected_orders, atol=1e-6)
    assert list(report.to_frame().columns) == ["eps"] + report.columns
    assert len(report.orders_frame()) == 2 * k


def test_derivative_sups_of_k1():
    family = DesingFamily(1, 0.2)
    sups = derivative_sups(family)
    assert sups[0] == pytest.approx(family.g_eps(0.0))
    assert sups.shape == (2,)


@pytest.mark.parametrize("eps_list", [[0.1], [0.1, 0.2], [0.2, 0.1, 0.0]])
def test_convergence_needs_decreasing_positive_eps(eps_list):
    with pytest.raises(ValueError):
        convergence_report(1, eps_list)


def test_desingularized_poisson_with_constant_block():
    pi = desingularized_poisson(1, 0.3, [[0.0, 2.0], [-2.0, 0.0]])
    matrix = pi.matrix([0.0, 0.1, 0.5, -0.5])
    assert matrix[0, 1] == pytest.approx(DesingFamily(1, 0.3).g_eps(0.0))
    assert matrix[2, 3] == 2.0


# --- groupoid of the desingularized structure ---

FLOW_POINTS = [(0.3, 0.0), (0.2, 0.5), (-0.4, 0.045), (0.5, -0.09)]


@pytest.mark.parametrize("a,x", FLOW_POINTS)
def test_inverse_profile_flow_matches_the_ode(a, x):
    family = DesingFamily(1, 0.3)
    assert in_range(family, a, x)
    assert flow_residual(family, a, x) < 1e-8


@pytest.mark.parametrize("a,x", FLOW_POINTS)
def test_desing_alpha_matches_the_generic_alpha(a, x):
    family = DesingFamily(1, 0.3)
    assert desing_alpha(family, a, x) == pytest.approx(alpha_of(family.generator(), a, x), abs=1e-7)


def test_eps_zero_uses_the_closed_form():
    family = DesingFamily(1, 0.0)
    assert desing_F(family, 0.5, 1.0) == pytest.approx(2.0)
    assert desing_alpha(family, 0.5, 1.0) == pytest.approx(closed_form_bm(2, 0.5, 1.0)[2])
    assert desing_alpha(family, 0.5, 0.0) == 1.0
    assert not in_range(family, 1.0, 1.0)


@pytest.mark.parametrize("x", [0.3, 0.6, -0.8])
def test_seams_are_continuous(x):
    assert seam_jump(DesingFamily(1, 0.3), x) < 1e-7


def test_flow_residual_outside_the_chart():
    family = DesingFamily(1, 0.3)
    with pytest.raises(OutOfChartError):
        flow_residual(family, family.limit, 0.0)


def test_block_pfaffian_is_alpha():
    family = DesingFamily(1, 0.3)
    box = ChartBox([(-0.5, 0.5), (-1.0, 1.0), (-0.5, 0.5), (-1.0, 1.0)])
    chart = desing_groupoid_chart(family, box=box)
    for a, x in FLOW_POINTS:
        z = [a, 0.3, x, 0.1]
        assert chart.admissible(np.array(z))
        assert block_pfaffian(chart, z) == pytest.approx(desing_alpha(family, a, x), abs=1e-7)
        assert block_pfaffian(chart, z) > 0.0
