import numpy as np
import pytest

from src.flows.generators import monomial, scaled_monomial, sine
from src.geometry.errors import DegenerateStructureError, FactorizationError, NonCommutingFrameError
from src.geometry.fields import BivectorField
from src.geometry.probes import ChartBox, coordinate_locus, probe_points
from src.geometry.tensors import max_jacobiator, pfaffian4, pushforward_bivector
from src.realization.algebroid import (
    AiAlgebroidChart,
    EBivector,
    anchor_from_functions,
    check_nondegenerate,
    e_symplectic_to_poisson,
    poisson_to_e_form,
)
from src.realization.groupoid_poisson import (
    METHOD_CLOSED_FORM,
    METHOD_ODE,
    assemble_groupoid_poisson,
    identity_bisection_bivector,
    pair_chart_poisson,
)
from src.realization.multiplicativity import verify_multiplicativity_pushforwards
from src.verification import catalog

J2 = [[0.0, 1.0], [-1.0, 0.0]]
PLANE = ChartBox([(-1.0, 1.0), (-1.0, 1.0)], [coordinate_locus(0)], name="plane")


def plane_probes(count: int = 12):
    return probe_points(PLANE, seed=0, count=count, tube=0.05)


# (name, frame, W, expected bivector)
E_SYMPLECTIC_CASES = [
    ("b frame with the standard form", "b", J2, "x_dx_dy"),
    ("scaling frame on R^4", "scaling_r4", [[0.0, -1.0], [1.0, 0.0]], "scaling_r4"),
]


@pytest.mark.parametrize("name,frame,w,expected", E_SYMPLECTIC_CASES, ids=[c[0] for c in E_SYMPLECTIC_CASES])
def test_e_symplectic_to_poisson(name, frame, w, expected):
    anchor = catalog.get_frame(frame)
    algebroid = AiAlgebroidChart(anchor)
    omega = EBivector.constant(w, anchor.dimension)
    pi = e_symplectic_to_poisson(algebroid, omega)
    reference = catalog.get_bivector(expected)
    box = ChartBox([(-1.0, 1.0)] * anchor.dimension)
    for p in probe_points(box, seed=4, count=10):
        np.testing.assert_allclose(pi.matrix(p), reference.matrix(p), atol=1e-12)
    assert max_jacobiator(pi, probe_points(box, seed=5, count=6))[0] < 1e-10


def test_zero_tangent_factorization():
    algebroid = AiAlgebroidChart(catalog.get_frame("zero_tangent"))
    pi = catalog.get_bivector("x_dx_dy")
    probes = plane_probes()
    omega, factorization = poisson_to_e_form(pi, algebroid, probes)
    report = factorization.validate(probes)
    assert report.passed, report
    expected_omega = catalog.get_e_form("x_alpha_beta")
    for p in probes:
        np.testing.assert_allclose(factorization.matrix(p), [[0.0, -1.0], [1.0, 0.0]], atol=1e-12)
        np.testing.assert_allclose(omega.matrix(p), expected_omega(p), atol=1e-10)


def test_factorization_skips_points_where_the_anchor_drops_rank():
    algebroid = AiAlgebroidChart(catalog.get_frame("zero_tangent"))
    _, factorization = poisson_to_e_form(catalog.get_bivector("x_dx_dy"), algebroid)
    report = factorization.validate([[0.0, 0.3], [0.5, 0.3]])
    assert report.checked == 1
    assert len(report.skipped) == 1


def test_round_trip_recovers_the_bivector():
    algebroid = AiAlgebroidChart(catalog.get_frame("zero_tangent"))
    pi = catalog.get_bivector("x_dx_dy")
    probes = plane_probes()
    omega, _ = poisson_to_e_form(pi, algebroid, probes)
    back = e_symplectic_to_poisson(algebroid, omega)
    for p in probes:
        np.testing.assert_allclose(back.matrix(p), pi.matrix(p), atol=1e-10)


def test_bivector_that_does_not_factor_is_rejected():
    algebroid = anchor_from_functions(2, [lambda x, y: [1.0, 0.0]], name="d_x")
    pi = BivectorField.constant(J2, name="dx^dy")
    with pytest.raises(FactorizationError):
        poisson_to_e_form(pi, algebroid, plane_probes())


def test_degenerate_form_is_rejected():
    with pytest.raises(DegenerateStructureError):
        check_nondegenerate(EBivector.constant(np.zeros((2, 2)), 2), plane_probes(4))
    assert check_nondegenerate(EBivector.constant(J2, 2), plane_probes(4)) == pytest.approx(1.0)


def test_injective_fraction():
    algebroid = AiAlgebroidChart(catalog.get_frame("zero_tangent"))
    assert algebroid.injective_fraction([[0.0, 0.1], [0.2, 0.1], [0.4, -0.3], [0.0, 1.0]]) == 0.5
    assert algebroid.injective_fraction([]) == 0.0


# --- flow groupoids ---

GENERATOR_CASES = [
    ("b", monomial(1), METHOD_CLOSED_FORM),
    ("b2", monomial(2), METHOD_CLOSED_FORM),
    ("b3 ode", monomial(3), METHOD_ODE),
    ("sine", sine(), METHOD_ODE),
]


def flow_probes(chart, count: int = 10):
    return probe_points(chart.box, seed=1, count=count, grid=0, accept=chart.admissible)


@pytest.mark.parametrize("name,f,method", GENERATOR_CASES, ids=[c[0] for c in GENERATOR_CASES])
def test_flow_groupoid_is_poisson_and_multiplicative(name, f, method):
    chart = assemble_groupoid_poisson(f, method=method)
    probes = flow_probes(chart)
    assert max_jacobiator(chart.bivector, probes)[0] < 1e-7
    report = verify_multiplicativity_pushforwards(chart.bivector, chart.source, chart.target, chart.base, probes)
    assert report.passed, report
    assert report.probes == len(probes)


@pytest.mark.parametrize("name,f,method", GENERATOR_CASES, ids=[c[0] for c in GENERATOR_CASES])
def test_pfaffian_of_the_flow_block_is_alpha(name, f, method):
    chart = assemble_groupoid_poisson(f, method=method)
    for z in flow_probes(chart, 6):
        matrix = chart.bivector.matrix(z)
        assert pfaffian4(matrix) == pytest.approx(matrix[1, 2], abs=1e-12)
        assert pfaffian4(matrix) > 0.0


def test_source_pushforward_of_the_b_case():
    chart = assemble_groupoid_poisson(monomial(1), method=METHOD_CLOSED_FORM)
    z = [0.3, -0.2, 0.6, 0.1]
    assert pushforward_bivector(chart.source, chart.bivector, z)[0, 1] == pytest.approx(-0.6)
    # target pushforward is f at the target point x e^a
    target = chart.target(z)
    assert pushforward_bivector(chart.target, chart.bivector, z)[0, 1] == pytest.approx(target[0])


def test_oracle_coefficients_for_x_squared():
    chart = assemble_groupoid_poisson(monomial(2), method=METHOD_CLOSED_FORM)
    oracle = catalog.bm_oracle(2)
    for a, b, x in [(0.3, 0.5, -0.4), (-0.7, 1.0, 0.9), (0.0, -0.2, 0.5)]:
        matrix = chart.bivector.matrix([a, b, x, 0.25])
        observed = (matrix[0, 3], matrix[1, 2], matrix[1, 3], matrix[2, 3])
        np.testing.assert_allclose(observed, oracle(a, b, x), atol=1e-12)


def test_ode_and_closed_form_assemblies_agree():
    closed = assemble_groupoid_poisson(monomial(2), method=METHOD_CLOSED_FORM)
    ode = assemble_groupoid_poisson(monomial(2), method=METHOD_ODE)
    for z in flow_probes(closed, 6):
        np.testing.assert_allclose(ode.bivector.matrix(z), closed.bivector.matrix(z), atol=1e-8)


@pytest.mark.parametrize("f", [monomial(2), sine()], ids=lambda f: f.name)
def test_identity_section_carries_half_the_derivative(f):
    chart = assemble_groupoid_poisson(f, method=METHOD_ODE)
    b, x = 0.7, 0.5
    at_identity = chart.bivector.matrix([0.0, b, x, 0.0])
    nearby = chart.bivector.matrix([1e-9, b, x, 0.0])
    assert at_identity[1, 3] == pytest.approx(b * f.derivative(x) / 2.0, rel=1e-12)
    assert at_identity[1, 3] == pytest.approx(nearby[1, 3], rel=1e-6)


def test_sign_flip_breaks_multiplicativity():
    f = monomial(1)
    flipped = assemble_groupoid_poisson(f, method=METHOD_CLOSED_FORM, sign=-1.0)
    report = verify_multiplicativity_pushforwards(
        flipped.bivector, flipped.source, flipped.target, flipped.base, flow_probes(flipped)
    )
    assert report.max_defect > 1e-3
    assert not report.passed


def test_constant_block_and_casimir_parameter():
    f = scaled_monomial(2)
    box = ChartBox([(-0.3, 0.3), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)] + [(-1.0, 1.0)] * 5)
    chart = assemble_groupoid_poisson(f, pi0=J2, box=box)
    assert chart.dimension == 9
    assert chart.base.dimension == 5
    probes = probe_points(box, seed=2, count=5, grid=0)
    assert max_jacobiator(chart.bivector, probes)[0] < 1e-7
    report = verify_multiplicativity_pushforwards(chart.bivector, chart.source, chart.target, chart.base, probes)
    assert report.passed, report


def test_closed_form_needs_a_monomial():
    with pytest.raises(ValueError):
        assemble_groupoid_poisson(sine(), method=METHOD_CLOSED_FORM)
    with pytest.raises(ValueError):
        assemble_groupoid_poisson(monomial(2), method="euler")


# --- pair charts and the identity bisection ---


def test_pair_chart_of_the_b_frame():
    frame = catalog.get_frame("b")
    unit = ChartBox([(-1.0, 1.0), (-1.0, 1.0)])
    chart = pair_chart_poisson(frame, EBivector.constant(J2, 2), unit, unit)
    probes = probe_points(chart.box, seed=3, count=8)
    reference = catalog.get_bivector("x_dx_dy")
    for z in probes:
        np.testing.assert_allclose(chart.base.matrix(z[2:]), reference.matrix(z[2:]), atol=1e-12)
    assert max_jacobiator(chart.bivector, probes)[0] < 1e-7
    report = verify_multiplicativity_pushforwards(chart.bivector, chart.source, chart.target, chart.base, probes)
    assert report.passed, report


def test_pair_chart_needs_a_commuting_frame():
    frame = catalog.get_frame("zero_tangent")
    unit = ChartBox([(-1.0, 1.0), (-1.0, 1.0)])
    with pytest.raises(NonCommutingFrameError):
        pair_chart_poisson(frame, EBivector.constant(J2, 2), unit, unit)


@pytest.mark.parametrize("m", [1, 2])
def test_identity_bisection_matches_the_assembled_groupoid(m):
    f = monomial(m)
    algebroid, pi = catalog.flow_algebroid(f)
    probes = plane_probes(8)
    omega, factorization = poisson_to_e_form(pi, algebroid, probes)
    dual = factorization.dual_frame()
    chart = assemble_groupoid_poisson(f, method=METHOD_CLOSED_FORM)
    for u in probes:
        bisection = identity_bisection_bivector(dual, omega, u)
        np.testing.assert_allclose(bisection, chart.bivector.matrix([0.0, 0.0, u[0], u[1]]), atol=1e-9)
        assert np.linalg.matrix_rank(bisection, tol=1e-9) == 4
