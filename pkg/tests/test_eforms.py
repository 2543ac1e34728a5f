import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from src.eforms.darboux import SplitForm, canonical_form, closedness_commutativity_check, symplectic_gram_schmidt
from src.eforms.forms import EForm, algebroid_d, exterior_derivative, is_closed
from src.eforms.structure import fit_structure_functions
from src.geometry import jetmath
from src.geometry.errors import DegenerateStructureError, DimensionMismatchError
from src.geometry.fields import ScalarField
from src.geometry.probes import ChartBox, coordinate_locus, probe_points
from src.verification import catalog


def probes_for(frame, count: int = 8):
    box = ChartBox([(-1.0, 1.0)] * frame.dimension, [coordinate_locus(0)])
    return probe_points(box, seed=0, count=count, grid=0, tube=0.05)


def test_structure_functions_of_the_zero_tangent_frame():
    # [x d_x, x d_y] = x d_y = X_2
    frame = catalog.get_frame("zero_tangent")
    structure = fit_structure_functions(frame, probes_for(frame))
    assert structure.passed
    np.testing.assert_allclose(structure.coefficients(0, 1, [0.4, 0.2]), [0.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(structure.coefficients(1, 0, [0.4, 0.2]), [0.0, -1.0], atol=1e-12)
    assert structure.tensor([0.4, 0.2])[1, 0, 1] == pytest.approx(1.0)


def test_structure_fit_skips_rank_deficient_points():
    frame = catalog.get_frame("zero_tangent")
    structure = fit_structure_functions(frame, [[0.0, 0.5], [0.3, 0.5]])
    assert structure.checked == 1
    assert len(structure.skipped) == 1


def test_differential_of_a_coordinate_on_the_b_frame():
    frame = catalog.get_frame("b")
    y = EForm.function(ScalarField.coordinate(2, 1, name="y"), frame.rank)
    dy = exterior_derivative(y, frame)
    values = dy.at([0.7, -0.3])
    assert values.get((0,), 0.0) == pytest.approx(0.0)
    assert values[(1,)] == pytest.approx(1.0)


def test_differential_of_duals_reads_the_structure_functions():
    frame = catalog.get_frame("heisenberg")
    structure = fit_structure_functions(frame, probes_for(frame))
    d_alpha = exterior_derivative(EForm.dual(2, 3, 3), frame, structure)
    assert d_alpha.at([0.2, 0.1, -0.4])[(0, 1)] == pytest.approx(-1.0)


def test_cartan_formula_on_a_one_form():
    # d(psi alpha_1)(X_1, X_2) = -X_2(psi) - psi alpha_1([X_1, X_2]) = -x (1 - sin z)
    frame = catalog.get_frame("heisenberg")
    structure = fit_structure_functions(frame, probes_for(frame))
    psi = ScalarField(3, lambda x, y, z: x * y + jetmath.cos(z))
    theta = EForm.dual(0, 3, 3).scaled(psi)
    x, y, z = 0.5, -0.3, 0.8
    values = algebroid_d(theta, frame, structure, [x, y, z])
    assert values[(0, 1)] == pytest.approx(-x * (1.0 - math.sin(z)), abs=1e-10)


def test_top_degree_forms_are_closed():
    frame = catalog.get_frame("zero_tangent")
    x = ScalarField.coordinate(2, 0, name="x")
    omega = EForm.dual(0, 2, 2).wedge(EForm.dual(1, 2, 2)).scaled(x)
    assert omega.degree == 2
    assert is_closed(omega, frame, None, probes_for(frame)) == (True, 0.0)
    with pytest.raises(ValueError):
        exterior_derivative(omega, frame)


@pytest.mark.parametrize("frame_name", ["heisenberg", "zero_tangent", "constant_r4"])
def test_d_squared_vanishes_on_functions(frame_name):
    frame = catalog.get_frame(frame_name)
    probes = probes_for(frame, 5)
    structure = fit_structure_functions(frame, probes)
    phi = ScalarField(frame.dimension, lambda *u: jetmath.sin(u[0]) * jetmath.exp(0.5 * u[-1]) + u[0] * u[-1] ** 2)
    dd = exterior_derivative(exterior_derivative(EForm.function(phi, frame.rank), frame, structure), frame, structure)
    assert max(dd.norm_at(p) for p in probes) < 1e-7


def test_d_squared_vanishes_on_one_forms():
    frame = catalog.get_frame("heisenberg")
    probes = probes_for(frame, 5)
    structure = fit_structure_functions(frame, probes)
    psi = ScalarField(3, lambda x, y, z: x * y + jetmath.cos(z))
    theta = EForm.dual(0, 3, 3).scaled(psi) + EForm.dual(1, 3, 3)
    dd = exterior_derivative(exterior_derivative(theta, frame, structure), frame, structure)
    assert max(dd.norm_at(p) for p in probes) < 1e-7


# (frame, (duals closed, dual frame commutes))
DARBOUX_CASES = [
    ("b", (True, True)),
    ("translations", (True, True)),
    ("constant_r4", (True, True)),
    ("zero_tangent", (False, False)),
]


@pytest.mark.parametrize("frame_name,expected", DARBOUX_CASES, ids=[c[0] for c in DARBOUX_CASES])
def test_closed_split_forms_match_commuting_dual_frames(frame_name, expected):
    frame = catalog.get_frame(frame_name)
    split = SplitForm.from_duals(frame.rank, frame.dimension)
    assert closedness_commutativity_check(frame, split, probes_for(frame)) == expected


def test_split_form_to_eform():
    omega = SplitForm.from_duals(4, 4).to_eform()
    values = omega.at(np.zeros(4))
    assert values == {(0, 1): 1.0, (2, 3): 1.0}


def test_split_form_needs_an_even_coframe():
    with pytest.raises(ValueError):
        SplitForm([EForm.dual(0, 3, 3), EForm.dual(1, 3, 3), EForm.dual(2, 3, 3)])
    with pytest.raises(DimensionMismatchError):
        closedness_commutativity_check(catalog.get_frame("b"), SplitForm.from_duals(4, 4), [[0.5, 0.5]])


def test_bad_multi_index_is_rejected():
    with pytest.raises(ValueError):
        EForm(2, 2, 2, {(1, 0): ScalarField.constant(2, 1.0)})


def test_gram_schmidt_of_canonical_form_is_identity():
    np.testing.assert_allclose(symplectic_gram_schmidt(canonical_form(4)), np.eye(4))


@pytest.mark.parametrize("scale", [3.0, -0.5])
def test_gram_schmidt_of_scaled_form(scale):
    w = scale * canonical_form(2)
    b = symplectic_gram_schmidt(w)
    np.testing.assert_allclose(b.T @ w @ b, canonical_form(2), atol=1e-12)


@given(arrays(np.float64, (4, 4), elements=st.floats(min_value=-0.25, max_value=0.25)))
def test_gram_schmidt_reaches_the_canonical_form(a):
    w = a - a.T + 3.0 * canonical_form(4)
    b = symplectic_gram_schmidt(w)
    np.testing.assert_allclose(b.T @ w @ b, canonical_form(4), atol=1e-9)


def test_degenerate_forms_have_no_darboux_basis():
    with pytest.raises(DegenerateStructureError):
        symplectic_gram_schmidt(np.zeros((2, 2)))
    with pytest.raises(DegenerateStructureError):
        canonical_form(3)
