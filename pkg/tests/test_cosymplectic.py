import math

import numpy as np
import pytest

from src.cosymplectic.structure import CosymplecticStructure
from src.cosymplectic.symplectization import pair_chart_cosym_forms, pullback_one_form, symplectization_form
from src.geometry.errors import DegenerateStructureError, DimensionMismatchError, FibrationMismatchError
from src.geometry.fields import CovectorField, TwoFormField
from src.geometry.probes import ChartBox, probe_points
from src.geometry.tensors import max_jacobiator
from src.verification import catalog

CUBE = ChartBox([(-1.0, 1.0)] * 3, name="cube")
PAIR_BOX = ChartBox([(-1.0, 1.0)] * 5, name="pair")


def cube_probes(count: int = 8):
    return probe_points(CUBE, seed=0, count=count, grid=0)


def symplectization_probes(count: int = 6):
    arrows = probe_points(PAIR_BOX, seed=1, count=count, grid=0)
    fibre = np.linspace(-1.0, 1.0, len(arrows)).reshape(-1, 1)
    return arrows, np.hstack([fibre, arrows])


@pytest.mark.parametrize("name", ["mapping_torus", "twisted"])
def test_structures_are_cosymplectic(name):
    c = catalog.get_cosymplectic(name)
    probes = cube_probes()
    assert c.validate(probes)
    assert c.closedness(probes) < 1e-9
    for p in probes:
        assert c.volume_coefficient(p) == pytest.approx(1.0)


def test_mapping_torus_reeb_field():
    c = catalog.get_cosymplectic("mapping_torus")
    np.testing.assert_allclose(c.reeb_field([0.2, -0.5, 0.7]), [1.0, 0.0, 0.0], atol=1e-12)


def test_twisted_reeb_field():
    # iota_K omega = 0 with dq(K) = 1 gives K = d_q + sin z d_z - w cos z d_w
    c = catalog.get_cosymplectic("twisted")
    q, z, w = 0.3, 0.6, -0.4
    np.testing.assert_allclose(c.reeb_field([q, z, w]), [1.0, math.sin(z), -w * math.cos(z)], atol=1e-10)


@pytest.mark.parametrize("name", ["mapping_torus", "twisted"])
def test_induced_poisson_is_the_leafwise_inverse(name):
    c = catalog.get_cosymplectic(name)
    expected = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]])
    field = c.induced_poisson_field()
    for p in cube_probes():
        np.testing.assert_allclose(c.induced_poisson(p), expected, atol=1e-10)
        np.testing.assert_allclose(field.matrix(p), expected, atol=1e-10)
        assert c.kernel_check(p) == (2, pytest.approx(0.0, abs=1e-12))
    assert max_jacobiator(field, cube_probes())[0] < 1e-9


def test_alpha_tangent_to_omega_kernel_is_degenerate():
    omega = TwoFormField(3, lambda q, z, w: {(1, 2): 1.0}, name="dz^dw")
    alpha = CovectorField.from_function(3, lambda q, z, w: [0.0, 1.0, 0.0], name="dz")
    c = CosymplecticStructure(omega, alpha)
    assert c.volume_coefficient([0.1, 0.2, 0.3]) == 0.0
    assert not c.validate(cube_probes(2))
    with pytest.raises(DegenerateStructureError):
        c.reeb_field([0.1, 0.2, 0.3])


def test_even_dimensional_charts_are_rejected():
    omega = TwoFormField(2, lambda x, y: {(0, 1): 1.0}, name="dx^dy")
    alpha = CovectorField.from_function(2, lambda x, y: [1.0, 0.0], name="dx")
    c = CosymplecticStructure(omega, alpha)
    with pytest.raises(DimensionMismatchError):
        c.volume_coefficient([0.0, 0.0])
    with pytest.raises(DimensionMismatchError):
        CosymplecticStructure(omega, CovectorField.from_function(3, lambda q, z, w: [1.0, 0.0, 0.0]))


# --- symplectization of the pair chart ---


def test_pullback_along_the_source():
    chart = catalog.cosymplectic_pair_chart(PAIR_BOX)
    alpha = catalog.get_cosymplectic("mapping_torus").alpha
    pulled = pullback_one_form(chart.source, alpha)
    np.testing.assert_allclose(pulled.at([0.1, 0.2, 0.3, 0.4, 0.5]), [1.0, 0.0, 0.0, 0.0, 0.0])


@pytest.mark.parametrize("name", ["mapping_torus", "twisted"])
def test_symplectization_is_symplectic_and_projects(name):
    c = catalog.get_cosymplectic(name)
    chart = catalog.cosymplectic_pair_chart(PAIR_BOX)
    arrows, probes = symplectization_probes()
    omega_hat, alpha_hat = pair_chart_cosym_forms(c, chart, arrows)
    symplectization = symplectization_form(omega_hat, alpha_hat, chart, probes)
    assert symplectization.dimension == 6
    assert symplectization.closedness(probes) < 1e-9
    for p in probes:
        assert abs(symplectization.pfaffian(p)) == pytest.approx(1.0, abs=1e-9)
    assert symplectization.nondegeneracy(probes) == pytest.approx(1.0, abs=1e-9)
    assert symplectization.projection_defect(c.induced_poisson_field(), probes) < 1e-9


def test_mapping_torus_forms_on_the_pair_chart():
    c = catalog.get_cosymplectic("mapping_torus")
    chart = catalog.cosymplectic_pair_chart(PAIR_BOX)
    arrows, _ = symplectization_probes(3)
    omega_hat, alpha_hat = pair_chart_cosym_forms(c, chart, arrows)
    u = [0.1, 0.2, 0.3, 0.4, 0.5]
    matrix = omega_hat.matrix(u)
    assert matrix[1, 2] == pytest.approx(1.0)
    assert matrix[3, 4] == pytest.approx(-1.0)
    np.testing.assert_allclose(alpha_hat.at(u), [1.0, 0.0, 0.0, 0.0, 0.0])


def test_slanted_structure_is_not_fibred():
    c = catalog.get_cosymplectic("slanted")
    chart = catalog.cosymplectic_pair_chart(PAIR_BOX)
    arrows, _ = symplectization_probes(4)
    with pytest.raises(FibrationMismatchError):
        pair_chart_cosym_forms(c, chart, arrows)


def test_symplectization_rejects_bad_inputs():
    chart = catalog.cosymplectic_pair_chart(PAIR_BOX)
    _, probes = symplectization_probes(4)
    dq = CovectorField.from_function(5, lambda q, z1, w1, z, w: [1.0, 0.0, 0.0, 0.0, 0.0], name="dq")
    flat = TwoFormField(5, lambda *u: {(1, 2): 0.0}, name="0")
    with pytest.raises(DegenerateStructureError):
        symplectization_form(flat, dq, chart, probes)
    twisted_alpha = CovectorField.from_function(5, lambda q, z1, w1, z, w: [z1, 0.0, 0.0, 0.0, 0.0], name="z' dq")
    omega_hat, _ = pair_chart_cosym_forms(catalog.get_cosymplectic("mapping_torus"), chart, probes[:, 1:])
    with pytest.raises(DegenerateStructureError):
        symplectization_form(omega_hat, twisted_alpha, chart, probes)
    with pytest.raises(DimensionMismatchError):
        symplectization_form(TwoFormField(3, lambda *u: {(0, 1): 1.0}), dq, chart)
