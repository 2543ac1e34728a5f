import math

import numpy as np
import pytest

from src.geometry.errors import DimensionMismatchError, NonComposableError, OutOfChartError
from src.geometry.probes import ChartBox, probe_points
from src.groupoid.chart import Arrow, ChartGroupoid, composable_triples, pair_map_separation, verify_axioms
from src.groupoid.frame import max_bracket_norm, verify_commutative_frame
from src.verification import catalog

UNIT_SQUARE = [(-1.0, 1.0), (-1.0, 1.0)]

# (frame, commutes)
FRAME_CASES = [
    ("translations", True),
    ("b", True),
    ("zero_tangent", False),
]


def make_groupoid(frame_name: str) -> ChartGroupoid:
    return ChartGroupoid(catalog.get_frame(frame_name), ChartBox(UNIT_SQUARE), ChartBox(UNIT_SQUARE), name=frame_name)


@pytest.mark.parametrize("frame_name,commutes", FRAME_CASES, ids=[c[0] for c in FRAME_CASES])
def test_frame_commutativity(frame_name, commutes):
    frame = catalog.get_frame(frame_name)
    probes = probe_points(ChartBox(UNIT_SQUARE), seed=0, count=16)
    ok, worst = verify_commutative_frame(frame, probes)
    assert ok is commutes
    assert (worst < 1e-12) is commutes


def test_bracket_of_zero_tangent_frame():
    # [x d_x, x d_y] = x d_y
    frame = catalog.get_frame("zero_tangent")
    np.testing.assert_allclose(frame.bracket(0, 1, [0.6, -0.2]), [0.0, 0.6])
    worst, witness = max_bracket_norm(frame, [[0.1, 0.0], [-0.9, 0.3]])
    assert worst == pytest.approx(0.9)
    np.testing.assert_allclose(witness, [-0.9, 0.3])


@pytest.mark.parametrize("frame_name", ["translations", "b"])
def test_axioms_hold_for_commuting_frames(frame_name):
    groupoid = make_groupoid(frame_name)
    report = verify_axioms(groupoid, composable_triples(groupoid, seed=1, count=12))
    assert report.frame_commutes
    assert report.passed, report
    assert report.max_defect < 1e-7
    assert report.triples == 12


def test_non_commuting_frame_breaks_composition():
    groupoid = make_groupoid("zero_tangent")
    report = verify_axioms(groupoid, composable_triples(groupoid, seed=0, count=16))
    assert not report.frame_commutes
    assert report.defects["target"] > 1e-3
    assert "target" in report.failing


def test_b_frame_targets():
    groupoid = make_groupoid("b")
    arrow = Arrow([0.5, -0.25], [0.4, 0.1])
    np.testing.assert_allclose(groupoid.target(arrow), [0.4 * math.exp(0.5), -0.15], rtol=1e-10)
    np.testing.assert_array_equal(groupoid.source(arrow), [0.4, 0.1])


def test_identity_and_inverse():
    groupoid = make_groupoid("b")
    u = np.array([0.3, -0.4])
    np.testing.assert_allclose(groupoid.target(groupoid.identity(u)), u)
    h = Arrow([0.2, 0.1], u)
    h_inv = groupoid.inverse(h)
    np.testing.assert_allclose(groupoid.source(h_inv), groupoid.target(h))
    np.testing.assert_allclose(groupoid.target(h_inv), u, atol=1e-11)
    back = groupoid.compose(h_inv, h)
    np.testing.assert_allclose(back.v, [0.0, 0.0])


def test_compose_needs_matching_source_and_target():
    groupoid = make_groupoid("translations")
    h = Arrow([0.1, 0.1], [0.0, 0.0])
    g = Arrow([0.1, 0.1], [0.5, 0.5])
    with pytest.raises(NonComposableError):
        groupoid.compose(g, h)


def test_compose_stays_in_the_arrow_box():
    groupoid = make_groupoid("translations")
    h = Arrow([0.8, 0.0], [0.0, 0.0])
    g = Arrow([0.8, 0.0], groupoid.target(h))
    with pytest.raises(OutOfChartError):
        groupoid.compose(g, h)
    assert groupoid.compose(g, h, check_box=False).v[0] == pytest.approx(1.6)


def test_boxes_must_match_the_frame():
    frame = catalog.get_frame("b")
    with pytest.raises(DimensionMismatchError):
        ChartGroupoid(frame, ChartBox([(-1.0, 1.0)]), ChartBox(UNIT_SQUARE))
    with pytest.raises(ValueError):
        ChartGroupoid(frame, ChartBox([(0.5, 1.0), (-1.0, 1.0)]), ChartBox(UNIT_SQUARE))


def test_pair_map_separates_arrows():
    groupoid = make_groupoid("translations")
    arrows = [arrow for triple in composable_triples(groupoid, seed=2, count=6) for arrow in triple]
    gap, ratio = pair_map_separation(groupoid, arrows)
    assert gap > 0.0
    # (v, u) -> (u + v, u) has smallest singular value (sqrt(5) - 1)/2
    assert ratio > 0.5
    with pytest.raises(ValueError):
        pair_map_separation(groupoid, arrows[:1])
