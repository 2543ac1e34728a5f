"""
Local groupoid of a commutative frame.

Arrows are pairs (v, u) with v in R^k and u in the base chart. The source
is u, the target is the time-1 flow of sum v_i X_i from u, and composition
adds the v parts.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist

from src.flows.integrator import IntegratorSettings
from src.flows.time_one import time1_flow
from src.geometry.errors import DimensionMismatchError, NonComposableError, OutOfChartError
from src.geometry.probes import ChartBox, probe_points
from src.groupoid.frame import AnchoredFrame, verify_commutative_frame

logger = logging.getLogger(__name__)

COMPOSABLE_TOL = 1e-9
AXIOM_TOL = 1e-7


class Arrow:
    def __init__(self, v: Sequence[float], u: Sequence[float]):
        self.v = np.asarray(v, dtype=float).reshape(-1)
        self.u = np.asarray(u, dtype=float).reshape(-1)

    def as_point(self) -> np.ndarray:
        return np.concatenate([self.v, self.u])

    def __repr__(self) -> str:
        return f"Arrow(v={self.v.tolist()}, u={self.u.tolist()})"


class ChartGroupoid:
    def __init__(
        self,
        frame: AnchoredFrame,
        arrow_box: ChartBox,
        base_box: ChartBox,
        name: str = "",
        settings: Optional[IntegratorSettings] = None,
    ):
        if arrow_box.dimension != frame.rank:
            raise DimensionMismatchError(f"Arrow box has dimension {arrow_box.dimension}, frame rank {frame.rank}")
        if base_box.dimension != frame.dimension:
            raise DimensionMismatchError(f"Base box has dimension {base_box.dimension}, chart {frame.dimension}")
        if not arrow_box.contains(np.zeros(frame.rank)):
            raise ValueError("The arrow box must contain the zero section")
        self.frame = frame
        self.arrow_box = arrow_box
        self.base_box = base_box
        self.name = name or frame.name
        self.settings = settings

    def contains(self, arrow: Arrow) -> bool:
        return self.arrow_box.contains(arrow.v) and self.base_box.contains(arrow.u)

    def source(self, arrow: Arrow) -> np.ndarray:
        return arrow.u.copy()

    def target(self, arrow: Arrow) -> np.ndarray:
        return np.asarray(time1_flow(self.frame.fields, list(arrow.v), list(arrow.u), self.settings), dtype=float)

    def identity(self, u: Sequence[float]) -> Arrow:
        return Arrow(np.zeros(self.frame.rank), u)

    def inverse(self, arrow: Arrow) -> Arrow:
        return Arrow(-arrow.v, self.target(arrow))

    def compose(self, g: Arrow, h: Arrow, check_box: bool = True) -> Arrow:
        """g o h, defined when source(g) = target(h)."""
        gap = float(np.max(np.abs(self.source(g) - self.target(h))))
        if gap >= COMPOSABLE_TOL:
            raise NonComposableError(f"source(g) and target(h) differ by {gap:.3g}")
        result = Arrow(g.v + h.v, h.u)
        if check_box and not self.contains(result):
            raise OutOfChartError(f"Composite {result} leaves the declared arrow box")
        return result

    def __repr__(self) -> str:
        return f"ChartGroupoid({self.name}, rank={self.frame.rank})"


class AxiomReport:
    """Largest defect per axiom over composable triples (h, g, k)."""

    AXIOMS = ("target", "source", "associativity", "inverse")

    def __init__(
        self,
        defects: Dict[str, float],
        witnesses: Dict[str, Tuple[Arrow, Arrow]],
        frame_commutes: bool,
        bracket_norm: float,
        tolerance: float = AXIOM_TOL,
        triples: int = 0,
    ):
        self.defects = defects
        self.witnesses = witnesses
        self.frame_commutes = frame_commutes
        self.bracket_norm = bracket_norm
        self.tolerance = tolerance
        self.triples = triples

    @property
    def max_defect(self) -> float:
        return max(self.defects.values(), default=0.0)

    @property
    def failing(self) -> List[str]:
        return [name for name in self.AXIOMS if self.defects.get(name, 0.0) >= self.tolerance]

    @property
    def passed(self) -> bool:
        return not self.failing

    def __repr__(self) -> str:
        return f"AxiomReport(max_defect={self.max_defect:.3g}, commutes={self.frame_commutes}, failing={self.failing})"


def composable_triples(
    groupoid: ChartGroupoid, seed: int = 0, count: int = 16, shrink: float = 1.0 / 3.0
) -> List[Tuple[Arrow, Arrow, Arrow]]:
    """
    Triples h = (w, u), g = (v, t(h)), k = (v', t(g)) with v-parts drawn from
    the arrow box scaled by `shrink`, so that all composites stay inside it.
    """
    rng = np.random.default_rng(seed)
    bases = probe_points(groupoid.base_box, seed=seed, count=count, grid=0)
    lo, hi = shrink * groupoid.arrow_box.lower, shrink * groupoid.arrow_box.upper
    triples = []
    for u in bases:
        w, v, v2 = (rng.uniform(lo, hi) for _ in range(3))
        h = Arrow(w, u)
        g = Arrow(v, groupoid.target(h))
        k = Arrow(v2, groupoid.target(g))
        triples.append((h, g, k))
    return triples


def verify_axioms(
    groupoid: ChartGroupoid,
    triples: Sequence[Tuple[Arrow, Arrow, Arrow]],
    probes: Optional[Sequence] = None,
    tolerance: float = AXIOM_TOL,
) -> AxiomReport:
    """
    Commutativity of the frame first, then over every triple:
    |t(g o h) - t(g)|, |s(g o h) - s(h)|, |t((k o g) o h) - t(k)| and
    |t(h^-1) - s(h)|.
    """
    if probes is None:
        probes = [h.u for h, _, _ in triples]
    commutes, bracket_norm = verify_commutative_frame(groupoid.frame, probes)

    defects = {name: 0.0 for name in AxiomReport.AXIOMS}
    witnesses: Dict[str, Tuple[Arrow, Arrow]] = {}

    def record(name: str, value: float, pair: Tuple[Arrow, Arrow]) -> None:
        if value > defects[name] or name not in witnesses:
            defects[name] = max(defects[name], value)
            witnesses[name] = pair

    for h, g, k in triples:
        gh = groupoid.compose(g, h, check_box=False)
        t_g = groupoid.target(g)
        record("target", float(np.max(np.abs(groupoid.target(gh) - t_g))), (g, h))
        record("source", float(np.max(np.abs(groupoid.source(gh) - groupoid.source(h)))), (g, h))
        kg_h = groupoid.compose(groupoid.compose(k, g, check_box=False), h, check_box=False)
        record("associativity", float(np.max(np.abs(groupoid.target(kg_h) - groupoid.target(k)))), (k, h))
        h_inv = groupoid.inverse(h)
        record("inverse", float(np.max(np.abs(groupoid.target(h_inv) - h.u))), (h_inv, h))

    report = AxiomReport(defects, witnesses, commutes, bracket_norm, tolerance, len(triples))
    for name in report.failing:
        g, h = witnesses[name]
        logger.info("Groupoid %s: %s axiom defect %.3g at %s, %s", groupoid.name, name, defects[name], g, h)
    return report


def pair_map_separation(groupoid: ChartGroupoid, arrows: Sequence[Arrow]) -> Tuple[float, float]:
    """
    Injectivity witness for (target, source): the smallest pairwise distance
    between images, and the smallest ratio of image distance to arrow distance.
    """
    if len(arrows) < 2:
        raise ValueError("Need at least two arrows")
    images = np.array([np.concatenate([groupoid.target(a), groupoid.source(a)]) for a in arrows])
    points = np.array([a.as_point() for a in arrows])
    image_gaps = pdist(images)
    arrow_gaps = pdist(points)
    ratios = image_gaps[arrow_gaps > 0] / arrow_gaps[arrow_gaps > 0]
    return float(np.min(image_gaps)), float(np.min(ratios)) if ratios.size else 0.0
