import logging
from typing import Optional, Sequence

import numpy as np

from src.geometry.fields import BivectorField, SmoothMap, as_point
from src.geometry.tensors import pushforward_bivector

logger = logging.getLogger(__name__)

PUSHFORWARD_TOL = 1e-6


class MultiplicativityReport:
    def __init__(
        self,
        source_defect: float,
        target_defect: float,
        source_witness: Optional[np.ndarray],
        target_witness: Optional[np.ndarray],
        probes: int,
        tolerance: float = PUSHFORWARD_TOL,
    ):
        self.source_defect = source_defect
        self.target_defect = target_defect
        self.source_witness = source_witness
        self.target_witness = target_witness
        self.probes = probes
        self.tolerance = tolerance

    @property
    def max_defect(self) -> float:
        return max(self.source_defect, self.target_defect)

    @property
    def witness(self) -> Optional[np.ndarray]:
        return self.source_witness if self.source_defect >= self.target_defect else self.target_witness

    @property
    def passed(self) -> bool:
        return self.max_defect < self.tolerance

    def __repr__(self) -> str:
        return f"MultiplicativityReport(s={self.source_defect:.3g}, t={self.target_defect:.3g}, probes={self.probes})"


def verify_multiplicativity_pushforwards(
    pi_g: BivectorField,
    source: SmoothMap,
    target: SmoothMap,
    pi: BivectorField,
    probes: Sequence,
    tolerance: float = PUSHFORWARD_TOL,
) -> MultiplicativityReport:
    """max over probes of |s_* pi_G + pi(s)| and |t_* pi_G - pi(t)|."""
    s_worst = t_worst = 0.0
    s_witness = t_witness = None
    count = 0
    for g in probes:
        point = as_point(g, pi_g.dimension)
        s_defect = float(np.max(np.abs(pushforward_bivector(source, pi_g, point) + pi.matrix(source(point))), initial=0.0))
        t_defect = float(np.max(np.abs(pushforward_bivector(target, pi_g, point) - pi.matrix(target(point))), initial=0.0))
        if s_witness is None or s_defect > s_worst:
            s_worst, s_witness = s_defect, point
        if t_witness is None or t_defect > t_worst:
            t_worst, t_witness = t_defect, point
        count += 1
    report = MultiplicativityReport(s_worst, t_worst, s_witness, t_witness, count, tolerance)
    if not report.passed:
        logger.info("Pushforward defect %.3g at %s", report.max_defect, report.witness)
    return report
