import logging
from typing import List, Sequence

import numpy as np

from src.geometry import jetmath
from src.geometry.fields import ScalarField, as_point
from src.geometry.jet import Jet
from src.groupoid.frame import AnchoredFrame

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-7
RCOND = 1e-10


class StructureFunctions:
    """
    c^l_{ij} with [X_i, X_j] = sum_l c^l_{ij} X_l, solved pointwise by least
    squares against the anchor. Only i < j is solved; c^l_{ji} = -c^l_{ij}.
    """

    def __init__(self, frame: AnchoredFrame):
        self.frame = frame
        self.residual = 0.0
        self.checked = 0
        self.skipped: List[np.ndarray] = []

    @property
    def rank(self) -> int:
        return self.frame.rank

    @property
    def passed(self) -> bool:
        return self.checked > 0 and self.residual < RESIDUAL_TOL

    def coefficients(self, i: int, j: int, p) -> np.ndarray:
        """(c^1_{ij}, ..., c^k_{ij}) at p."""
        if i == j:
            return np.zeros(self.rank)
        if i > j:
            return -self.coefficients(j, i, p)
        rho = self.frame.anchor_matrix(p)
        c, *_ = np.linalg.lstsq(rho, self.frame.bracket(i, j, p), rcond=RCOND)
        return c

    def jets(self, i: int, j: int, p, order: int) -> List:
        n = self.frame.dimension
        if i == j:
            return [Jet.constant(0.0, n, order) for _ in range(self.rank)]
        if i > j:
            return [-c for c in self.jets(j, i, p, order)]
        rho = self.frame.anchor_jets(p, order)
        bracket = self.frame.bracket_jets(i, j, p, order)
        solution = jetmath.least_squares(rho, [[b] for b in bracket])
        return [Jet.lift(row[0], n, order) for row in solution]

    def field(self, l: int, i: int, j: int) -> ScalarField:
        return ScalarField.from_jet_function(
            self.frame.dimension, lambda p, r: self.jets(i, j, p, r)[l], name=f"c^{l}_{i}{j}"
        )

    def tensor(self, p) -> np.ndarray:
        """c[l, i, j] at p."""
        k = self.rank
        c = np.zeros((k, k, k))
        for i in range(k):
            for j in range(i + 1, k):
                c[:, i, j] = self.coefficients(i, j, p)
                c[:, j, i] = -c[:, i, j]
        return c

    def __repr__(self) -> str:
        return f"StructureFunctions({self.frame.name}, residual={self.residual:.3g}, skipped={len(self.skipped)})"


def fit_structure_functions(frame: AnchoredFrame, probes: Sequence) -> StructureFunctions:
    """Fit c^l_{ij} and record the bracket residual over probes with full anchor rank."""
    structure = StructureFunctions(frame)
    for p in probes:
        point = as_point(p, frame.dimension)
        if frame.anchor_rank(point, RCOND) < frame.rank:
            structure.skipped.append(point)
            continue
        rho = frame.anchor_matrix(point)
        for i in range(frame.rank):
            for j in range(i + 1, frame.rank):
                bracket = frame.bracket(i, j, point)
                c = structure.coefficients(i, j, point)
                structure.residual = max(structure.residual, float(np.linalg.norm(rho @ c - bracket)))
        structure.checked += 1
    if structure.skipped:
        logger.info("Structure fit on %s skipped %d rank-deficient probes", frame.name, len(structure.skipped))
    if structure.checked and structure.residual >= RESIDUAL_TOL:
        logger.warning("Frame %s is not involutive: bracket residual %.3g", frame.name, structure.residual)
    return structure
