import logging
from typing import List, Sequence, Tuple

import numpy as np

from src.geometry.errors import DimensionMismatchError
from src.geometry.fields import VectorField, as_point
from src.geometry.jet import Jet

logger = logging.getLogger(__name__)

COMMUTING_TOL = 1e-9


class AnchoredFrame:
    """
    k vector fields X_1..X_k on a chart, read as the anchor images rho(e_i)
    of a trivialized algebroid.
    """

    def __init__(self, fields: Sequence[VectorField], name: str = ""):
        if not fields:
            raise DimensionMismatchError("A frame needs at least one vector field")
        dims = {(f.dimension, f.size) for f in fields}
        if len(dims) != 1:
            raise DimensionMismatchError(f"Frame fields live on different charts: {sorted(dims)}")
        dimension, size = dims.pop()
        if dimension != size:
            raise DimensionMismatchError("Frame fields must be tangent to their chart")
        self.fields = list(fields)
        self.name = name

    @property
    def rank(self) -> int:
        return len(self.fields)

    @property
    def dimension(self) -> int:
        return self.fields[0].dimension

    def anchor_matrix(self, p) -> np.ndarray:
        """n x k matrix whose columns are X_i(p)."""
        point = as_point(p, self.dimension)
        return np.column_stack([f.at(point) for f in self.fields])

    def anchor_jets(self, p, order: int = 1) -> List[List[Jet]]:
        """rho[l][i] = X_i^l as jets at p."""
        columns = [f.jets(p, order) for f in self.fields]
        return [[columns[i][l] for i in range(self.rank)] for l in range(self.dimension)]

    def anchor_rank(self, p, rcond: float = 1e-10) -> int:
        s = np.linalg.svd(self.anchor_matrix(p), compute_uv=False)
        return int(np.sum(s > rcond * max(s[0], 1.0))) if s.size else 0

    def bracket_jets(self, i: int, j: int, p, order: int = 0) -> List[Jet]:
        """[X_i, X_j]^l = X_i^m d_m X_j^l - X_j^m d_m X_i^l, as jets of `order`."""
        xi = self.fields[i].jets(p, order + 1)
        xj = self.fields[j].jets(p, order + 1)
        n = self.dimension
        result = []
        for l in range(n):
            total = Jet.constant(0.0, n, order)
            for m in range(n):
                total = total + xi[m].truncate(order) * xj[l].partial(m) - xj[m].truncate(order) * xi[l].partial(m)
            result.append(total)
        return result

    def bracket(self, i: int, j: int, p) -> np.ndarray:
        return np.array([jet.value for jet in self.bracket_jets(i, j, p, 0)])

    def __repr__(self) -> str:
        return f"AnchoredFrame({self.name or '?'}, rank={self.rank}, dim={self.dimension})"


def max_bracket_norm(frame: AnchoredFrame, probes: Sequence) -> Tuple[float, np.ndarray]:
    worst, witness = 0.0, None
    for p in probes:
        for i in range(frame.rank):
            for j in range(i + 1, frame.rank):
                norm = float(np.linalg.norm(frame.bracket(i, j, p)))
                if norm > worst or witness is None:
                    worst, witness = max(worst, norm), np.asarray(p, dtype=float)
    return worst, witness


def verify_commutative_frame(frame: AnchoredFrame, probes: Sequence, tol: float = COMMUTING_TOL) -> Tuple[bool, float]:
    """(all brackets below tol, largest bracket norm) over the probes."""
    worst, witness = max_bracket_norm(frame, probes)
    commutes = worst < tol
    if not commutes:
        logger.info("Frame %s does not commute: |[X_i, X_j]| = %.3g at %s", frame.name, worst, witness)
    return commutes, worst
