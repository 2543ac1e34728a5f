import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.eforms.forms import EForm, is_closed
from src.eforms.structure import StructureFunctions, fit_structure_functions
from src.geometry import jetmath
from src.geometry.errors import ConsistencyError, DegenerateStructureError, DimensionMismatchError
from src.geometry.fields import ScalarField, VectorField, check_antisymmetric
from src.groupoid.frame import AnchoredFrame, verify_commutative_frame

logger = logging.getLogger(__name__)

NONDEGENERATE_TOL = 1e-12
CANONICAL_TOL = 1e-10


def canonical_form(size: int) -> np.ndarray:
    """Block diagonal with [[0, 1], [-1, 0]] blocks."""
    if size % 2:
        raise DegenerateStructureError(f"No symplectic form in odd rank {size}")
    j = np.zeros((size, size))
    for i in range(0, size, 2):
        j[i, i + 1] = 1.0
        j[i + 1, i] = -1.0
    return j


def symplectic_gram_schmidt(w) -> np.ndarray:
    """
    Columns B with B^T W B = canonical_form(k). Each step pairs the first
    remaining vector e with the remaining vector f of largest |W(e, f)|,
    normalizes W(e, f) = 1 and projects the rest off the pair.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise DimensionMismatchError("W must be square")
    check_antisymmetric(w)
    k = w.shape[0]
    if k % 2 or abs(np.linalg.det(w)) <= NONDEGENERATE_TOL:
        raise DegenerateStructureError("W is degenerate")

    pair = lambda u, v: float(u @ w @ v)
    remaining = [np.eye(k)[:, i] for i in range(k)]
    basis: List[np.ndarray] = []
    while remaining:
        e = remaining.pop(0)
        pairings = [abs(pair(e, v)) for v in remaining]
        best = int(np.argmax(pairings))
        if pairings[best] <= NONDEGENERATE_TOL:
            raise DegenerateStructureError("W is degenerate on the remaining span")
        f = remaining.pop(best)
        f = f / pair(e, f)
        remaining = [v + pair(v, e) * f - pair(v, f) * e for v in remaining]
        basis.extend([e, f])
    b = np.column_stack(basis)
    defect = float(np.max(np.abs(b.T @ w @ b - canonical_form(k))))
    if defect > CANONICAL_TOL * max(1.0, float(np.max(np.abs(w)))):
        logger.warning("Gram-Schmidt residual %.3g", defect)
    return b


class SplitForm:
    """omega = sum_i theta_{2i} ^ theta_{2i+1} for a coframe of E-1-forms."""

    def __init__(self, coframe: Sequence[EForm], name: str = ""):
        if not coframe or len(coframe) % 2:
            raise ValueError("A split form needs an even, nonempty coframe")
        first = coframe[0]
        for theta in coframe:
            if theta.degree != 1 or theta.rank != first.rank or theta.dimension != first.dimension:
                raise DimensionMismatchError("Coframe entries must be 1-forms on one frame")
        if len(coframe) != first.rank:
            raise DimensionMismatchError(f"{len(coframe)} coframe entries for rank {first.rank}")
        self.coframe = list(coframe)
        self.name = name

    @classmethod
    def from_duals(cls, rank: int, dimension: int, name: str = "") -> "SplitForm":
        return cls([EForm.dual(i, rank, dimension) for i in range(rank)], name=name)

    @property
    def rank(self) -> int:
        return self.coframe[0].rank

    @property
    def dimension(self) -> int:
        return self.coframe[0].dimension

    def pairs(self) -> List[Tuple[EForm, EForm]]:
        return [(self.coframe[i], self.coframe[i + 1]) for i in range(0, len(self.coframe), 2)]

    def to_eform(self) -> EForm:
        total = None
        for a, b in self.pairs():
            term = a.wedge(b)
            total = term if total is None else total + term
        total.name = self.name or "omega"
        return total

    def coframe_jets(self, p, order: int = 1) -> List[List]:
        """Theta[r][i] = theta_r(e_i) as jets."""
        k = self.rank
        rows = []
        for theta in self.coframe:
            row = []
            for i in range(k):
                field = theta.coefficients.get((i,))
                row.append(field.jet(p, order) if field is not None else 0.0)
            rows.append(row)
        return rows

    def dual_frame(self, frame: AnchoredFrame) -> AnchoredFrame:
        """Y_s = sum_i rho(e_i) (Theta^{-1})_{is}, the frame dual to the coframe."""
        n, k = frame.dimension, frame.rank

        def component(l, s):
            def jet_fn(p, r):
                inverse = jetmath.inverse(self.coframe_jets(p, r))
                rho = frame.anchor_jets(p, r)
                return sum((rho[l][i] * inverse[i][s] for i in range(k)), 0.0)

            return ScalarField.from_jet_function(n, jet_fn, name=f"Y{s}[{l}]")

        fields = [VectorField([component(l, s) for l in range(n)], name=f"Y{s}") for s in range(k)]
        return AnchoredFrame(fields, name=f"dual({self.name or 'coframe'})")

    def __repr__(self) -> str:
        return f"SplitForm({self.name or '?'}, rank={self.rank})"


def closedness_commutativity_check(
    frame: AnchoredFrame,
    split: SplitForm,
    probes: Sequence,
    structure: Optional[StructureFunctions] = None,
) -> Tuple[bool, bool]:
    """
    (every coframe 1-form is closed, the dual frame commutes), computed
    independently. The two must agree; a disagreement raises ConsistencyError.
    """
    probes = list(probes)
    if split.rank != frame.rank or split.dimension != frame.dimension:
        raise DimensionMismatchError(f"{split!r} does not live on {frame!r}")
    if structure is None:
        structure = fit_structure_functions(frame, probes)
    closed = []
    worst_closed = 0.0
    for theta in split.coframe:
        ok, norm = is_closed(theta, frame, structure, probes)
        closed.append(ok)
        worst_closed = max(worst_closed, norm)
    duals_closed = all(closed)
    commutes, bracket = verify_commutative_frame(split.dual_frame(frame), probes)
    if duals_closed != commutes:
        raise ConsistencyError(
            f"Closed duals ({duals_closed}, |d theta| = {worst_closed:.3g}) disagree with "
            f"commuting dual frame ({commutes}, |[Y_r, Y_s]| = {bracket:.3g}) on {frame.name}"
        )
    return duals_closed, commutes
