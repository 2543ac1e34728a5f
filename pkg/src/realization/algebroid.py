"""
Almost injective algebroids in a frame, and the two directions between
E-symplectic forms and Poisson bivectors.

Matrix conventions: rho is the n x k anchor matrix (columns rho(e_i)), a
bivector pi^{ij} has sharp map v = Pi^T theta, and an E-2-form with
coefficient matrix W has dual E-bivector P = -W^{-1}.
"""

import logging
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.geometry import jetmath
from src.geometry.errors import DegenerateStructureError, DimensionMismatchError, FactorizationError
from src.geometry.fields import AntisymmetricField, BivectorField, ScalarField, VectorField, as_point
from src.geometry.jet import Jet
from src.groupoid.frame import AnchoredFrame

logger = logging.getLogger(__name__)

RCOND = 1e-10
FACTORIZATION_TOL = 1e-8
NONDEGENERATE_TOL = 1e-12


class AiAlgebroidChart:
    """Trivialized algebroid of rank k on an n-dimensional chart, given by its anchor frame."""

    def __init__(self, anchor: AnchoredFrame, name: str = ""):
        self.anchor = anchor
        self.name = name or anchor.name

    @property
    def rank(self) -> int:
        return self.anchor.rank

    @property
    def dimension(self) -> int:
        return self.anchor.dimension

    def anchor_matrix(self, p) -> np.ndarray:
        return self.anchor.anchor_matrix(p)

    def anchor_jets(self, p, order: int = 1) -> List[List[Jet]]:
        return self.anchor.anchor_jets(p, order)

    def is_injective_at(self, p) -> bool:
        return self.anchor.anchor_rank(p, RCOND) == self.rank

    def injective_fraction(self, probes: Sequence) -> float:
        """Share of probes where the anchor has full rank k."""
        probes = list(probes)
        if not probes:
            return 0.0
        return sum(self.is_injective_at(p) for p in probes) / len(probes)

    def __repr__(self) -> str:
        return f"AiAlgebroidChart({self.name}, k={self.rank}, n={self.dimension})"


class EBivector(AntisymmetricField):
    """k x k antisymmetric coefficients f_{ij} on an n-dimensional chart."""

    def __init__(self, rank: int, dimension: int, entries=None, jet_fn=None, name: str = ""):
        super().__init__(rank, entries, dimension=dimension, jet_fn=jet_fn, name=name)

    @classmethod
    def constant(cls, matrix, dimension: int, name: str = "") -> "EBivector":
        base = AntisymmetricField.constant(matrix, dimension=dimension)
        return cls(base.size, dimension, base._entries_fn, name=name)

    @classmethod
    def from_jet_function(cls, rank: int, dimension: int, jet_fn, name: str = "") -> "EBivector":
        return cls(rank, dimension, jet_fn=jet_fn, name=name)


def _upper(matrix: Sequence[Sequence]) -> dict:
    n = len(matrix)
    return {(i, j): matrix[i][j] for i in range(n) for j in range(i + 1, n)}


def check_nondegenerate(omega: AntisymmetricField, probes: Sequence, tol: float = NONDEGENERATE_TOL) -> float:
    """Smallest |det W| over the probes; raises if it drops below tol."""
    worst = np.inf
    for p in probes:
        det = abs(float(np.linalg.det(omega.matrix(p))))
        if det < tol:
            raise DegenerateStructureError(f"{omega.name or 'form'} is degenerate at {np.asarray(p).tolist()}")
        worst = min(worst, det)
    return float(worst)


def e_symplectic_to_poisson(algebroid: AiAlgebroidChart, omega: AntisymmetricField, name: str = "") -> BivectorField:
    """pi = rho P rho^T with P = -W^{-1} the E-bivector dual to omega."""
    if omega.size != algebroid.rank or omega.dimension != algebroid.dimension:
        raise DimensionMismatchError(
            f"E-form of size {omega.size} on dimension {omega.dimension} does not fit {algebroid!r}"
        )

    def jet_fn(point, order):
        w = omega.matrix_jets(point, order)
        p_dual = [[-v for v in row] for row in jetmath.inverse(w)]
        rho = algebroid.anchor_jets(point, order)
        return _upper(jetmath.matmul(jetmath.matmul(rho, p_dual), jetmath.transpose(rho)))

    return BivectorField.from_jet_function(algebroid.dimension, jet_fn, name=name or f"rho({omega.name})")


class FactorizationReport:
    def __init__(self, residual: float, compatibility: float, antisymmetry: float, checked: int, skipped: List):
        self.residual = residual
        self.compatibility = compatibility
        self.antisymmetry = antisymmetry
        self.checked = checked
        self.skipped = skipped

    @property
    def passed(self) -> bool:
        return self.checked > 0 and max(self.residual, self.compatibility, self.antisymmetry) < FACTORIZATION_TOL

    def __repr__(self) -> str:
        return (
            f"FactorizationReport(residual={self.residual:.3g}, compatibility={self.compatibility:.3g}, "
            f"checked={self.checked}, skipped={len(self.skipped)})"
        )


class AnchorFactorization:
    """
    lambda: T*M -> E with rho lambda = pi-sharp, the k x n matrix
    lambda = (rho^T rho)^{-1} rho^T Pi^T.
    """

    def __init__(self, algebroid: AiAlgebroidChart, pi: BivectorField):
        if pi.dimension != algebroid.dimension:
            raise DimensionMismatchError("Bivector and algebroid live on different charts")
        self.algebroid = algebroid
        self.pi = pi

    def lambda_jets(self, p, order: int = 1) -> List[List[Jet]]:
        rho = self.algebroid.anchor_jets(p, order)
        sharp = jetmath.transpose(self.pi.matrix_jets(p, order))
        return jetmath.least_squares(rho, sharp)

    def matrix(self, p) -> np.ndarray:
        """Minimum-norm lambda at p with singular values below RCOND * s_max cut."""
        rho = self.algebroid.anchor_matrix(p)
        sharp = self.pi.matrix(p).T
        lam, *_ = np.linalg.lstsq(rho, sharp, rcond=RCOND)
        return lam

    def omega_jets(self, p, order: int = 1) -> List[List]:
        """W = -(lambda lambda^T)^{-1} lambda rho, so that W^T lambda = -rho^T."""
        lam = self.lambda_jets(p, order)
        rho = self.algebroid.anchor_jets(p, order)
        gram = jetmath.matmul(lam, jetmath.transpose(lam))
        w = jetmath.solve(gram, jetmath.matmul(lam, rho))
        return [[-v for v in row] for row in w]

    def omega_matrix(self, p) -> np.ndarray:
        lam = self.matrix(p)
        rho = self.algebroid.anchor_matrix(p)
        return -np.linalg.solve(lam @ lam.T, lam @ rho)

    def dual_frame(self) -> List[VectorField]:
        """Vector fields rho(alpha_j) = lambda^T alpha_j; component l is lambda[j][l]."""
        n = self.algebroid.dimension
        fields = []
        for j in range(self.algebroid.rank):
            comps = [
                ScalarField.from_jet_function(n, lambda p, r, j=j, l=l: self.lambda_jets(p, r)[j][l], name=f"lam[{j},{l}]")
                for l in range(n)
            ]
            fields.append(VectorField(comps, name=f"rho(alpha_{j})"))
        return fields

    def validate(self, probes: Sequence) -> FactorizationReport:
        residual = compatibility = antisymmetry = 0.0
        checked, skipped = 0, []
        for p in probes:
            point = as_point(p, self.algebroid.dimension)
            if not self.algebroid.is_injective_at(point):
                skipped.append(point)
                continue
            rho = self.algebroid.anchor_matrix(point)
            sharp = self.pi.matrix(point).T
            lam = self.matrix(point)
            scale = max(1.0, float(np.max(np.abs(sharp))))
            residual = max(residual, float(np.max(np.abs(rho @ lam - sharp))) / scale)
            if np.linalg.matrix_rank(lam, tol=RCOND * max(1.0, np.max(np.abs(lam)))) < self.algebroid.rank:
                skipped.append(point)
                continue
            w = self.omega_matrix(point)
            compatibility = max(compatibility, float(np.max(np.abs(w.T @ lam + rho.T))))
            antisymmetry = max(antisymmetry, float(np.max(np.abs(w + w.T))))
            checked += 1
        if skipped:
            logger.info("Skipped %d probes where the anchor or lambda drops rank", len(skipped))
        return FactorizationReport(residual, compatibility, antisymmetry, checked, skipped)


def poisson_to_e_form(pi: BivectorField, algebroid: AiAlgebroidChart, probes: Optional[Sequence] = None, name: str = ""):
    """
    (omega_pi, lambda). When probes are given the factorization is validated
    there first and a FactorizationError is raised if pi-sharp does not factor
    through the anchor.
    """
    factorization = AnchorFactorization(algebroid, pi)
    if probes is not None:
        report = factorization.validate(probes)
        if report.residual >= FACTORIZATION_TOL:
            raise FactorizationError(f"pi-sharp does not factor through the anchor: residual {report.residual:.3g}")
        if report.checked == 0:
            raise FactorizationError("No probe with full-rank anchor and lambda")
    omega = EBivector.from_jet_function(
        algebroid.rank,
        algebroid.dimension,
        lambda p, r: _upper(factorization.omega_jets(p, r)),
        name=name or f"omega({pi.name})",
    )
    return omega, factorization


def anchor_from_functions(dimension: int, columns: Sequence[Callable[..., Sequence]], name: str = "") -> AiAlgebroidChart:
    """Algebroid whose anchor images are given as callables returning component lists."""
    fields = [VectorField.from_function(dimension, fn, name=f"{name}X{i}") for i, fn in enumerate(columns)]
    return AiAlgebroidChart(AnchoredFrame(fields, name=name), name=name)
