"""
Cosymplectic structures (omega, alpha) on a (2n+1)-dimensional chart: the
volume test, the Reeb field and the induced Poisson bivector.

Sign convention: the induced bivector satisfies omega(u, pi-sharp theta) =
theta(u) for u in ker alpha, with pi-sharp theta = theta @ Pi.
"""

import logging
import math
from typing import Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

from src.geometry import jetmath
from src.geometry.errors import DegenerateStructureError, DimensionMismatchError
from src.geometry.fields import BivectorField, CovectorField, TwoFormField, as_point
from src.geometry.tensors import exterior_derivative_1form, exterior_derivative_2form, pfaffian

logger = logging.getLogger(__name__)

VOLUME_TOL = 1e-10
REEB_TOL = 1e-10
CLOSED_TOL = 1e-9


class CosymplecticStructure:
    def __init__(self, omega: TwoFormField, alpha: CovectorField, name: str = ""):
        if omega.dimension != alpha.dimension or alpha.size != alpha.dimension:
            raise DimensionMismatchError("omega and alpha must live on the same chart")
        self.omega = omega
        self.alpha = alpha
        self.name = name or f"({omega.name}, {alpha.name})"

    @property
    def dimension(self) -> int:
        return self.omega.dimension

    @property
    def half_rank(self) -> int:
        return (self.dimension - 1) // 2

    def _require_odd(self) -> None:
        if self.dimension % 2 == 0:
            raise DimensionMismatchError(f"Cosymplectic charts are odd-dimensional, got {self.dimension}")

    def volume_coefficient(self, p) -> float:
        """
        Coefficient of omega^n ^ alpha against dx^1 ^ ... ^ dx^{2n+1}:
        n! sum_j (-1)^j alpha_j Pf(omega without row and column j).
        """
        self._require_odd()
        point = as_point(p, self.dimension)
        w = self.omega.matrix(point)
        a = self.alpha.at(point)
        total = 0.0
        for j in range(self.dimension):
            if a[j] == 0.0:
                continue
            keep = [i for i in range(self.dimension) if i != j]
            total += (-1) ** j * a[j] * pfaffian(w[np.ix_(keep, keep)])
        return math.factorial(self.half_rank) * total

    def closedness(self, probes: Sequence) -> float:
        """max over probes of |d omega| and |d alpha|."""
        worst = 0.0
        for p in probes:
            worst = max(
                worst,
                float(np.max(np.abs(exterior_derivative_2form(self.omega, p)))),
                float(np.max(np.abs(exterior_derivative_1form(self.alpha, p)))),
            )
        return worst

    def validate(self, probes: Sequence, tol: float = VOLUME_TOL) -> bool:
        self._require_odd()
        for p in probes:
            volume = self.volume_coefficient(p)
            if abs(volume) <= tol:
                logger.info("%s: omega^n ^ alpha = %.3g at %s", self.name, volume, np.asarray(p).tolist())
                return False
        return True

    def reeb_field(self, p) -> np.ndarray:
        """K with iota_K omega = 0 and alpha(K) = 1."""
        self._require_odd()
        point = as_point(p, self.dimension)
        w = self.omega.matrix(point)
        a = self.alpha.at(point)
        system = np.vstack([w.T, a])
        rhs = np.zeros(self.dimension + 1)
        rhs[-1] = 1.0
        k, _, rank, _ = np.linalg.lstsq(system, rhs, rcond=None)
        residual = float(np.max(np.abs(system @ k - rhs)))
        if rank < self.dimension or residual >= REEB_TOL:
            raise DegenerateStructureError(
                f"Reeb system is singular at {point.tolist()} (rank {rank}, residual {residual:.3g})"
            )
        return k

    def induced_poisson(self, p) -> np.ndarray:
        """Pi = -B (B^T omega B)^{-1} B^T for a basis B of ker alpha."""
        self._require_odd()
        point = as_point(p, self.dimension)
        w = self.omega.matrix(point)
        basis = null_space(self.alpha.at(point).reshape(1, -1))
        if basis.shape[1] != self.dimension - 1:
            raise DegenerateStructureError(f"alpha vanishes at {point.tolist()}")
        restricted = basis.T @ w @ basis
        if abs(np.linalg.det(restricted)) <= VOLUME_TOL:
            raise DegenerateStructureError(f"omega is degenerate on ker alpha at {point.tolist()}")
        pi = -basis @ np.linalg.inv(restricted) @ basis.T
        return 0.5 * (pi - pi.T)

    def induced_poisson_field(self, name: str = "") -> BivectorField:
        """
        Jet-capable induced bivector through Theta = omega^T + alpha alpha^T,
        the matrix of v -> iota_v omega + alpha(v) alpha:

            K = Theta^{-1} alpha,   Pi = -(I - K alpha^T) Theta^{-T}.
        """
        self._require_odd()
        n = self.dimension

        def jet_fn(point, order):
            w = self.omega.matrix_jets(point, order)
            a = self.alpha.jets(point, order)
            theta = [[w[j][i] + a[i] * a[j] for j in range(n)] for i in range(n)]
            inverse_t = jetmath.transpose(jetmath.inverse(theta))
            reeb = [row[0] for row in jetmath.solve(theta, [[v] for v in a])]
            projector = [[(1.0 if i == j else 0.0) - reeb[i] * a[j] for j in range(n)] for i in range(n)]
            pi = jetmath.matmul(projector, inverse_t)
            return {(i, j): -pi[i][j] for i in range(n) for j in range(i + 1, n)}

        return BivectorField.from_jet_function(n, jet_fn, name=name or f"pi[{self.name}]")

    def kernel_check(self, p) -> Tuple[int, float]:
        """(rank of Pi, |Pi alpha|): rank 2n, and alpha spans the kernel of pi-sharp."""
        point = as_point(p, self.dimension)
        pi = self.induced_poisson(point)
        rank = int(np.linalg.matrix_rank(pi, tol=1e-9 * max(1.0, float(np.max(np.abs(pi))))))
        return rank, float(np.max(np.abs(pi @ self.alpha.at(point))))

    def __repr__(self) -> str:
        return f"CosymplecticStructure({self.name}, dim={self.dimension})"


def reeb_field(c: CosymplecticStructure, p) -> np.ndarray:
    return c.reeb_field(p)


def induced_poisson(c: CosymplecticStructure, p) -> np.ndarray:
    return c.induced_poisson(p)


def validate(c: CosymplecticStructure, probes: Sequence) -> bool:
    return c.validate(probes)
