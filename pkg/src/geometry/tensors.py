"""Pointwise tensor operations on bivectors, forms and maps."""

from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np

from src.geometry.errors import DimensionMismatchError
from src.geometry.fields import (
    AntisymmetricField,
    BivectorField,
    CovectorField,
    SmoothMap,
    TwoFormField,
    as_point,
    check_antisymmetric,
)

Pairing = List[Tuple[int, int]]


def jacobiator(pi: BivectorField, p) -> np.ndarray:
    """
    J^{ijk} = sum_l (pi^{il} d_l pi^{jk} + pi^{jl} d_l pi^{ki} + pi^{kl} d_l pi^{ij}).

    Fully antisymmetric; zero exactly where the Jacobi identity holds.
    """
    point = as_point(p, pi.dimension)
    if pi.size != pi.dimension:
        raise DimensionMismatchError("jacobiator needs a bivector on its own chart")
    matrix, derivs = pi.matrix_and_derivatives(point)
    t = np.einsum("il,jkl->ijk", matrix, derivs)
    return t + np.einsum("jki->ijk", t) + np.einsum("kij->ijk", t)


def max_jacobiator(pi: BivectorField, probes: Sequence) -> Tuple[float, np.ndarray]:
    """Worst |J| over probes and the probe where it occurs."""
    worst, witness = -1.0, None
    for p in probes:
        value = float(np.max(np.abs(jacobiator(pi, p)), initial=0.0))
        if value > worst:
            worst, witness = value, np.asarray(p, dtype=float)
    return max(worst, 0.0), witness


def pushforward_bivector(phi: SmoothMap, pi: Union[BivectorField, np.ndarray], p) -> np.ndarray:
    """(phi_* pi)^{ab} = J^a_i J^b_j pi^{ij}, a matrix at phi(p)."""
    point = as_point(p, phi.domain_dimension)
    matrix = pi.matrix(point) if isinstance(pi, AntisymmetricField) else np.asarray(pi, dtype=float)
    if matrix.shape != (phi.domain_dimension, phi.domain_dimension):
        raise DimensionMismatchError(
            f"Bivector of size {matrix.shape[0]} cannot be pushed along a map from dimension {phi.domain_dimension}"
        )
    jac = phi.jacobian(point)
    return jac @ matrix @ jac.T


def sharp(pi: Union[BivectorField, np.ndarray], theta, p=None) -> np.ndarray:
    """
    Contract the covector with the first slot: v^j = theta_i pi^{ij}.

    For pi = x d_x ^ d_y this sends dx to x d_y.
    """
    if isinstance(pi, AntisymmetricField):
        matrix = pi.matrix(p)
    else:
        matrix = np.asarray(pi, dtype=float)
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != matrix.shape[0]:
        raise DimensionMismatchError(f"Covector of size {theta.size} against a bivector of size {matrix.shape[0]}")
    return theta @ matrix


def pairings(items: Sequence[int]) -> Iterator[Pairing]:
    """All partitions of `items` into ordered pairs (first element smaller)."""
    items = list(items)
    if not items:
        yield []
        return
    first = items.pop(0)
    for i, item in enumerate(items):
        for rest in pairings(items[:i] + items[i + 1 :]):
            yield [(first, item)] + rest


def _pairing_sign(pairing: Pairing) -> int:
    flat = [v for pair in pairing for v in pair]
    inversions = sum(1 for i in range(len(flat)) for j in range(i + 1, len(flat)) if flat[i] > flat[j])
    return -1 if inversions % 2 else 1


def pfaffian(matrix) -> float:
    """Pfaffian by expansion over perfect pairings; zero for odd sizes."""
    matrix = np.asarray(matrix, dtype=float)
    check_antisymmetric(matrix)
    n = matrix.shape[0]
    if n % 2:
        return 0.0
    total = 0.0
    for pairing in pairings(range(n)):
        term = float(_pairing_sign(pairing))
        for i, j in pairing:
            term *= matrix[i, j]
            if term == 0.0:
                break
        total += term
    return total


def pfaffian4(matrix) -> float:
    """Pf = m01 m23 - m02 m13 + m03 m12."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (4, 4):
        raise DimensionMismatchError(f"pfaffian4 needs a 4x4 matrix, got {matrix.shape}")
    check_antisymmetric(matrix)
    return float(matrix[0, 1] * matrix[2, 3] - matrix[0, 2] * matrix[1, 3] + matrix[0, 3] * matrix[1, 2])


def exterior_derivative_1form(theta: CovectorField, p) -> np.ndarray:
    """(d theta)_{ij} = d_i theta_j - d_j theta_i."""
    jac = theta.jacobian(as_point(p, theta.dimension))
    if jac.shape[0] != theta.dimension:
        raise DimensionMismatchError("1-form components must match the chart dimension")
    return jac.T - jac


def exterior_derivative_2form(omega: AntisymmetricField, p) -> np.ndarray:
    """(d omega)_{ijk} = d_i omega_{jk} + d_j omega_{ki} + d_k omega_{ij}."""
    if omega.size != omega.dimension:
        raise DimensionMismatchError("2-form components must match the chart dimension")
    _, derivs = omega.matrix_and_derivatives(as_point(p, omega.dimension))
    t = np.einsum("jki->ijk", derivs)
    return t + np.einsum("jki->ijk", t) + np.einsum("kij->ijk", t)


def d_one_form(theta: CovectorField, name: str = "") -> TwoFormField:
    """d theta as a TwoFormField, so it can be differentiated again."""
    n = theta.dimension

    def jet_fn(point, order):
        comps = theta.jets(point, order + 1)
        return {
            (i, j): comps[j].partial(i) - comps[i].partial(j)
            for i in range(n)
            for j in range(i + 1, n)
        }

    return TwoFormField.from_jet_function(n, jet_fn, name=name or f"d{theta.name}")


def wedge_one_forms(left: Sequence, right: Sequence) -> np.ndarray:
    """(a ^ b)_{ij} = a_i b_j - a_j b_i."""
    a = np.asarray(left, dtype=float)
    b = np.asarray(right, dtype=float)
    return np.outer(a, b) - np.outer(b, a)


def pullback_2form(phi: SmoothMap, omega: AntisymmetricField, p) -> np.ndarray:
    """(phi^* omega)_{ij} = J^a_i omega_{ab}(phi(p)) J^b_j."""
    point = as_point(p, phi.domain_dimension)
    jac = phi.jacobian(point)
    return jac.T @ omega.matrix(phi(point)) @ jac

