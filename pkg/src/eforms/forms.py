"""
E-forms on an anchored frame and their algebroid differential.

An E-form of degree p is stored by its coefficient fields on increasing
multi-indices of the dual frame. The differential is lazy: its coefficients
are again fields, so it can be applied twice.
"""

import itertools
import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from src.eforms.structure import RCOND, StructureFunctions
from src.geometry.errors import DimensionMismatchError
from src.geometry.fields import AntisymmetricField, ScalarField, as_point
from src.geometry.jet import Jet
from src.groupoid.frame import AnchoredFrame

logger = logging.getLogger(__name__)

CLOSED_TOL = 1e-8

Index = Tuple[int, ...]


def sort_with_sign(indices: Sequence[int]) -> Tuple[Optional[Index], int]:
    """(increasing indices, sign of the sorting permutation); (None, 0) on repeats."""
    items = list(indices)
    if len(set(items)) != len(items):
        return None, 0
    sign = 1
    for i in range(len(items)):
        for j in range(len(items) - 1 - i):
            if items[j] > items[j + 1]:
                items[j], items[j + 1] = items[j + 1], items[j]
                sign = -sign
    return tuple(items), sign


class EForm:
    def __init__(self, degree: int, rank: int, dimension: int, coefficients: Dict[Index, ScalarField], name: str = ""):
        for key, field in coefficients.items():
            if len(key) != degree or list(key) != sorted(set(key)) or (key and not 0 <= key[-1] < rank):
                raise ValueError(f"Bad multi-index {key} for a degree-{degree} form of rank {rank}")
            if field.dimension != dimension:
                raise DimensionMismatchError(f"Coefficient {key} lives on dimension {field.dimension}, not {dimension}")
        self.degree = degree
        self.rank = rank
        self.dimension = dimension
        self.coefficients = dict(coefficients)
        self.name = name

    @classmethod
    def function(cls, field: ScalarField, rank: int, name: str = "") -> "EForm":
        return cls(0, rank, field.dimension, {(): field}, name=name or field.name)

    @classmethod
    def dual(cls, index: int, rank: int, dimension: int, name: str = "") -> "EForm":
        """The dual section alpha_index."""
        return cls(1, rank, dimension, {(index,): ScalarField.constant(dimension, 1.0)}, name=name or f"alpha_{index}")

    @classmethod
    def from_antisymmetric(cls, omega: AntisymmetricField, name: str = "") -> "EForm":
        """Degree-2 form sum_{i<j} W_ij alpha_i ^ alpha_j."""
        k = omega.size
        coefficients = {(i, j): omega.component(i, j) for i in range(k) for j in range(i + 1, k)}
        return cls(2, k, omega.dimension, coefficients, name=name or omega.name)

    def component(self, indices: Sequence[int]) -> Tuple[int, Optional[ScalarField]]:
        key, sign = sort_with_sign(indices)
        if key is None or key not in self.coefficients:
            return 0, None
        return sign, self.coefficients[key]

    def jets(self, p, order: int = 1) -> Dict[Index, Jet]:
        return {key: field.jet(p, order) for key, field in self.coefficients.items()}

    def at(self, p) -> Dict[Index, float]:
        point = as_point(p, self.dimension)
        return {key: field.value(point) for key, field in self.coefficients.items()}

    def norm_at(self, p) -> float:
        return max((abs(v) for v in self.at(p).values()), default=0.0)

    def _check_compatible(self, other: "EForm") -> None:
        if other.rank != self.rank or other.dimension != self.dimension:
            raise DimensionMismatchError("E-forms live on different frames")

    def __add__(self, other: "EForm") -> "EForm":
        self._check_compatible(other)
        if other.degree != self.degree:
            raise ValueError("Cannot add forms of different degrees")
        coefficients = dict(self.coefficients)
        for key, field in other.coefficients.items():
            coefficients[key] = coefficients[key] + field if key in coefficients else field
        return EForm(self.degree, self.rank, self.dimension, coefficients, name=f"{self.name}+{other.name}")

    def scaled(self, factor: ScalarField) -> "EForm":
        coefficients = {key: factor * field for key, field in self.coefficients.items()}
        return EForm(self.degree, self.rank, self.dimension, coefficients, name=f"{factor.name}*{self.name}")

    def wedge(self, other: "EForm") -> "EForm":
        """(a ^ b)_K = sum over (p, q)-shuffles of K of sign * a_A * b_B."""
        self._check_compatible(other)
        p, q = self.degree, other.degree
        coefficients: Dict[Index, ScalarField] = {}
        for key in itertools.combinations(range(self.rank), p + q):
            total = None
            for picked in itertools.combinations(range(p + q), p):
                first = tuple(key[i] for i in picked)
                second = tuple(key[i] for i in range(p + q) if i not in picked)
                if first not in self.coefficients or second not in other.coefficients:
                    continue
                _, sign = sort_with_sign(first + second)
                term = self.coefficients[first] * other.coefficients[second]
                if sign < 0:
                    term = -term
                total = term if total is None else total + term
            if total is not None:
                coefficients[key] = total
        return EForm(p + q, self.rank, self.dimension, coefficients, name=f"{self.name}^{other.name}")

    def __repr__(self) -> str:
        return f"EForm({self.name or '?'}, degree={self.degree}, terms={len(self.coefficients)})"


def exterior_derivative(
    omega: EForm, frame: AnchoredFrame, structure: Optional[StructureFunctions] = None, name: str = ""
) -> EForm:
    """
    (d omega)(X_0..X_p) = sum_a (-1)^a rho(X_a)[omega(..^a..)]
                        + sum_{a<b} (-1)^(a+b) omega([X_a, X_b], ..^a..^b..)

    with the bracket expanded through the structure functions. Without
    `structure` the second sum is dropped (commuting frames).
    """
    if frame.rank != omega.rank or frame.dimension != omega.dimension:
        raise DimensionMismatchError(f"{omega!r} does not live on {frame!r}")
    if omega.degree + 1 > omega.rank:
        raise ValueError(f"d of a degree-{omega.degree} form vanishes identically on rank {omega.rank}")
    n, k = omega.dimension, omega.rank

    def coefficient(key: Index) -> Optional[ScalarField]:
        derivatives = []
        for a, ia in enumerate(key):
            rest = key[:a] + key[a + 1 :]
            if rest in omega.coefficients:
                derivatives.append(((-1) ** a, omega.coefficients[rest].directional(frame.fields[ia])))
        brackets = []
        if structure is not None:
            for a, b in itertools.combinations(range(len(key)), 2):
                rest = tuple(key[i] for i in range(len(key)) if i not in (a, b))
                for l in range(k):
                    sign, field = omega.component((l,) + rest)
                    if field is not None:
                        brackets.append(((-1) ** (a + b) * sign, key[a], key[b], l, field))
        if not derivatives and not brackets:
            return None

        def jet_fn(point, order):
            total = Jet.constant(0.0, n, order)
            for sign, field in derivatives:
                total = total + sign * field.jet(point, order)
            cache = {}
            for sign, i, j, l, field in brackets:
                if (i, j) not in cache:
                    cache[(i, j)] = structure.jets(i, j, point, order)
                total = total + sign * cache[(i, j)][l] * field.jet(point, order)
            return total

        return ScalarField.from_jet_function(n, jet_fn, name=f"d{omega.name}{list(key)}")

    coefficients = {}
    for key in itertools.combinations(range(k), omega.degree + 1):
        field = coefficient(key)
        if field is not None:
            coefficients[key] = field
    return EForm(omega.degree + 1, k, n, coefficients, name=name or f"d({omega.name})")


def algebroid_d(omega: EForm, frame: AnchoredFrame, structure: Optional[StructureFunctions], p) -> Dict[Index, float]:
    """Values of d omega at p on increasing multi-indices."""
    return exterior_derivative(omega, frame, structure).at(p)


def is_closed(
    omega: EForm,
    frame: AnchoredFrame,
    structure: Optional[StructureFunctions],
    probes: Sequence,
    tol: float = CLOSED_TOL,
) -> Tuple[bool, float]:
    """(max |d omega| < tol over the probes, that max). Top-degree forms are closed."""
    if omega.degree + 1 > omega.rank:
        return True, 0.0
    d_omega = exterior_derivative(omega, frame, structure)
    worst, witness, skipped = 0.0, None, 0
    for p in probes:
        point = as_point(p, omega.dimension)
        if structure is not None and frame.anchor_rank(point, RCOND) < frame.rank:
            skipped += 1
            continue
        norm = d_omega.norm_at(point)
        if witness is None or norm > worst:
            worst, witness = norm, point
    if skipped:
        logger.info("Closedness of %s skipped %d rank-deficient probes", omega.name, skipped)
    closed = worst < tol
    if not closed:
        logger.info("%s is not closed: |d omega| = %.3g at %s", omega.name, worst, np.asarray(witness).tolist())
    return closed, worst
