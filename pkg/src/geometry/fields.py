"""
Coordinate-chart fields.

Every field is evaluated through Jets: an expression field wraps a callable
written with `src.geometry.jetmath` functions, so it runs on floats for values
and on Jets for exact derivatives. Derived fields (partials, least-squares
solutions, pullbacks) are defined by a jet function `(point, order) -> Jet`
and are composed with other jets through Taylor substitution.
"""

from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from src.geometry.errors import DimensionMismatchError
from src.geometry.jet import Jet, jet_shape, value_of

JetFunction = Callable[[np.ndarray, int], Any]
Entries = Dict[Tuple[int, int], Any]


def as_point(coords, dimension: Optional[int] = None) -> np.ndarray:
    point = np.asarray(coords, dtype=float).reshape(-1)
    if point.size == 0:
        raise DimensionMismatchError("Point must have at least one coordinate")
    if not np.all(np.isfinite(point)):
        raise ValueError(f"Point coordinates must be finite: {point}")
    if dimension is not None and point.size != dimension:
        raise DimensionMismatchError(f"Expected a point of dimension {dimension}, got {point.size}")
    return point


class ScalarField:
    def __init__(
        self,
        dimension: int,
        fn: Optional[Callable[..., Any]] = None,
        name: str = "",
        jet_fn: Optional[JetFunction] = None,
    ):
        if dimension <= 0:
            raise DimensionMismatchError("ScalarField dimension must be positive")
        if (fn is None) == (jet_fn is None):
            raise ValueError("Provide exactly one of fn or jet_fn")
        self.dimension = dimension
        self.name = name
        self._fn = fn
        self._jet_fn = jet_fn

    @classmethod
    def constant(cls, dimension: int, value: float, name: str = "") -> "ScalarField":
        return cls(dimension, lambda *x: float(value), name=name or repr(value))

    @classmethod
    def coordinate(cls, dimension: int, index: int, name: str = "") -> "ScalarField":
        return cls(dimension, lambda *x: x[index], name=name or f"x{index}")

    @classmethod
    def from_jet_function(cls, dimension: int, jet_fn: JetFunction, name: str = "") -> "ScalarField":
        return cls(dimension, jet_fn=jet_fn, name=name)

    def __call__(self, *coords):
        if len(coords) != self.dimension:
            raise DimensionMismatchError(
                f"{self.name or 'field'} takes {self.dimension} coordinates, got {len(coords)}"
            )
        if self._fn is not None:
            return self._fn(*coords)
        shape = jet_shape(coords)
        if shape is None:
            return self.value(coords)
        base = self.jet([value_of(c) for c in coords], shape[1])
        return base.compose(coords)

    def jet(self, point, order: int = 2) -> Jet:
        point = as_point(point, self.dimension)
        if self._fn is not None:
            result = self._fn(*Jet.variables(point, order))
        else:
            result = self._jet_fn(point, order)
        return Jet.lift(result, self.dimension, order)

    def value(self, point) -> float:
        point = as_point(point, self.dimension)
        if self._fn is not None:
            return value_of(self._fn(*point))
        return self.jet(point, 0).value

    def evaluate(self, point) -> Tuple[float, np.ndarray, np.ndarray]:
        """(value, gradient, Hessian) at `point`."""
        jet = self.jet(point, 2)
        return jet.value, jet.gradient, jet.hessian

    def partial(self, index: int) -> "ScalarField":
        return ScalarField.from_jet_function(
            self.dimension,
            lambda p, r: self.jet(p, r + 1).partial(index),
            name=f"d{index}({self.name})",
        )

    def directional(self, direction: "VectorField") -> "ScalarField":
        """Derivative along a vector field: X^m d_m f."""

        def jet_fn(p, r):
            outer = self.jet(p, r + 1)
            comps = direction.jets(p, r)
            total = Jet.constant(0.0, self.dimension, r)
            for m, comp in enumerate(comps):
                total = total + comp * outer.partial(m)
            return total

        return ScalarField.from_jet_function(self.dimension, jet_fn, name=f"X({self.name})")

    def check_derivatives(self, point, step: float = 1e-5) -> float:
        """Largest relative gap between jet derivatives and central differences."""
        point = as_point(point, self.dimension)
        _, grad, hess = self.evaluate(point)
        fd_grad = np.zeros(self.dimension)
        fd_hess = np.zeros((self.dimension, self.dimension))
        for i in range(self.dimension):
            e = np.zeros(self.dimension)
            e[i] = step
            fd_grad[i] = (self.value(point + e) - self.value(point - e)) / (2 * step)
            fd_hess[i] = (self.jet(point + e, 1).gradient - self.jet(point - e, 1).gradient) / (2 * step)
        scale = max(1.0, np.max(np.abs(grad)), np.max(np.abs(hess)))
        return float(max(np.max(np.abs(fd_grad - grad)), np.max(np.abs(fd_hess - hess))) / scale)

    def _combine(self, other, op, symbol: str) -> "ScalarField":
        if isinstance(other, ScalarField):
            if other.dimension != self.dimension:
                raise DimensionMismatchError("Cannot combine fields of different dimensions")
            jet_fn = lambda p, r: op(self.jet(p, r), other.jet(p, r))
        else:
            jet_fn = lambda p, r: op(self.jet(p, r), other)
        return ScalarField.from_jet_function(self.dimension, jet_fn, name=f"({self.name}{symbol}{other})")

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b, "+")

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b, "-")

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b, "*")

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField.from_jet_function(self.dimension, lambda p, r: -self.jet(p, r), name=f"-{self.name}")

    def __repr__(self) -> str:
        return f"ScalarField({self.name or '?'}, dim={self.dimension})"


class VectorField:
    """Components in the coordinate basis of the chart."""

    def __init__(self, components: Sequence[ScalarField], name: str = ""):
        if not components:
            raise DimensionMismatchError("VectorField needs at least one component")
        dims = {c.dimension for c in components}
        if len(dims) != 1:
            raise DimensionMismatchError(f"Components have mixed dimensions {sorted(dims)}")
        self.components = list(components)
        self.name = name

    @classmethod
    def from_function(cls, dimension: int, fn: Callable[..., Sequence[Any]], size: Optional[int] = None, name: str = ""):
        """All components from one callable returning a sequence."""
        size = dimension if size is None else size
        return cls(
            [ScalarField(dimension, lambda *x, i=i: fn(*x)[i], name=f"{name}[{i}]") for i in range(size)],
            name=name,
        )

    @classmethod
    def constant(cls, vector: Sequence[float], name: str = ""):
        n = len(vector)
        return cls([ScalarField.constant(n, v) for v in vector], name=name)

    @property
    def dimension(self) -> int:
        return self.components[0].dimension

    @property
    def size(self) -> int:
        return len(self.components)

    def __call__(self, *coords) -> List[Any]:
        return [c(*coords) for c in self.components]

    def at(self, point) -> np.ndarray:
        point = as_point(point, self.dimension)
        return np.array([c.value(point) for c in self.components])

    def jets(self, point, order: int = 1) -> List[Jet]:
        return [c.jet(point, order) for c in self.components]

    def jacobian(self, point) -> np.ndarray:
        """Rows are component gradients."""
        return np.array([j.gradient for j in self.jets(point, 1)])

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name or '?'}, dim={self.dimension})"


class CovectorField(VectorField):
    """A 1-form: components against the coordinate differentials."""


class AntisymmetricField:
    """
    size x size antisymmetric matrix of functions on a chart of `dimension`.

    Only the strict upper triangle is stored; `entries(*coords)` returns a
    mapping {(i, j): value} and lower or diagonal keys are normalized away.
    """

    def __init__(
        self,
        size: int,
        entries: Union[Callable[..., Mapping], Mapping[Tuple[int, int], Any], None] = None,
        dimension: Optional[int] = None,
        jet_fn: Optional[Callable[[np.ndarray, int], Mapping]] = None,
        name: str = "",
    ):
        self.size = size
        self.dimension = size if dimension is None else dimension
        self.name = name
        self._jet_fn = jet_fn
        if jet_fn is not None:
            self._entries_fn = None
        elif callable(entries):
            self._entries_fn = entries
        else:
            table = dict(entries or {})
            self._check_keys(table)
            self._entries_fn = lambda *x: {
                key: (v(*x) if isinstance(v, ScalarField) else v) for key, v in table.items()
            }

    @classmethod
    def constant(cls, matrix, name: str = "", dimension: Optional[int] = None):
        matrix = np.asarray(matrix, dtype=float)
        check_antisymmetric(matrix)
        n = matrix.shape[0]
        table = {(i, j): float(matrix[i, j]) for i in range(n) for j in range(i + 1, n) if matrix[i, j] != 0.0}
        return cls(n, table, dimension=dimension, name=name)

    @classmethod
    def from_jet_function(cls, size: int, dimension: int, jet_fn, name: str = ""):
        return cls(size, dimension=dimension, jet_fn=jet_fn, name=name)

    def _check_keys(self, table: Mapping) -> None:
        for i, j in table:
            if i == j:
                raise ValueError(f"Diagonal entry ({i}, {j}) of an antisymmetric field")
            if not (0 <= i < self.size and 0 <= j < self.size):
                raise DimensionMismatchError(f"Entry ({i}, {j}) outside a {self.size}x{self.size} field")

    def _normalized(self, raw: Mapping) -> Entries:
        result: Entries = {}
        for (i, j), v in raw.items():
            if i == j:
                raise ValueError(f"Diagonal entry ({i}, {j}) of an antisymmetric field")
            if i < j:
                result[(i, j)] = result.get((i, j), 0.0) + v
            else:
                result[(j, i)] = result.get((j, i), 0.0) - v
        return result

    def __call__(self, *coords) -> Entries:
        if len(coords) != self.dimension:
            raise DimensionMismatchError(f"Field takes {self.dimension} coordinates, got {len(coords)}")
        if self._entries_fn is not None:
            return self._normalized(self._entries_fn(*coords))
        shape = jet_shape(coords)
        order = 0 if shape is None else shape[1]
        base = self.jets([value_of(c) for c in coords], order)
        if shape is None:
            return {key: jet.value for key, jet in base.items()}
        return {key: jet.compose(coords) for key, jet in base.items()}

    def jets(self, point, order: int = 1) -> Dict[Tuple[int, int], Jet]:
        point = as_point(point, self.dimension)
        if self._entries_fn is not None:
            raw = self._normalized(self._entries_fn(*Jet.variables(point, order)))
        else:
            raw = self._normalized(self._jet_fn(point, order))
        return {key: Jet.lift(v, self.dimension, order) for key, v in raw.items()}

    def matrix(self, point) -> np.ndarray:
        point = as_point(point, self.dimension)
        if self._entries_fn is not None:
            entries = self._normalized(self._entries_fn(*point))
            entries = {key: value_of(v) for key, v in entries.items()}
        else:
            entries = {key: jet.value for key, jet in self.jets(point, 0).items()}
        return _assemble(self.size, entries)

    def matrix_jets(self, point, order: int = 1) -> List[List[Any]]:
        """Full antisymmetric matrix with jet entries (zeros as floats)."""
        entries = self.jets(point, order)
        result: List[List[Any]] = [[0.0] * self.size for _ in range(self.size)]
        for (i, j), jet in entries.items():
            result[i][j] = jet
            result[j][i] = -jet
        return result

    def matrix_and_derivatives(self, point) -> Tuple[np.ndarray, np.ndarray]:
        """(P, D) with D[i, j, l] = d_l P[i, j]."""
        entries = self.jets(point, 1)
        p = np.zeros((self.size, self.size))
        d = np.zeros((self.size, self.size, self.dimension))
        for (i, j), jet in entries.items():
            p[i, j], p[j, i] = jet.value, -jet.value
            d[i, j], d[j, i] = jet.gradient, -jet.gradient
        return p, d

    def component(self, i: int, j: int) -> ScalarField:
        sign = 1.0
        if i > j:
            i, j, sign = j, i, -1.0
        if i == j:
            return ScalarField.constant(self.dimension, 0.0)
        return ScalarField.from_jet_function(
            self.dimension,
            lambda p, r: sign * self.jets(p, r).get((i, j), Jet.constant(0.0, self.dimension, r)),
            name=f"{self.name}[{i},{j}]",
        )

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name or '?'}, size={self.size}, dim={self.dimension})"


class BivectorField(AntisymmetricField):
    """pi^{ij} in the coordinate basis: pi = sum_{i<j} pi^{ij} d_i ^ d_j."""

    def __init__(self, dimension: int, entries=None, jet_fn=None, name: str = ""):
        super().__init__(dimension, entries, dimension=dimension, jet_fn=jet_fn, name=name)

    @classmethod
    def constant(cls, matrix, name: str = ""):
        field = AntisymmetricField.constant(matrix, name=name)
        return cls(field.size, field._entries_fn, name=name)

    @classmethod
    def from_jet_function(cls, dimension: int, jet_fn, name: str = ""):
        return cls(dimension, jet_fn=jet_fn, name=name)


class TwoFormField(AntisymmetricField):
    """omega_{ij} with omega = sum_{i<j} omega_{ij} dx^i ^ dx^j."""

    def __init__(self, dimension: int, entries=None, jet_fn=None, name: str = ""):
        super().__init__(dimension, entries, dimension=dimension, jet_fn=jet_fn, name=name)

    @classmethod
    def constant(cls, matrix, name: str = ""):
        field = AntisymmetricField.constant(matrix, name=name)
        return cls(field.size, field._entries_fn, name=name)

    @classmethod
    def from_jet_function(cls, dimension: int, jet_fn, name: str = ""):
        return cls(dimension, jet_fn=jet_fn, name=name)


class SmoothMap:
    def __init__(self, domain_dimension: int, codomain_dimension: int, fn: Callable[..., Sequence[Any]], name: str = ""):
        if domain_dimension <= 0 or codomain_dimension <= 0:
            raise DimensionMismatchError("SmoothMap dimensions must be positive")
        self.domain_dimension = domain_dimension
        self.codomain_dimension = codomain_dimension
        self.name = name
        self._fn = fn

    @classmethod
    def identity(cls, dimension: int) -> "SmoothMap":
        return cls(dimension, dimension, lambda *x: list(x), name="id")

    @classmethod
    def projection(cls, domain_dimension: int, indices: Sequence[int], name: str = "") -> "SmoothMap":
        indices = list(indices)
        return cls(domain_dimension, len(indices), lambda *x: [x[i] for i in indices], name=name or "pr")

    def apply(self, *coords) -> List[Any]:
        if len(coords) != self.domain_dimension:
            raise DimensionMismatchError(
                f"{self.name or 'map'} takes {self.domain_dimension} coordinates, got {len(coords)}"
            )
        out = list(self._fn(*coords))
        if len(out) != self.codomain_dimension:
            raise DimensionMismatchError(f"{self.name or 'map'} returned {len(out)} components")
        return out

    def __call__(self, point) -> np.ndarray:
        point = as_point(point, self.domain_dimension)
        return np.array([value_of(v) for v in self.apply(*point)])

    def jets(self, point, order: int = 1) -> List[Jet]:
        point = as_point(point, self.domain_dimension)
        out = self.apply(*Jet.variables(point, order))
        return [Jet.lift(v, self.domain_dimension, order) for v in out]

    def jacobian(self, point) -> np.ndarray:
        """codomain x domain matrix J^a_i."""
        return np.array([j.gradient for j in self.jets(point, 1)])

    def compose(self, inner: "SmoothMap") -> "SmoothMap":
        """self o inner."""
        if inner.codomain_dimension != self.domain_dimension:
            raise DimensionMismatchError("Cannot compose maps with mismatched dimensions")
        return SmoothMap(
            inner.domain_dimension,
            self.codomain_dimension,
            lambda *x: self.apply(*inner.apply(*x)),
            name=f"{self.name}o{inner.name}",
        )

    def __repr__(self) -> str:
        return f"SmoothMap({self.name or '?'}, {self.domain_dimension}->{self.codomain_dimension})"


def check_antisymmetric(matrix: np.ndarray, tol: float = 1e-12) -> None:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {matrix.shape}")
    scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
    if np.max(np.abs(matrix + matrix.T), initial=0.0) > tol * scale:
        raise ValueError("Matrix is not antisymmetric")


def _assemble(size: int, entries: Mapping[Tuple[int, int], float]) -> np.ndarray:
    result = np.zeros((size, size))
    for (i, j), v in entries.items():
        result[i, j] = v
        result[j, i] = -v
    return result
