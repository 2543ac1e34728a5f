"""
Truncated multivariate Taylor arithmetic.

A Jet holds the Taylor coefficients of a function of `nvars` variables up to
total degree `order`, expanded around a point that the Jet itself does not
store. Arithmetic and elementary functions act on the truncated polynomials,
so evaluating any expression on `Jet.variables(point, order)` yields its exact
derivatives at `point` up to that order.
"""

import math
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import List, Sequence, Tuple, Union

import numpy as np

Scalar = Union[int, float, np.floating]


class _Basis:
    """Monomials of total degree <= order, sorted by degree."""

    def __init__(self, nvars: int, order: int):
        exponents = []
        for degree in range(order + 1):
            for combo in combinations_with_replacement(range(nvars), degree):
                exponent = [0] * nvars
                for var in combo:
                    exponent[var] += 1
                exponents.append(tuple(exponent))

        self.nvars = nvars
        self.order = order
        self.exponents: List[Tuple[int, ...]] = exponents
        self.index = {e: i for i, e in enumerate(exponents)}
        self.size = len(exponents)
        self.degrees = np.array([sum(e) for e in exponents], dtype=int)
        self.factorials = np.array(
            [math.prod(math.factorial(k) for k in e) for e in exponents], dtype=float
        )

        left, right, target = [], [], []
        for i, ei in enumerate(exponents):
            for j, ej in enumerate(exponents):
                if self.degrees[i] + self.degrees[j] > order:
                    # exponents are sorted by degree
                    break
                left.append(i)
                right.append(j)
                target.append(self.index[tuple(a + b for a, b in zip(ei, ej))])
        self.left = np.array(left, dtype=int)
        self.right = np.array(right, dtype=int)
        self.target = np.array(target, dtype=int)


@lru_cache(maxsize=None)
def _basis(nvars: int, order: int) -> _Basis:
    return _Basis(nvars, order)


@lru_cache(maxsize=None)
def _partial_table(nvars: int, order: int, var: int):
    source_basis = _basis(nvars, order)
    target_basis = _basis(nvars, order - 1)
    source, target, weight = [], [], []
    for i, e in enumerate(source_basis.exponents):
        if e[var] == 0:
            continue
        reduced = list(e)
        reduced[var] -= 1
        source.append(i)
        target.append(target_basis.index[tuple(reduced)])
        weight.append(float(e[var]))
    return np.array(source, dtype=int), np.array(target, dtype=int), np.array(weight)


@lru_cache(maxsize=None)
def _recast_table(nvars: int, order: int, new_nvars: int, new_order: int):
    old = _basis(nvars, order)
    new = _basis(new_nvars, new_order)
    source, target = [], []
    for i, e in enumerate(old.exponents):
        if any(e[new_nvars:]) or sum(e) > new_order:
            continue
        padded = tuple(e[:new_nvars]) + (0,) * max(0, new_nvars - nvars)
        source.append(i)
        target.append(new.index[padded])
    return np.array(source, dtype=int), np.array(target, dtype=int)


def _exp_series(c: float, order: int) -> List[float]:
    e = math.exp(c)
    return [e / math.factorial(k) for k in range(order + 1)]


def _log_series(c: float, order: int) -> List[float]:
    if c <= 0.0:
        raise ValueError(f"log of a jet with non-positive value {c}")
    return [math.log(c)] + [(-1.0) ** (k + 1) / (k * c**k) for k in range(1, order + 1)]


def _power_series(c: float, p: float, order: int) -> List[float]:
    if c == 0.0:
        raise ZeroDivisionError("real power of a jet with zero value")
    if c < 0.0:
        raise ValueError(f"real power {p} of a jet with negative value {c}")
    terms = [c**p]
    for k in range(1, order + 1):
        terms.append(terms[-1] * (p - k + 1) / (k * c))
    return terms


def _trig_series(c: float, order: int, phase: float) -> List[float]:
    return [math.sin(c + phase + k * math.pi / 2) / math.factorial(k) for k in range(order + 1)]


class Jet:
    # numpy scalars must defer to the reflected Jet operators
    __array_ufunc__ = None
    __slots__ = ("coeffs", "nvars", "order")

    def __init__(self, coeffs, nvars: int, order: int):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.nvars = nvars
        self.order = order

    @classmethod
    def constant(cls, value: Scalar, nvars: int, order: int) -> "Jet":
        coeffs = np.zeros(_basis(nvars, order).size)
        coeffs[0] = value
        return cls(coeffs, nvars, order)

    @classmethod
    def variables(cls, point: Sequence[float], order: int) -> List["Jet"]:
        """Independent variables x_i = point_i + d_i."""
        nvars = len(point)
        size = _basis(nvars, order).size
        result = []
        for i, value in enumerate(point):
            coeffs = np.zeros(size)
            coeffs[0] = value
            if order >= 1:
                coeffs[1 + i] = 1.0
            result.append(cls(coeffs, nvars, order))
        return result

    @classmethod
    def lift(cls, value: Union["Jet", Scalar], nvars: int, order: int) -> "Jet":
        if isinstance(value, Jet):
            if value.nvars != nvars or value.order != order:
                return value.recast(nvars, order)
            return value
        return cls.constant(float(value), nvars, order)

    # --- readouts ---

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    @property
    def gradient(self) -> np.ndarray:
        if self.order < 1:
            raise ValueError("gradient needs a jet of order >= 1")
        return self.coeffs[1 : 1 + self.nvars].copy()

    @property
    def hessian(self) -> np.ndarray:
        if self.order < 2:
            raise ValueError("hessian needs a jet of order >= 2")
        basis = _basis(self.nvars, self.order)
        result = np.zeros((self.nvars, self.nvars))
        start = 1 + self.nvars
        for idx in range(start, start + self.nvars * (self.nvars + 1) // 2):
            e = basis.exponents[idx]
            vars_ = [i for i, k in enumerate(e) for _ in range(k)]
            i, j = vars_
            if i == j:
                result[i, i] = 2.0 * self.coeffs[idx]
            else:
                result[i, j] = result[j, i] = self.coeffs[idx]
        return result

    def derivative(self, exponent: Sequence[int]) -> float:
        """Mixed partial derivative with the given multi-index."""
        basis = _basis(self.nvars, self.order)
        idx = basis.index[tuple(exponent)]
        return float(self.coeffs[idx] * basis.factorials[idx])

    def partial(self, var: int) -> "Jet":
        if self.order < 1:
            raise ValueError("cannot differentiate a jet of order 0")
        source, target, weight = _partial_table(self.nvars, self.order, var)
        size = _basis(self.nvars, self.order - 1).size
        coeffs = np.bincount(target, weights=self.coeffs[source] * weight, minlength=size)
        return Jet(coeffs, self.nvars, self.order - 1)

    def recast(self, nvars: int, order: int) -> "Jet":
        """Pad with new trailing variables, drop trailing variables (set to zero) or truncate."""
        source, target = _recast_table(self.nvars, self.order, nvars, order)
        coeffs = np.zeros(_basis(nvars, order).size)
        coeffs[target] = self.coeffs[source]
        return Jet(coeffs, nvars, order)

    def truncate(self, order: int) -> "Jet":
        return self.recast(self.nvars, order)

    def compose(self, args: Sequence[Union["Jet", Scalar]]) -> Union["Jet", float]:
        """Substitute jets for the variables; `args` values must equal the expansion point."""
        if len(args) != self.nvars:
            raise ValueError(f"compose expects {self.nvars} arguments, got {len(args)}")
        shape = jet_shape(args)
        if shape is None:
            return self.value
        nvars, order = shape
        if order > self.order:
            raise ValueError(f"cannot compose an order {self.order} jet to order {order}")
        deltas = [Jet.lift(a, nvars, order) - value_of(a) for a in args]
        powers = []
        for delta in deltas:
            row = [Jet.constant(1.0, nvars, order)]
            for _ in range(order):
                row.append(row[-1] * delta)
            powers.append(row)

        basis = _basis(self.nvars, self.order)
        result = np.zeros(_basis(nvars, order).size)
        for idx, e in enumerate(basis.exponents):
            if basis.degrees[idx] > order:
                break
            c = self.coeffs[idx]
            if c == 0.0:
                continue
            term = None
            for var, k in enumerate(e):
                if k:
                    term = powers[var][k] if term is None else term * powers[var][k]
            result += c * (term.coeffs if term is not None else _unit(nvars, order))
        return Jet(result, nvars, order)

    def compose_univariate(self, taylor: Sequence[float]) -> "Jet":
        """g(self) given the Taylor coefficients g^(k)(value)/k! of g."""
        delta = self - self.coeffs[0]
        result = Jet.constant(taylor[self.order], self.nvars, self.order)
        for k in range(self.order - 1, -1, -1):
            result = result * delta + taylor[k]
        return result

    # --- arithmetic ---

    def _check(self, other: "Jet") -> None:
        if other.nvars != self.nvars or other.order != self.order:
            raise ValueError(
                f"incompatible jets: ({self.nvars}, {self.order}) vs ({other.nvars}, {other.order})"
            )

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.coeffs + other.coeffs, self.nvars, self.order)
        coeffs = self.coeffs.copy()
        coeffs[0] += other
        return Jet(coeffs, self.nvars, self.order)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.coeffs - other.coeffs, self.nvars, self.order)
        coeffs = self.coeffs.copy()
        coeffs[0] -= other
        return Jet(coeffs, self.nvars, self.order)

    def __rsub__(self, other):
        coeffs = -self.coeffs
        coeffs[0] += other
        return Jet(coeffs, self.nvars, self.order)

    def __neg__(self):
        return Jet(-self.coeffs, self.nvars, self.order)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            basis = _basis(self.nvars, self.order)
            coeffs = np.bincount(
                basis.target,
                weights=self.coeffs[basis.left] * other.coeffs[basis.right],
                minlength=basis.size,
            )
            return Jet(coeffs, self.nvars, self.order)
        return Jet(self.coeffs * other, self.nvars, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.coeffs / other, self.nvars, self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, power):
        if isinstance(power, Jet):
            return (power * self.log()).exp()
        if float(power).is_integer():
            n = int(power)
            if n < 0:
                return self.reciprocal() ** (-n)
            result = Jet.constant(1.0, self.nvars, self.order)
            base = self
            while n:
                if n & 1:
                    result = result * base
                n >>= 1
                if n:
                    base = base * base
            return result
        return self.power(float(power))

    def __rpow__(self, base):
        return (self * math.log(base)).exp()

    def __abs__(self):
        if self.value == 0.0:
            raise ValueError("abs is not differentiable at zero")
        return self if self.value > 0 else -self

    def __lt__(self, other):
        return self.value < value_of(other)

    def __le__(self, other):
        return self.value <= value_of(other)

    def __gt__(self, other):
        return self.value > value_of(other)

    def __ge__(self, other):
        return self.value >= value_of(other)

    # --- elementary functions ---

    def reciprocal(self) -> "Jet":
        c = self.value
        if c == 0.0:
            raise ZeroDivisionError("reciprocal of a jet with zero value")
        return self.compose_univariate([(-1.0) ** k / c ** (k + 1) for k in range(self.order + 1)])

    def power(self, p: float) -> "Jet":
        return self.compose_univariate(_power_series(self.value, p, self.order))

    def sqrt(self) -> "Jet":
        return self.power(0.5)

    def exp(self) -> "Jet":
        return self.compose_univariate(_exp_series(self.value, self.order))

    def expm1(self) -> "Jet":
        series = _exp_series(self.value, self.order)
        series[0] = math.expm1(self.value)
        return self.compose_univariate(series)

    def log(self) -> "Jet":
        return self.compose_univariate(_log_series(self.value, self.order))

    def log1p(self) -> "Jet":
        series = _log_series(1.0 + self.value, self.order)
        series[0] = math.log1p(self.value)
        return self.compose_univariate(series)

    def sin(self) -> "Jet":
        return self.compose_univariate(_trig_series(self.value, self.order, 0.0))

    def cos(self) -> "Jet":
        return self.compose_univariate(_trig_series(self.value, self.order, math.pi / 2))

    def __repr__(self) -> str:
        return f"Jet(value={self.value!r}, nvars={self.nvars}, order={self.order})"


@lru_cache(maxsize=None)
def _unit_cached(nvars: int, order: int) -> Tuple[float, ...]:
    coeffs = [0.0] * _basis(nvars, order).size
    coeffs[0] = 1.0
    return tuple(coeffs)


def _unit(nvars: int, order: int) -> np.ndarray:
    return np.array(_unit_cached(nvars, order))


def value_of(z) -> float:
    return z.value if isinstance(z, Jet) else float(z)


def is_jet(z) -> bool:
    return isinstance(z, Jet)


def jet_shape(values) -> Union[Tuple[int, int], None]:
    """(nvars, order) of the first jet found in `values`, or None."""
    for v in values:
        if isinstance(v, Jet):
            return v.nvars, v.order
    return None
