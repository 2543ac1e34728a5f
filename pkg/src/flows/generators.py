"""
Generator functions f(x, v) of the one-dimensional flows.

A generator is written once with `src.geometry.jetmath` functions so that it
evaluates on floats and on jets. The x variable comes first; v holds the
j parameters (Casimir directions) and may be empty.
"""

import logging
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from src.geometry import jetmath
from src.geometry.fields import ScalarField
from src.geometry.jet import Jet, jet_shape

logger = logging.getLogger(__name__)


class GeneratorFunction:
    def __init__(
        self,
        name: str,
        fn: Callable[..., object],
        parameters: int = 0,
        zeros: Sequence[float] = (),
        zero_description: str = "",
        degree: Optional[int] = None,
    ):
        if parameters < 0:
            raise ValueError("Parameter count must be nonnegative")
        self.name = name
        self._fn = fn
        self.parameters = parameters
        self.zeros = [float(z) for z in zeros]
        self.zero_description = zero_description or ", ".join(f"x={z:g}" for z in self.zeros)
        # monomial exponent when f = x^m, used to pick closed forms
        self.degree = degree

    def _params(self, v) -> List:
        v = list(v) if v is not None else []
        if len(v) != self.parameters:
            raise ValueError(f"{self.name} takes {self.parameters} parameters, got {len(v)}")
        return v

    def __call__(self, x, v=()):
        return self._fn(x, *self._params(v))

    @property
    def field(self) -> ScalarField:
        """f as a ScalarField on (x, v)."""
        return ScalarField(1 + self.parameters, lambda x, *v: self._fn(x, *v), name=self.name)

    def taylor(self, x: float, v=(), order: int = 3) -> np.ndarray:
        """Taylor coefficients f^(n)(x)/n! for n = 0..order at fixed float v."""
        (xj,) = Jet.variables([float(x)], order)
        return Jet.lift(self._fn(xj, *self._params(v)), 1, order).coeffs.copy()

    def derivative(self, x: float, v=(), n: int = 1) -> float:
        return float(self.taylor(x, v, n)[n] * np.prod(np.arange(1, n + 1)))

    def x_derivatives(self, x, v=(), n: int = 1) -> List:
        """
        [f, d_x f, ..., d_x^n f] at (x, v), where x and v may be jets.

        Jets are extended by an auxiliary variable t and f(x + t, v) is
        differentiated in t before t is dropped again.
        """
        v = self._params(v)
        shape = jet_shape([x, *v])
        if shape is None:
            coeffs = self.taylor(x, v, n)
            return [float(c * np.prod(np.arange(1, k + 1))) for k, c in enumerate(coeffs)]
        nvars, order = shape
        wide = order + n
        t = Jet.variables([0.0] * (nvars + 1), wide)[nvars]
        xs = Jet.lift(x, nvars, order).recast(nvars + 1, wide) + t
        vs = [Jet.lift(p, nvars, order).recast(nvars + 1, wide) for p in v]
        current = Jet.lift(self._fn(xs, *vs), nvars + 1, wide)
        result = [current.recast(nvars, order)]
        for _ in range(n):
            current = current.partial(nvars)
            result.append(current.recast(nvars, order))
        return result

    def x_partial(self, x, v=()):
        if jet_shape([x, *self._params(v)]) is None:
            return self.derivative(x, v, 1)
        return self.x_derivatives(x, v, 1)[1]

    def check_zero_set(self, lower: float, upper: float, v=(), samples: int = 2001, tol: float = 1e-10) -> bool:
        """
        Spot-check the declared zeros on [lower, upper]: every sign change of f
        brackets a declared zero and every declared zero in range has |f| < tol.
        """
        xs = np.linspace(lower, upper, samples)
        values = np.array([float(self(x, v)) for x in xs])
        spacing = xs[1] - xs[0]
        declared = [z for z in self.zeros if lower <= z <= upper]
        for z in declared:
            if abs(float(self(z, v))) >= tol:
                logger.warning("%s: declared zero %g has f=%g", self.name, z, float(self(z, v)))
                return False
        signs = np.sign(values)
        for i in np.nonzero(signs[:-1] * signs[1:] < 0)[0]:
            if not any(xs[i] - spacing <= z <= xs[i + 1] + spacing for z in declared):
                logger.warning("%s: undeclared sign change in [%g, %g]", self.name, xs[i], xs[i + 1])
                return False
        return True

    def __repr__(self) -> str:
        return f"GeneratorFunction({self.name}, zeros: {self.zero_description or 'none'})"


def monomial(m: int) -> GeneratorFunction:
    """f(x) = x^m, the b^m case."""
    if m < 1:
        raise ValueError(f"Monomial degree must be >= 1, got {m}")
    return GeneratorFunction(f"x^{m}", lambda x: x**m, zeros=[0.0], degree=m)


def scaled_monomial(m: int) -> GeneratorFunction:
    """f(x, v) = (1 + v^2) x^m, a b^m family varying along one Casimir."""
    if m < 1:
        raise ValueError(f"Monomial degree must be >= 1, got {m}")
    return GeneratorFunction(f"(1+v^2)x^{m}", lambda x, v: (1.0 + v * v) * x**m, parameters=1, zeros=[0.0])


def sine() -> GeneratorFunction:
    return GeneratorFunction(
        "sin", jetmath.sin, zeros=[k * np.pi for k in range(-3, 4)], zero_description="x = k*pi"
    )


_REGISTRY: Dict[str, Callable[..., GeneratorFunction]] = {
    "monomial": monomial,
    "scaled_monomial": scaled_monomial,
    "sine": sine,
}


def register_generator(name: str, factory: Callable[..., GeneratorFunction]) -> None:
    _REGISTRY[name] = factory


def get_generator(name: str, **params) -> GeneratorFunction:
    if name == "desing" and name not in _REGISTRY:
        # registers itself on import
        import src.desingularization.family  # noqa: F401
    if name not in _REGISTRY:
        raise ValueError(f"Unknown generator: {name}")
    return _REGISTRY[name](**params)
