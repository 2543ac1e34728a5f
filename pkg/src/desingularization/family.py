"""
Desingularization of the b^{2k} structure x^{2k} d_x ^ d_y.

On [-1, 1] the odd function h has

    1/h'(x) = x^{2k} + c (1 - x^2)^{2k+2},

a blend in u = x^2 that agrees with x^{2k} to order 2k+1 at x = +-1, and
outside it h(x) = sign(x) (2 - 1/((2k - 1)|x|^{2k-1})). The amplitude c is
solved once per k so that h(1) = 2 - 1/(2k - 1). Rescaling

    h_eps(x) = eps^{-(4k-2)} h(x / eps^2),   g_eps = 1/h_eps' - x^{2k}

gives g_eps = c eps^{4k} (1 - x^2/eps^4)^{2k+2} on (-eps^2, eps^2) and 0
outside, so x^{2k} + g_eps is positive everywhere when eps != 0.

The polynomial is 1/h', not h'. A polynomial h' matching 1/x^{2k} at the
ends would leave g_eps a rational function with no exact compact support.
"""

import logging
from typing import Dict

import numpy as np
from scipy import integrate, optimize

from src.flows.generators import GeneratorFunction, register_generator
from src.geometry.errors import DegenerateStructureError, OutOfChartError
from src.geometry.fields import BivectorField, check_antisymmetric
from src.geometry.jet import value_of

logger = logging.getLogger(__name__)

QUAD_TOL = 1e-14
INVERSE_TOL = 1e-11
NEWTON_STEPS = 4
CHECK_POINTS = 2001


class HermiteBlend:
    """The profile h for one k."""

    def __init__(self, k: int, amplitude: float):
        self.k = k
        self.order = 2 * k + 1
        self.amplitude = amplitude

    @property
    def h_at_one(self) -> float:
        return 2.0 - 1.0 / (2 * self.k - 1)

    def bump(self, u):
        """c (1 - u)^{2k+2} on u = x^2 <= 1."""
        return self.amplitude * (1.0 - u) ** (self.order + 1)

    def reciprocal(self, x):
        """1/h'(x)."""
        u = x * x
        if value_of(u) >= 1.0:
            return x ** (2 * self.k)
        return x ** (2 * self.k) + self.bump(u)

    def h_prime(self, x):
        return 1.0 / self.reciprocal(x)

    def _inner(self, x: float) -> float:
        value, _ = integrate.quad(lambda t: 1.0 / self.reciprocal(t), 0.0, abs(x), epsabs=QUAD_TOL, epsrel=1e-12, limit=200)
        return value

    def __call__(self, x: float) -> float:
        x = float(x)
        if x == 0.0:
            return 0.0
        if abs(x) > 1.0:
            tail = 2.0 - 1.0 / ((2 * self.k - 1) * abs(x) ** (2 * self.k - 1))
        else:
            tail = self._inner(x)
        return float(np.sign(x) * tail)

    def verify(self, points: int = CHECK_POINTS) -> float:
        """min h' on [-1, 1]; raises if h' or g fails positivity on the grid."""
        xs = np.linspace(-1.0, 1.0, points)
        bumps = np.array([self.bump(x * x) for x in xs])
        if np.any(bumps < 0.0):
            raise DegenerateStructureError(f"Blend for k={self.k} has a negative bump")
        slopes = np.array([self.h_prime(x) for x in xs])
        if not np.all(slopes > 0.0):
            raise DegenerateStructureError(f"Blend for k={self.k} has h' <= 0")
        return float(np.min(slopes))

    def __repr__(self) -> str:
        return f"HermiteBlend(k={self.k}, c={self.amplitude:.6g})"


_BLENDS: Dict[int, HermiteBlend] = {}


def build_h(k: int) -> HermiteBlend:
    """Solve the blend amplitude for h(1) = 2 - 1/(2k - 1); cached per k."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k in _BLENDS:
        return _BLENDS[k]

    target = 2.0 - 1.0 / (2 * k - 1)

    def mismatch(log_c):
        return HermiteBlend(k, float(np.exp(log_c)))._inner(1.0) - target

    log_c = optimize.brentq(mismatch, -12.0, 12.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    blend = HermiteBlend(k, float(np.exp(log_c)))
    blend.verify()
    logger.debug("Built %r", blend)
    _BLENDS[k] = blend
    return blend


class DesingFamily:
    def __init__(self, k: int, eps: float):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        eps = float(eps)
        if not -1.0 < eps < 1.0:
            raise ValueError(f"eps must lie in (-1, 1), got {eps}")
        self.k = k
        self.eps = eps
        self.h = build_h(k)

    @property
    def width(self) -> float:
        """eps^2, the half-width of the support of g_eps."""
        return self.eps * self.eps

    @property
    def scale(self) -> float:
        """eps^{-(4k-2)}."""
        return self.width ** -(2 * self.k - 1)

    @property
    def limit(self) -> float:
        """sup h_eps = 2 eps^{-(4k-2)}."""
        return 2.0 * self.scale

    def _require_eps(self) -> None:
        if self.eps == 0.0:
            raise ValueError("h_eps is undefined at eps = 0")

    def h_eps(self, x: float) -> float:
        self._require_eps()
        return self.scale * self.h(float(x) / self.width)

    def h_eps_prime(self, x):
        """x^{-2k} for |x| >= eps^2."""
        self._require_eps()
        return 1.0 / self.f_eps(x)

    def g_eps(self, x):
        if self.eps == 0.0:
            return 0.0
        w = self.width
        u = x * x / (w * w)
        if value_of(u) >= 1.0:
            return 0.0
        return w ** (2 * self.k) * self.h.bump(u)

    def f_eps(self, x):
        """x^{2k} + g_eps(x)."""
        return x ** (2 * self.k) + self.g_eps(x)

    def h_eps_inverse(self, y: float) -> float:
        """x with h_eps(x) = y: closed form on the tails, brentq then Newton inside."""
        self._require_eps()
        y = float(y)
        if abs(y) >= self.limit:
            raise OutOfChartError(f"{y} is outside the range (-{self.limit}, {self.limit}) of h_eps")
        edge = self.scale * self.h.h_at_one
        sign = 1.0 if y >= 0.0 else -1.0
        if abs(y) >= edge:
            return sign * ((2 * self.k - 1) * (self.limit - abs(y))) ** (-1.0 / (2 * self.k - 1))
        x = optimize.brentq(lambda t: self.h_eps(t) - y, -self.width, self.width, xtol=1e-16, rtol=4 * np.finfo(float).eps)
        for _ in range(NEWTON_STEPS):
            residual = self.h_eps(x) - y
            if abs(residual) < INVERSE_TOL * max(1.0, abs(y)):
                break
            x -= residual / self.h_eps_prime(x)
        return float(x)

    def generator(self) -> GeneratorFunction:
        if self.eps == 0.0:
            return GeneratorFunction(f"x^{2 * self.k}", lambda x: x ** (2 * self.k), zeros=[0.0], degree=2 * self.k)
        return GeneratorFunction(
            f"x^{2 * self.k}+g[{self.eps:g}]", self.f_eps, zero_description="no zeros"
        )

    def poisson(self, pi0=None, name: str = "") -> BivectorField:
        """pi_eps = (x^{2k} + g_eps) d_x ^ d_y plus a constant block pi0."""
        block = np.zeros((0, 0)) if pi0 is None else np.asarray(pi0, dtype=float)
        if block.size:
            check_antisymmetric(block)
        w = block.shape[0]

        def entries(*u):
            out = {(0, 1): self.f_eps(u[0])}
            for r in range(w):
                for s in range(r + 1, w):
                    if block[r, s] != 0.0:
                        out[(2 + r, 2 + s)] = block[r, s]
            return out

        return BivectorField(2 + w, entries, name=name or f"pi_eps[k={self.k}, eps={self.eps:g}]")

    def __repr__(self) -> str:
        return f"DesingFamily(k={self.k}, eps={self.eps:g})"


def h_eps(family: DesingFamily, x: float) -> float:
    return family.h_eps(x)


def h_eps_inverse(family: DesingFamily, y: float) -> float:
    return family.h_eps_inverse(y)


def desingularized_poisson(k: int, eps: float, pi0=None) -> BivectorField:
    return DesingFamily(k, eps).poisson(pi0)


def desing_generator(k: int = 1, eps: float = 0.1) -> GeneratorFunction:
    return DesingFamily(k, eps).generator()


register_generator("desing", desing_generator)
