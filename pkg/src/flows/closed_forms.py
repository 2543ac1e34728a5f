"""
Closed forms for f(x) = x^m.

With c = m - 1 and z = a x^c the flow is F = x g(z), g(z) = (1 - c z)^(-1/c)
(g = e^z for m = 1). Writing phi = (g - 1)/z and psi = (phi - 1)/z:

    G = -x^m phi,  alpha = 1/phi,  beta = (1 - alpha)/a = x^c psi / phi.

phi and psi switch to their power series in z near z = 0.
"""

import math
from functools import lru_cache
from typing import List, Tuple

from src.flows.scalar import FlowCoefficients
from src.geometry import jetmath
from src.geometry.errors import OutOfChartError
from src.geometry.jet import value_of

SERIES_RADIUS = 1e-2
SERIES_TERMS = 12


@lru_cache(maxsize=None)
def _growth_series(c: int, terms: int) -> Tuple[float, ...]:
    """gamma_n = prod_{i<n} (1 + i c) / n!, the Taylor coefficients of g."""
    gammas: List[float] = [1.0]
    for n in range(1, terms):
        gammas.append(gammas[-1] * (1 + (n - 1) * c) / n)
    return tuple(gammas)


def _phi_psi(c: int, z):
    if abs(value_of(z)) < SERIES_RADIUS:
        gammas = _growth_series(c, SERIES_TERMS + 2)
        return jetmath.polyval(gammas[1:], z), jetmath.polyval(gammas[2:], z)
    if c == 0:
        phi = jetmath.expm1(z) / z
    else:
        phi = jetmath.expm1(-jetmath.log1p(-c * z) / c) / z
    return phi, (phi - 1.0) / z


def _check_chart(m: int, a, x) -> int:
    if m < 1:
        raise ValueError(f"Closed forms need m >= 1, got {m}")
    c = m - 1
    if c and 1.0 - c * value_of(a) * value_of(x) ** c <= 0.0:
        raise OutOfChartError(f"1 - {c} a x^{c} <= 0 at a={value_of(a)}, x={value_of(x)}: outside the b^{m} chart")
    return c


def closed_form_coefficients(m: int, a, x) -> FlowCoefficients:
    """F, G, alpha, beta for f = x^m; jet arguments return jets."""
    c = _check_chart(m, a, x)
    xc = x**c if c else 1.0
    z = a * xc
    phi, psi = _phi_psi(c, z)
    g = 1.0 + z * phi
    return FlowCoefficients(F=x * g, G=-(x**m) * phi, alpha=1.0 / phi, beta=xc * psi / phi)


def closed_form_bm(m: int, a, x) -> Tuple:
    """(F, G, alpha) for f(x) = x^m."""
    coeffs = closed_form_coefficients(m, a, x)
    return coeffs.F, coeffs.G, coeffs.alpha


def bm_chart_margin(m: int, a: float, x: float) -> float:
    """1 - (m - 1) a x^(m-1); the b^m chart is where this is positive."""
    c = m - 1
    return 1.0 - c * a * math.pow(x, c) if c else math.inf
