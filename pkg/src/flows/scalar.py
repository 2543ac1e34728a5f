"""
Scalar functions of the one-dimensional groupoid: the flow F of a generator,
the functions G and alpha built from it, and the exponential mean
E(a) = (e^a - 1)/a.

Every function is evaluated on three branches: a = 0 exactly, a Taylor series
for |a| < SEAM, and the direct formula otherwise. `flow_coefficients` gives the
same quantities from one smooth variational system without any branch.
"""

import math
from typing import Optional, Sequence

from src.flows.generators import GeneratorFunction
from src.flows.integrator import IntegratorSettings, integrate, integrate_jets
from src.geometry import jetmath
from src.geometry.jet import Jet, jet_shape, value_of

SEAM = 1e-4
FD_STEP = 1e-5
EXP_MEAN_SERIES_RADIUS = 1.0
EXP_MEAN_SERIES_TERMS = 60


class ExpMean:
    """E(a) = (e^a - 1)/a with E(0) = 1, and its derivatives."""

    def series_branch(self, a: float) -> float:
        return 1.0 + a / 2.0 + a * a / 6.0 + a**3 / 24.0

    def direct_branch(self, a: float) -> float:
        return math.expm1(a) / a

    def value(self, a: float) -> float:
        a = float(a)
        if a == 0.0:
            return 1.0
        if abs(a) < SEAM:
            return self.series_branch(a)
        return self.direct_branch(a)

    def derivative(self, a: float, n: int = 1) -> float:
        """
        E^(n)(a): the series sum_k a^k / (k! (n + k + 1)) near zero, the
        recurrence E^(n) = (e^a - n E^(n-1)) / a elsewhere.
        """
        if n < 0:
            raise ValueError("Derivative order must be nonnegative")
        a = float(a)
        if n == 0:
            return self.value(a)
        if abs(a) < EXP_MEAN_SERIES_RADIUS:
            total, term = 0.0, 1.0
            for k in range(EXP_MEAN_SERIES_TERMS):
                if k:
                    term *= a / k
                total += term / (n + k + 1)
                if abs(term) < 1e-18 * abs(total):
                    break
            return total
        e = math.exp(a)
        current = self.direct_branch(a)
        for j in range(1, n + 1):
            current = (e - j * current) / a
        return current

    def taylor(self, a: float, order: int) -> list:
        return [self.derivative(a, n) / math.factorial(n) for n in range(order + 1)]

    def __call__(self, a):
        if isinstance(a, Jet):
            return a.compose_univariate(self.taylor(a.value, a.order))
        return self.value(a)


EXP_MEAN = ExpMean()


class FlowCoefficients:
    """F, G, alpha and beta = (1 - alpha)/a at one (a, x, v)."""

    def __init__(self, F, G, alpha, beta):
        self.F = F
        self.G = G
        self.alpha = alpha
        self.beta = beta

    def values(self) -> tuple:
        return tuple(value_of(q) for q in (self.F, self.G, self.alpha, self.beta))

    def __repr__(self) -> str:
        F, G, alpha, beta = self.values()
        return f"FlowCoefficients(F={F!r}, G={G!r}, alpha={alpha!r}, beta={beta!r})"


def _rhs(f: GeneratorFunction, a, v):
    def rhs(_, y):
        return [a * f(y[0], v)]

    return rhs


def solve_F(f: GeneratorFunction, a, x, v: Sequence = (), settings: Optional[IntegratorSettings] = None):
    """
    F(a, x, v): the time-a flow of f(., v) from x, integrated on s in [0, 1]
    as dPhi/ds = a f(Phi, v). Jet arguments return jets.
    """
    v = list(v)
    if value_of(a) == 0.0 and not isinstance(a, Jet):
        return x
    shape = jet_shape([a, x, *v])
    if shape is not None:
        (end,) = integrate_jets(_rhs(f, a, v), [x], settings=settings, shape=shape)
        return end
    return float(integrate(_rhs(f, a, v), [x], settings=settings)[0])


def _seam_terms(derivs):
    """Coefficients of a^0..a^3 in S = (F - x)/(a f)."""
    f0, f1, f2, f3 = derivs
    return (
        1.0,
        f1 / 2.0,
        (f1 * f1 + f0 * f2) / 6.0,
        (f1 * f1 * f1 + 4.0 * f0 * f1 * f2 + f0 * f0 * f3) / 24.0,
    )


def seam_ratio(f: GeneratorFunction, a, x, v: Sequence = ()):
    """S(a, x) = -G/f to third order in a."""
    terms = _seam_terms(f.x_derivatives(x, list(v), 3))
    return jetmath.polyval(terms, a)


def G_series(f: GeneratorFunction, a, x, v: Sequence = ()):
    return -f(x, list(v)) * seam_ratio(f, a, x, v)


def G_direct(f: GeneratorFunction, a, x, v: Sequence = (), settings: Optional[IntegratorSettings] = None):
    return (x - solve_F(f, a, x, v, settings)) / a


def G_of(f: GeneratorFunction, a, x, v: Sequence = (), settings: Optional[IntegratorSettings] = None):
    """G = (x - F)/a, with G(0, x, v) = -f(x, v) and a series branch near a = 0."""
    v = list(v)
    if value_of(a) == 0.0:
        return -f(x, v)
    if abs(value_of(a)) < SEAM:
        return G_series(f, a, x, v)
    return G_direct(f, a, x, v, settings)


def alpha_series(f: GeneratorFunction, a, x, v: Sequence = ()):
    return 1.0 / seam_ratio(f, a, x, v)


def alpha_direct(f: GeneratorFunction, a, x, v: Sequence = (), settings: Optional[IntegratorSettings] = None):
    return -f(x, list(v)) / G_direct(f, a, x, v, settings)


def alpha_of(f: GeneratorFunction, a, x, v: Sequence = (), settings: Optional[IntegratorSettings] = None):
    """
    alpha = -f/G. Exactly 1 at a = 0; the series 1/S near a = 0; at zeros
    of f the continuous limit 1/E(a f'(x)), which is 1 at zeros of order >= 2.
    """
    v = list(v)
    if value_of(a) == 0.0:
        return 1.0
    if abs(value_of(a)) < SEAM:
        return alpha_series(f, a, x, v)
    if value_of(f(x, v)) == 0.0:
        if jet_shape([a, x, *v]) is not None:
            return flow_coefficients(f, a, x, v, settings).alpha
        return 1.0 / EXP_MEAN(a * f.derivative(x, v, 1))
    return alpha_direct(f, a, x, v, settings)


def beta_of(f: GeneratorFunction, a, x, v: Sequence = (), settings: Optional[IntegratorSettings] = None):
    """beta = (1 - alpha)/a, the coefficient of b d_b ^ d_y; f'(x)/2 at a = 0."""
    v = list(v)
    if value_of(a) == 0.0 or abs(value_of(a)) < SEAM:
        s0, s1, s2, s3 = _seam_terms(f.x_derivatives(x, v, 3))
        return jetmath.polyval((s1, s2, s3), a) / jetmath.polyval((s0, s1, s2, s3), a)
    return (1.0 - alpha_of(f, a, x, v, settings)) / a


def dFdx_check(f: GeneratorFunction, a: float, x: float, v: Sequence = (), step: float = FD_STEP) -> float:
    """|central difference of F in x - f(F)/f(x)|."""
    v = list(v)
    fx = float(f(x, v))
    if fx == 0.0:
        raise ValueError(f"dFdx_check is undefined at a zero of {f.name} (x={x})")
    if a == 0.0:
        return 0.0
    h = step * max(1.0, abs(x))
    fd = (solve_F(f, a, x + h, v) - solve_F(f, a, x - h, v)) / (2.0 * h)
    return abs(fd - float(f(solve_F(f, a, x, v), v)) / fx)


def flow_coefficients(
    f: GeneratorFunction, a, x, v: Sequence = (), settings: Optional[IntegratorSettings] = None
) -> FlowCoefficients:
    """
    F, G, alpha, beta from the variational system on s in [0, 1]

        Phi' = a f(Phi),  eta' = f_x(Phi) (1 + a eta),  Q' = eta

    from (x, 0, 0). With R = 1 + a Q: alpha = 1/R, beta = Q/R, G = -f(x) R.
    """
    v = list(v)

    def rhs(_, y):
        phi, eta, _q = y
        fx = f.x_partial(phi, v)
        return [a * f(phi, v), fx * (1.0 + a * eta), eta]

    shape = jet_shape([a, x, *v])
    if shape is not None:
        phi, _, q = integrate_jets(rhs, [x, 0.0, 0.0], settings=settings, shape=shape)
    elif a == 0.0:
        # eta = f_x(x) s, so Q(1) = f_x(x)/2
        phi, q = x, float(f.x_partial(x, v)) / 2.0
    else:
        phi, _, q = integrate(rhs, [x, 0.0, 0.0], settings=settings)
        phi, q = float(phi), float(q)
    r = 1.0 + a * q
    return FlowCoefficients(F=phi, G=-f(x, v) * r, alpha=1.0 / r, beta=q / r)


def semigroup_defect(f: GeneratorFunction, a: float, a_prime: float, x: float, v: Sequence = ()) -> float:
    """|F(a + a', x) - F(a, F(a', x))|."""
    v = list(v)
    return abs(solve_F(f, a + a_prime, x, v) - solve_F(f, a, solve_F(f, a_prime, x, v), v))


class FlowSolution:
    """F(a, x, v) by one method, with the residual of dF/da = f(F)."""

    METHOD_ODE = "ode"
    METHOD_CLOSED_FORM = "closed-form"

    def __init__(self, generator: GeneratorFunction, method: str = METHOD_ODE, tolerance: float = 1e-8):
        if method not in (self.METHOD_ODE, self.METHOD_CLOSED_FORM):
            raise ValueError(f"Unknown method: {method}")
        if method == self.METHOD_CLOSED_FORM and generator.degree is None:
            raise ValueError(f"No closed form for {generator.name}")
        self.generator = generator
        self.method = method
        self.tolerance = tolerance

    def __call__(self, a, x, v: Sequence = ()):
        if self.method == self.METHOD_CLOSED_FORM:
            from src.flows.closed_forms import closed_form_bm

            return closed_form_bm(self.generator.degree, a, x)[0]
        return solve_F(self.generator, a, x, v)

    def residual(self, a: float, x: float, v: Sequence = ()) -> float:
        """|dF/da - f(F)| with dF/da taken from a jet in a."""
        (aj,) = Jet.variables([a], 1)
        F = self(aj, x, v)
        F = Jet.lift(F, 1, 1)
        return abs(F.gradient[0] - float(self.generator(F.value, list(v))))

    def __repr__(self) -> str:
        return f"FlowSolution({self.generator.name}, {self.method})"
