"""
Multiplicative forms on a pair-type chart of a cosymplectic manifold and the
symplectization form on (p, chart).
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from src.cosymplectic.structure import CLOSED_TOL, CosymplecticStructure
from src.geometry.errors import DegenerateStructureError, DimensionMismatchError, FibrationMismatchError
from src.geometry.fields import BivectorField, CovectorField, ScalarField, SmoothMap, TwoFormField, as_point
from src.geometry.jet import Jet
from src.geometry.probes import ChartBox
from src.geometry.tensors import d_one_form, exterior_derivative_1form, exterior_derivative_2form, pfaffian, pushforward_bivector

logger = logging.getLogger(__name__)

PULLBACK_TOL = 1e-9
PFAFFIAN_TOL = 1e-10
PROJECTION_TOL = 1e-9


def pullback_one_form(phi: SmoothMap, alpha: CovectorField, name: str = "") -> CovectorField:
    """(phi^* alpha)_i = alpha_a(phi) d_i phi^a."""
    if alpha.dimension != phi.codomain_dimension:
        raise DimensionMismatchError("1-form does not live on the codomain")
    n = phi.domain_dimension

    def component(i):
        def jet_fn(point, order):
            image = phi.jets(point, order + 1)
            coeffs = alpha(*[v.truncate(order) for v in image])
            return sum((Jet.lift(c, n, order) * image[a].partial(i) for a, c in enumerate(coeffs)), 0.0)

        return ScalarField.from_jet_function(n, jet_fn, name=f"{name}[{i}]")

    return CovectorField([component(i) for i in range(n)], name=name or f"{phi.name}*{alpha.name}")


def pullback_two_form(phi: SmoothMap, omega: TwoFormField, name: str = "") -> TwoFormField:
    """(phi^* omega)_{ij} = d_i phi^a omega_ab(phi) d_j phi^b."""
    if omega.dimension != phi.codomain_dimension:
        raise DimensionMismatchError("2-form does not live on the codomain")
    n, m = phi.domain_dimension, phi.codomain_dimension

    def jet_fn(point, order):
        image = phi.jets(point, order + 1)
        values = [v.truncate(order) for v in image]
        matrix = [[Jet.lift(c, n, order) for c in row] for row in _full(omega, values, m)]
        grads = [[image[a].partial(i) for i in range(n)] for a in range(m)]
        out = {}
        for i in range(n):
            for j in range(i + 1, n):
                total = Jet.constant(0.0, n, order)
                for a in range(m):
                    for b in range(m):
                        if a != b:
                            total = total + grads[a][i] * matrix[a][b] * grads[b][j]
                out[(i, j)] = total
        return out

    return TwoFormField.from_jet_function(n, jet_fn, name=name or f"{phi.name}*{omega.name}")


def _full(omega: TwoFormField, coords, size: int):
    entries = omega(*coords)
    matrix = [[0.0] * size for _ in range(size)]
    for (i, j), v in entries.items():
        matrix[i][j] = v
        matrix[j][i] = -v
    return matrix


class PairChart:
    """Arrow chart whose source and target land on the cosymplectic chart."""

    def __init__(self, source: SmoothMap, target: SmoothMap, box: ChartBox, name: str = ""):
        if source.domain_dimension != target.domain_dimension or source.codomain_dimension != target.codomain_dimension:
            raise DimensionMismatchError("Source and target must share domain and codomain")
        if box.dimension != source.domain_dimension:
            raise DimensionMismatchError("Box does not match the arrow chart")
        self.source = source
        self.target = target
        self.box = box
        self.name = name

    @property
    def dimension(self) -> int:
        return self.source.domain_dimension

    def __repr__(self) -> str:
        return f"PairChart({self.name or '?'}, dim={self.dimension})"


def pair_chart_cosym_forms(
    c: CosymplecticStructure, chart: PairChart, probes: Sequence, tol: float = PULLBACK_TOL
) -> Tuple[TwoFormField, CovectorField]:
    """(omega_hat = t^* omega - s^* omega, alpha_hat = s^* alpha); requires s^* alpha = t^* alpha."""
    if chart.source.codomain_dimension != c.dimension:
        raise DimensionMismatchError(f"{chart!r} does not land on {c!r}")
    s_alpha = pullback_one_form(chart.source, c.alpha, name="s*alpha")
    t_alpha = pullback_one_form(chart.target, c.alpha, name="t*alpha")
    worst, witness = 0.0, None
    for p in probes:
        point = as_point(p, chart.dimension)
        gap = float(np.max(np.abs(s_alpha.at(point) - t_alpha.at(point))))
        if witness is None or gap > worst:
            worst, witness = gap, point
    if worst >= tol:
        raise FibrationMismatchError(f"s^* alpha and t^* alpha differ by {worst:.3g} at {witness.tolist()}")
    t_omega = pullback_two_form(chart.target, c.omega, name="t*omega")
    s_omega = pullback_two_form(chart.source, c.omega, name="s*omega")
    n = chart.dimension

    def jet_fn(point, order):
        left, right = t_omega.jets(point, order), s_omega.jets(point, order)
        return {key: left[key] - right[key] for key in left}

    omega_hat = TwoFormField.from_jet_function(n, jet_fn, name="omega_hat")
    return omega_hat, CovectorField(s_alpha.components, name="alpha_hat")


class SymplectizationChart:
    """omega_tilde = dp ^ alpha_hat + p d alpha_hat + omega_hat on (p, arrow chart)."""

    def __init__(self, form: TwoFormField, chart: PairChart, name: str = ""):
        if form.dimension != chart.dimension + 1:
            raise DimensionMismatchError("The symplectization adds exactly one coordinate")
        self.form = form
        self.chart = chart
        self.name = name or form.name

    @property
    def dimension(self) -> int:
        return self.form.dimension

    def _shifted(self, inner: SmoothMap, name: str) -> SmoothMap:
        return SmoothMap(self.dimension, inner.codomain_dimension, lambda *z: inner.apply(*z[1:]), name=name)

    @property
    def source(self) -> SmoothMap:
        return self._shifted(self.chart.source, "s")

    @property
    def target(self) -> SmoothMap:
        return self._shifted(self.chart.target, "t")

    def closedness(self, probes: Sequence) -> float:
        return max((float(np.max(np.abs(exterior_derivative_2form(self.form, p)))) for p in probes), default=0.0)

    def pfaffian(self, p) -> float:
        return pfaffian(self.form.matrix(p))

    def nondegeneracy(self, probes: Sequence, tol: float = PFAFFIAN_TOL) -> float:
        """Smallest |Pf| over the probes; raises with a witness below tol."""
        smallest = np.inf
        for p in probes:
            value = abs(self.pfaffian(p))
            if value <= tol:
                raise DegenerateStructureError(f"{self.name} is degenerate at {np.asarray(p).tolist()} (Pf = {value:.3g})")
            smallest = min(smallest, value)
        return float(smallest)

    def dual_bivector(self, p) -> np.ndarray:
        """P = -W^{-1}."""
        return -np.linalg.inv(self.form.matrix(p))

    def projection_defect(self, pi: BivectorField, probes: Sequence) -> float:
        """max |t_* P - pi(t)| and |s_* P + pi(s)| over the probes."""
        worst = 0.0
        source, target = self.source, self.target
        for p in probes:
            point = as_point(p, self.dimension)
            dual = self.dual_bivector(point)
            worst = max(
                worst,
                float(np.max(np.abs(pushforward_bivector(target, dual, point) - pi.matrix(target(point))))),
                float(np.max(np.abs(pushforward_bivector(source, dual, point) + pi.matrix(source(point))))),
            )
        return worst

    def __repr__(self) -> str:
        return f"SymplectizationChart({self.name}, dim={self.dimension})"


def symplectization_form(
    omega_hat: TwoFormField,
    alpha_hat: CovectorField,
    chart: PairChart,
    probes: Optional[Sequence] = None,
    name: str = "omega_tilde",
) -> SymplectizationChart:
    """
    omega_tilde = d(p alpha_hat) + omega_hat on coordinates (p, chart). With
    probes, the inputs are checked closed and the result closed and
    nondegenerate there.
    """
    n = chart.dimension
    if omega_hat.dimension != n or alpha_hat.dimension != n:
        raise DimensionMismatchError("Forms do not live on the arrow chart")
    d_alpha = d_one_form(alpha_hat)

    def entries(*z):
        p, u = z[0], z[1:]
        a = alpha_hat(*u)
        da = d_alpha(*u)
        w = omega_hat(*u)
        out = {(0, j + 1): a[j] for j in range(n)}
        for i in range(n):
            for j in range(i + 1, n):
                out[(i + 1, j + 1)] = w.get((i, j), 0.0) + p * da.get((i, j), 0.0)
        return out

    chart_form = SymplectizationChart(TwoFormField(n + 1, entries, name=name), chart, name=name)
    if probes is not None:
        probes = list(probes)
        inner = [as_point(p, n + 1)[1:] for p in probes]
        inputs = max(
            max((float(np.max(np.abs(exterior_derivative_2form(omega_hat, u)))) for u in inner), default=0.0),
            max((float(np.max(np.abs(exterior_derivative_1form(alpha_hat, u)))) for u in inner), default=0.0),
        )
        if inputs >= CLOSED_TOL:
            raise DegenerateStructureError(f"Inputs are not closed (|d| = {inputs:.3g})")
        closed = chart_form.closedness(probes)
        if closed >= CLOSED_TOL:
            raise DegenerateStructureError(f"{name} is not closed (|d| = {closed:.3g})")
        chart_form.nondegeneracy(probes)
    return chart_form
