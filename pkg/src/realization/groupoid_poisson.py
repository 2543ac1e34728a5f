"""
Poisson bivectors on local groupoid charts.

Three constructions share the GroupoidPoissonChart bundle: the one-dimensional
flow groupoid of a generator f (optionally times a pair groupoid carrying a
constant block pi0), the chart Poisson bivector of a commutative frame, and
the bivector along the identity bisection.
"""

import logging
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.flows.closed_forms import bm_chart_margin, closed_form_coefficients
from src.flows.generators import GeneratorFunction
from src.flows.scalar import FlowCoefficients, flow_coefficients
from src.flows.time_one import time1_flow
from src.geometry import jetmath
from src.geometry.errors import DimensionMismatchError, NonCommutingFrameError
from src.geometry.fields import AntisymmetricField, BivectorField, SmoothMap, VectorField, as_point, check_antisymmetric
from src.geometry.jet import Jet
from src.geometry.probes import ChartBox, probe_points
from src.groupoid.frame import AnchoredFrame, verify_commutative_frame

logger = logging.getLogger(__name__)

METHOD_ODE = "ode"
METHOD_CLOSED_FORM = "closed-form"


class GroupoidPoissonChart:
    """Groupoid bivector with its source, target and base bivector on one box."""

    def __init__(
        self,
        bivector: BivectorField,
        source: SmoothMap,
        target: SmoothMap,
        base: BivectorField,
        box: ChartBox,
        admissible: Optional[Callable[[np.ndarray], bool]] = None,
        name: str = "",
    ):
        if source.domain_dimension != bivector.dimension or target.domain_dimension != bivector.dimension:
            raise DimensionMismatchError("Source and target must be defined on the groupoid chart")
        if source.codomain_dimension != base.dimension or target.codomain_dimension != base.dimension:
            raise DimensionMismatchError("Source and target must land on the base chart")
        if box.dimension != bivector.dimension:
            raise DimensionMismatchError("Box dimension does not match the groupoid chart")
        self.bivector = bivector
        self.source = source
        self.target = target
        self.base = base
        self.box = box
        self.admissible = admissible
        self.name = name or bivector.name

    @property
    def dimension(self) -> int:
        return self.bivector.dimension

    def __repr__(self) -> str:
        return f"GroupoidPoissonChart({self.name}, dim={self.dimension})"


def _coefficients(f: GeneratorFunction, method: str) -> Callable[..., FlowCoefficients]:
    if method == METHOD_ODE:
        return lambda a, x, v: flow_coefficients(f, a, x, v)
    if method == METHOD_CLOSED_FORM:
        if f.degree is None or f.parameters:
            raise ValueError(f"No closed form for {f.name}")
        return lambda a, x, v: closed_form_coefficients(f.degree, a, x)
    raise ValueError(f"Unknown method: {method}")


def assemble_groupoid_poisson(
    f: GeneratorFunction,
    pi0=None,
    box: Optional[ChartBox] = None,
    method: str = METHOD_ODE,
    sign: float = 1.0,
    name: str = "",
    admissible: Optional[Callable[[np.ndarray], bool]] = None,
) -> GroupoidPoissonChart:
    """
    pi_G = d_a^d_y + alpha d_b^d_x + b beta d_b^d_y - f(x,v) d_x^d_y + pi0(p) - pi0(q)

    on coordinates (a, b, x, y, p_1..p_2m, q_1..q_2m, v_1..v_j), with
    source (x, y, q, v) and target (F, b G + y, p, v). `sign` multiplies the
    d_b^d_x coefficient and exists to build deliberately wrong candidates.
    """
    block = np.zeros((0, 0)) if pi0 is None else np.asarray(pi0, dtype=float)
    if block.size:
        check_antisymmetric(block)
    w = block.shape[0]
    j = f.parameters
    dim = 4 + 2 * w + j
    base_dim = 2 + w + j
    p_slice = slice(4, 4 + w)
    q_slice = slice(4 + w, 4 + 2 * w)
    v_slice = slice(4 + 2 * w, dim)
    coeffs = _coefficients(f, method)

    if box is None:
        box = ChartBox([(-1.0, 1.0)] * dim, name=name)
    if box.dimension != dim:
        raise DimensionMismatchError(f"Box has dimension {box.dimension}, chart needs {dim}")

    def entries(*z):
        a, b, x = z[0], z[1], z[2]
        v = list(z[v_slice])
        c = coeffs(a, x, v)
        out = {(0, 3): 1.0, (1, 2): sign * c.alpha, (1, 3): b * c.beta, (2, 3): -f(x, v)}
        for r in range(w):
            for s in range(r + 1, w):
                if block[r, s] != 0.0:
                    out[(4 + r, 4 + s)] = block[r, s]
                    out[(4 + w + r, 4 + w + s)] = -block[r, s]
        return out

    def source(*z):
        return [z[2], z[3], *z[q_slice], *z[v_slice]]

    def target(*z):
        a, b, x, y = z[0], z[1], z[2], z[3]
        v = list(z[v_slice])
        c = coeffs(a, x, v)
        return [c.F, b * c.G + y, *z[p_slice], *z[v_slice]]

    def base_entries(*u):
        out = {(0, 1): f(u[0], list(u[2 + w :]))}
        for r in range(w):
            for s in range(r + 1, w):
                if block[r, s] != 0.0:
                    out[(2 + r, 2 + s)] = block[r, s]
        return out

    label = name or f"pi_G[{f.name}]"
    if admissible is None and f.degree is not None and f.degree > 1:
        admissible = lambda z: bm_chart_margin(f.degree, z[0], z[2]) > 0.05
    return GroupoidPoissonChart(
        BivectorField(dim, entries, name=label),
        SmoothMap(dim, base_dim, source, name="s"),
        SmoothMap(dim, base_dim, target, name="t"),
        BivectorField(base_dim, base_entries, name=f"{f.name} dx^dy"),
        box,
        admissible=admissible,
        name=label,
    )


def pair_chart_poisson(
    frame: AnchoredFrame,
    f: AntisymmetricField,
    arrow_box: ChartBox,
    base_box: ChartBox,
    probes: Optional[Sequence] = None,
    name: str = "",
) -> GroupoidPoissonChart:
    """
    Chart Poisson bivector on (z_1..z_k, u_1..u_n) for a commutative frame
    and E-bivector coefficients W = f:

        zz block  W(t) - W(s)
        zu block  (W(s) rho(u)^T)_{i l}
        uu block  -rho(u) W(u) rho(u)^T

    with t = time-1 flow of sum z_i X_i from u and s = u. The base bivector
    is rho W rho^T.
    """
    if f.size != frame.rank or f.dimension != frame.dimension:
        raise DimensionMismatchError("Coefficients do not match the frame")
    k, n = frame.rank, frame.dimension
    checked = probes if probes is not None else probe_points(base_box, seed=0, count=8, grid=0)
    commutes, bracket = verify_commutative_frame(frame, checked)
    if not commutes:
        raise NonCommutingFrameError(f"Frame {frame.name} does not commute (|[X_i, X_j]| = {bracket:.3g})")

    def target_of(z, u):
        return time1_flow(frame.fields, z, u)

    def jet_fn(point, order):
        variables = Jet.variables(point, order)
        z, u = variables[:k], variables[k:]
        t = target_of(z, u)
        w_t = _matrix_at(f, t)
        w_s = _matrix_at(f, u)
        rho = [[Jet.lift(c, k + n, order) for c in row] for row in _anchor_at(frame, u)]
        zu = jetmath.matmul(w_s, jetmath.transpose(rho))
        uu = jetmath.matmul(jetmath.matmul(rho, w_s), jetmath.transpose(rho))
        out = {}
        for i in range(k):
            for j in range(i + 1, k):
                out[(i, j)] = w_t[i][j] - w_s[i][j]
            for l in range(n):
                out[(i, k + l)] = zu[i][l]
        for l in range(n):
            for m in range(l + 1, n):
                out[(k + l, k + m)] = -uu[l][m]
        return out

    def base_jets(point, order):
        u = Jet.variables(point, order)
        w_u = _matrix_at(f, u)
        rho = _anchor_at(frame, u)
        full = jetmath.matmul(jetmath.matmul(rho, w_u), jetmath.transpose(rho))
        return {(l, m): full[l][m] for l in range(n) for m in range(l + 1, n)}

    def target(*z):
        end = target_of(list(z[:k]), list(z[k:]))
        return list(end)

    label = name or f"pi_pair[{frame.name}]"
    return GroupoidPoissonChart(
        BivectorField.from_jet_function(k + n, jet_fn, name=label),
        SmoothMap.projection(k + n, range(k, k + n), name="s"),
        SmoothMap(k + n, n, target, name="t"),
        BivectorField.from_jet_function(n, base_jets, name=f"rho({f.name})"),
        arrow_box.product(base_box),
        name=label,
    )


def _matrix_at(field: AntisymmetricField, coords: Sequence) -> List[List]:
    """Full coefficient matrix of `field` evaluated on jet coordinates."""
    entries = field(*coords)
    size = field.size
    result: List[List] = [[0.0] * size for _ in range(size)]
    for (i, j), value in entries.items():
        result[i][j] = value
        result[j][i] = -value
    return result


def _anchor_at(frame: AnchoredFrame, coords: Sequence) -> List[List]:
    """rho[l][i] = X_i^l evaluated on (possibly jet) coordinates."""
    columns = [field(*coords) for field in frame.fields]
    return [[columns[i][l] for i in range(frame.rank)] for l in range(frame.dimension)]


def identity_bisection_bivector(dual_frame: Sequence[VectorField], f: AntisymmetricField, p) -> np.ndarray:
    """
    Bivector at the identity in the splitting A + TM (A-block first):

        sum_j rho(alpha_j) ^ e_j  -  sum_{i<j} f_ij rho(alpha_i) ^ rho(alpha_j)

    where e_j is the frame section dual to alpha_j.
    """
    k = len(dual_frame)
    if f.size != k:
        raise DimensionMismatchError(f"{k} dual sections but coefficients of size {f.size}")
    point = as_point(p, f.dimension)
    n = dual_frame[0].size
    rho_dual = np.column_stack([field.at(point) for field in dual_frame])
    w = f.matrix(point)
    result = np.zeros((k + n, k + n))
    cross = -rho_dual.T
    result[:k, k:] = cross
    result[k:, :k] = -cross.T
    result[k:, k:] = -rho_dual @ w @ rho_dual.T
    return result

