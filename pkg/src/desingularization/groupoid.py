from typing import Optional

from src.desingularization.family import DesingFamily
from src.flows.closed_forms import bm_chart_margin, closed_form_bm
from src.flows.scalar import SEAM, alpha_series, solve_F
from src.geometry.errors import OutOfChartError
from src.geometry.probes import ChartBox
from src.geometry.tensors import pfaffian4
from src.realization.groupoid_poisson import METHOD_CLOSED_FORM, METHOD_ODE, GroupoidPoissonChart, assemble_groupoid_poisson

RANGE_MARGIN = 0.9


def desing_F(family: DesingFamily, a: float, x: float) -> float:
    """F(a, x, eps) = h_eps^{-1}(a + h_eps(x)); the b^{2k} flow at eps = 0."""
    a, x = float(a), float(x)
    if a == 0.0:
        return x
    if family.eps == 0.0:
        return float(closed_form_bm(2 * family.k, a, x)[0])
    return family.h_eps_inverse(a + family.h_eps(x))


def desing_alpha(family: DesingFamily, a: float, x: float) -> float:
    """
    1 at a = 0; at eps = 0, 1 on x = 0 and the b^{2k} closed form elsewhere;
    at eps != 0 the seam series for |a| < SEAM and a f_eps(x)/(F - x) otherwise.
    """
    a, x = float(a), float(x)
    if a == 0.0:
        return 1.0
    if family.eps == 0.0:
        if x == 0.0:
            return 1.0
        return float(closed_form_bm(2 * family.k, a, x)[2])
    if abs(a) < SEAM:
        return float(alpha_series(family.generator(), a, x))
    return a * family.f_eps(x) / (desing_F(family, a, x) - x)


def in_range(family: DesingFamily, a: float, x: float, margin: float = RANGE_MARGIN) -> bool:
    """
    Whether (a, x) stays inside the domain of the groupoid chart. For eps != 0
    the distance of a + h_eps(x) to the end of the range of h_eps is compared
    with that of h_eps(x); on the tails the ratio is (x/F)^{2k-1}, the same
    margin as at eps = 0.
    """
    if family.eps == 0.0:
        return bm_chart_margin(2 * family.k, a, x) > 1.0 - margin
    start = family.h_eps(x)
    room = family.limit - abs(a + start)
    return room > (1.0 - margin) * (family.limit - abs(start))


def flow_residual(family: DesingFamily, a: float, x: float) -> float:
    """|desing_F - time-a flow of x^{2k} + g_eps|."""
    if not in_range(family, a, x):
        raise OutOfChartError(f"(a, x) = ({a}, {x}) is outside the chart of {family!r}")
    return abs(desing_F(family, a, x) - solve_F(family.generator(), a, x))


def seam_jump(family: DesingFamily, x: float) -> float:
    """Largest gap of desing_alpha across the a = +-SEAM seams."""
    jumps = []
    for side in (-1.0, 1.0):
        inner = desing_alpha(family, side * SEAM * (1.0 - 1e-9), x)
        outer = desing_alpha(family, side * SEAM * (1.0 + 1e-9), x)
        jumps.append(abs(inner - outer))
    return max(jumps)


def desing_groupoid_chart(family: DesingFamily, pi0=None, box: Optional[ChartBox] = None) -> GroupoidPoissonChart:
    """Groupoid bivector of x^{2k} + g_eps (times the pair groupoid of pi0)."""
    method = METHOD_CLOSED_FORM if family.eps == 0.0 else METHOD_ODE
    return assemble_groupoid_poisson(
        family.generator(),
        pi0,
        box=box,
        method=method,
        name=f"pi_G[{family!r}]",
        admissible=lambda z: in_range(family, z[0], z[2]),
    )


def block_pfaffian(chart: GroupoidPoissonChart, z) -> float:
    """Pfaffian of the (a, b, x, y) block of the groupoid bivector at z."""
    matrix = chart.bivector.matrix(z)
    return float(pfaffian4(matrix[:4, :4]))
