"""
Grids of alpha(a, x), the groupoid bivector coefficients and the g_eps
profiles, written as CSV for external plotting.
"""

import logging
import os
from typing import Callable, Dict

import numpy as np
import pandas as pd

from src.desingularization.family import DesingFamily
from src.flows.closed_forms import closed_form_coefficients
from src.flows.generators import monomial
from src.geometry.errors import GeometryError
from src.realization.groupoid_poisson import METHOD_CLOSED_FORM, assemble_groupoid_poisson
from src.verification.config import RunConfig
from src.verification.report import write_csv

logger = logging.getLogger(__name__)

ALPHA_COLUMNS = ["a", "x", "alpha"]
PI_COLUMNS = ["a", "x", "pi_ay", "pi_bx", "pi_by", "pi_xy"]
G_EPS_COLUMNS = ["eps", "x", "g", "h_prime"]

PI_ENTRIES = (("pi_ay", (0, 3)), ("pi_bx", (1, 2)), ("pi_by", (1, 3)), ("pi_xy", (2, 3)))


def _nodes(config: RunConfig):
    a_nodes = np.linspace(*config.a_range, config.grid)
    x_nodes = np.linspace(*config.x_range, config.grid)
    return [(float(a), float(x)) for a in a_nodes for x in x_nodes]


def alpha_surface(config: RunConfig) -> pd.DataFrame:
    """alpha for f = x^m on the (a, x) grid; NaN where the chart ends."""
    rows = []
    for a, x in _nodes(config):
        try:
            alpha = float(closed_form_coefficients(config.m, a, x).alpha)
        except GeometryError:
            alpha = np.nan
        rows.append({"a": a, "x": x, "alpha": alpha})
    return pd.DataFrame(rows, columns=ALPHA_COLUMNS)


def pi_surface(config: RunConfig) -> pd.DataFrame:
    """Groupoid bivector coefficients for f = x^m at b = 1, y = 0."""
    chart = assemble_groupoid_poisson(monomial(config.m), method=METHOD_CLOSED_FORM)
    rows = []
    for a, x in _nodes(config):
        row: Dict[str, float] = {"a": a, "x": x}
        try:
            matrix = chart.bivector.matrix([a, 1.0, x, 0.0])
            row.update({label: float(matrix[idx]) for label, idx in PI_ENTRIES})
        except GeometryError:
            row.update({label: np.nan for label, _ in PI_ENTRIES})
        rows.append(row)
    return pd.DataFrame(rows, columns=PI_COLUMNS)


def g_eps_surface(config: RunConfig) -> pd.DataFrame:
    """g_eps and h_eps' over [-2 eps^2, 2 eps^2] for each eps."""
    rows = []
    if config.grid:
        for eps in config.eps:
            family = DesingFamily(config.k, eps)
            for x in np.linspace(-2.0 * family.width, 2.0 * family.width, config.grid):
                x = float(x)
                rows.append({"eps": eps, "x": x, "g": family.g_eps(x), "h_prime": family.h_eps_prime(x)})
    return pd.DataFrame(rows, columns=G_EPS_COLUMNS)


SURFACES: Dict[str, Callable[[RunConfig], pd.DataFrame]] = {
    "alpha": alpha_surface,
    "pi": pi_surface,
    "g_eps": g_eps_surface,
}


def write_surface(config: RunConfig) -> str:
    frame = SURFACES[config.quantity](config)
    try:
        os.makedirs(config.out, exist_ok=True)
        path = write_csv(frame, os.path.join(config.out, f"surface_{config.quantity}.csv"))
    except OSError as e:
        raise RuntimeError(f"Failed to write surface to '{config.out}': {e}")
    logger.info("Wrote %d rows to %s", len(frame), path)
    return path
