import logging
from typing import List, Sequence

import numpy as np
import pandas as pd

from src.desingularization.family import DesingFamily
from src.geometry.jet import Jet

logger = logging.getLogger(__name__)

ORDER_TOLERANCE = 0.2
DEFAULT_GRID = 201


class DesingReport:
    """sup over a grid of |g_eps^(j)| for j = 0..2k-1, one row per eps."""

    def __init__(self, k: int, eps: Sequence[float], sup_norms: np.ndarray):
        self.k = k
        self.eps = [float(e) for e in eps]
        self.sup_norms = np.asarray(sup_norms, dtype=float)
        if np.any(self.sup_norms < 0.0):
            raise ValueError("Sup norms must be nonnegative")

    @property
    def columns(self) -> List[str]:
        return [f"sup_g{j}" for j in range(self.sup_norms.shape[1])]

    @property
    def expected_orders(self) -> np.ndarray:
        return np.array([4 * self.k - 2 * j for j in range(self.sup_norms.shape[1])], dtype=float)

    @property
    def observed_orders(self) -> np.ndarray:
        """Slope of log sup|g^(j)| against log eps."""
        logs = np.log(np.abs(self.eps))
        return np.array([np.polyfit(logs, np.log(col), 1)[0] for col in self.sup_norms.T])

    def decreasing(self) -> bool:
        return bool(np.all(np.diff(self.sup_norms, axis=0) < 0.0))

    def order_defects(self) -> np.ndarray:
        """Relative gap between observed and expected orders per column."""
        return np.abs(self.observed_orders - self.expected_orders) / self.expected_orders

    @property
    def passed(self) -> bool:
        return self.decreasing() and bool(np.all(self.order_defects() <= ORDER_TOLERANCE))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.sup_norms, columns=self.columns)
        frame.insert(0, "eps", self.eps)
        return frame

    def orders_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "derivative": list(range(self.sup_norms.shape[1])),
                "expected_order": self.expected_orders,
                "observed_order": self.observed_orders,
            }
        )

    def __repr__(self) -> str:
        orders = ", ".join(f"{o:.3f}" for o in self.observed_orders)
        return f"DesingReport(k={self.k}, eps={self.eps}, orders=[{orders}])"


def derivative_sups(family: DesingFamily, grid: int = DEFAULT_GRID) -> np.ndarray:
    """sup over linspace(-eps^2, eps^2, grid) of |g_eps^(j)|, j = 0..2k-1."""
    order = 2 * family.k - 1
    width = family.width
    sups = np.zeros(order + 1)
    for x in np.linspace(-width, width, grid):
        (xj,) = Jet.variables([float(x)], order)
        jet = Jet.lift(family.g_eps(xj), 1, order)
        derivatives = [abs(jet.derivative((j,))) for j in range(order + 1)]
        sups = np.maximum(sups, derivatives)
    return sups


def convergence_report(k: int, eps_list: Sequence[float], grid: int = DEFAULT_GRID) -> DesingReport:
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 2:
        raise ValueError("Need at least two eps values")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])) or eps_list[-1] <= 0.0:
        raise ValueError(f"eps_list must be positive and decreasing, got {eps_list}")
    if grid < 3:
        raise ValueError("Grid needs at least three points")
    sups = np.array([derivative_sups(DesingFamily(k, eps), grid) for eps in eps_list])
    report = DesingReport(k, eps_list, sups)
    logger.info("%r", report)
    return report
