"""Adaptive Runge-Kutta integration with blow-up detection, on floats or jets."""

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from src.geometry.errors import OutOfChartError
from src.geometry.jet import Jet, jet_shape

logger = logging.getLogger(__name__)

BLOW_UP = 1e12


class IntegratorSettings:
    """DOP853 with tight tolerances; the flows are low-dimensional and non-stiff."""

    def __init__(self, rtol: float = 1e-12, atol: float = 1e-12, method: str = "DOP853", blow_up: float = BLOW_UP):
        if rtol <= 0 or atol <= 0:
            raise ValueError("Integrator tolerances must be positive")
        self.rtol = rtol
        self.atol = atol
        self.method = method
        self.blow_up = blow_up

    def __repr__(self) -> str:
        return f"IntegratorSettings({self.method}, rtol={self.rtol}, atol={self.atol})"


DEFAULT_SETTINGS = IntegratorSettings()


def integrate(
    rhs: Callable[[float, np.ndarray], Sequence[float]],
    y0: Sequence[float],
    t_span: Tuple[float, float] = (0.0, 1.0),
    settings: Optional[IntegratorSettings] = None,
) -> np.ndarray:
    """State at t_span[1]; raises OutOfChartError on blow-up or step collapse."""
    settings = settings or DEFAULT_SETTINGS
    y0 = np.asarray(y0, dtype=float)
    if t_span[0] == t_span[1]:
        return y0.copy()

    def fun(t, y):
        dy = np.asarray(rhs(t, y), dtype=float)
        if not np.all(np.isfinite(dy)):
            raise OutOfChartError(f"Vector field is not finite at t={t}, y={y}")
        return dy

    def escaped(t, y):
        return settings.blow_up - np.max(np.abs(y))

    escaped.terminal = True

    sol = solve_ivp(
        fun, t_span, y0, method=settings.method, rtol=settings.rtol, atol=settings.atol, events=escaped
    )
    if sol.status != 0:
        reason = "state left every bounded region" if sol.status == 1 else sol.message
        logger.debug("Integration from %s over %s stopped: %s", y0, t_span, reason)
        raise OutOfChartError(f"Flow does not reach t={t_span[1]}: {reason}")
    return sol.y[:, -1]


def integrate_jets(
    rhs: Callable[[float, List[Jet]], Sequence],
    y0: Sequence,
    t_span: Tuple[float, float] = (0.0, 1.0),
    settings: Optional[IntegratorSettings] = None,
    shape: Optional[Tuple[int, int]] = None,
) -> List[Jet]:
    """
    Integrate a system whose state is a list of jets.

    The Taylor coefficients of every state component are integrated together,
    so the result carries the derivatives of the flow with respect to the
    variables the initial jets depend on. `shape` = (nvars, order) is needed
    when the initial state holds only floats.
    """
    shape = shape or jet_shape(y0)
    if shape is None:
        raise ValueError("integrate_jets needs a jet shape or a jet in the initial state")
    nvars, order = shape
    start = [Jet.lift(v, nvars, order) for v in y0]
    size = start[0].coeffs.size
    count = len(start)

    def unpack(y: np.ndarray) -> List[Jet]:
        return [Jet(y[i * size : (i + 1) * size], nvars, order) for i in range(count)]

    def fun(t, y):
        out = rhs(t, unpack(y))
        return np.concatenate([Jet.lift(v, nvars, order).coeffs for v in out])

    flat = integrate(fun, np.concatenate([j.coeffs for j in start]), t_span, settings)
    return unpack(flat)
