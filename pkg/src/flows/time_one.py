from typing import Optional, Sequence

import numpy as np

from src.flows.integrator import IntegratorSettings, integrate, integrate_jets
from src.geometry.errors import DimensionMismatchError
from src.geometry.fields import VectorField
from src.geometry.jet import jet_shape, value_of


def time1_flow(
    fields: Sequence[VectorField],
    coefficients: Sequence,
    u: Sequence,
    settings: Optional[IntegratorSettings] = None,
):
    """
    Endpoint of the time-1 integral curve of sum_i c_i X_i starting at u.

    Float inputs return an ndarray; jet coefficients or coordinates return a
    list of jets carrying the derivatives of the endpoint.
    """
    if len(fields) != len(coefficients):
        raise DimensionMismatchError(f"{len(fields)} fields but {len(coefficients)} coefficients")
    u = list(u)
    for field in fields:
        if field.dimension != len(u) or field.size != len(u):
            raise DimensionMismatchError(f"Field {field.name} does not live on a chart of dimension {len(u)}")

    def rhs(_, y):
        total = [0.0] * len(y)
        for c, field in zip(coefficients, fields):
            if not isinstance(c, float) or c != 0.0:
                total = [t + c * comp for t, comp in zip(total, field(*y))]
        return total

    shape = jet_shape([*coefficients, *u])
    if shape is not None:
        return integrate_jets(rhs, u, settings=settings, shape=shape)
    if all(value_of(c) == 0.0 for c in coefficients):
        return np.asarray(u, dtype=float)
    return integrate(rhs, u, settings=settings)
