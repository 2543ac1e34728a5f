from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.geometry.errors import ConfigError
from src.geometry.probes import ChartBox, coordinate_locus

KIND_GENERATOR = "generator"
KIND_IDENTITY_BISECTION = "identity_bisection"
KIND_FRAME = "frame"
KIND_PAIR_CHART = "pair_chart"
KIND_E_SYMPLECTIC = "e_symplectic"
KIND_POISSON = "poisson"
KIND_DESING = "desing"
KIND_COSYMPLECTIC = "cosymplectic"
KIND_EFORM = "eform"
KIND_UNKNOWN = "unknown"


def detect_fixture_kind(data: Dict[str, Any]) -> str:
    """
    Detects what a fixture describes from the keys it carries.
    """
    if "identity_bisection" in data:
        return KIND_IDENTITY_BISECTION
    if "generator" in data:
        return KIND_GENERATOR
    if "desing" in data:
        return KIND_DESING
    if "cosymplectic" in data:
        return KIND_COSYMPLECTIC
    if "eforms" in data:
        return KIND_EFORM

    if "frame" in data:
        # frame fixtures differ by the structure riding on the frame
        if "coefficients" in data:
            return KIND_PAIR_CHART
        if "omega" in data:
            return KIND_E_SYMPLECTIC
        if "poisson" in data:
            return KIND_POISSON
        if "arrow_box" in data:
            return KIND_FRAME

    return KIND_UNKNOWN


def parse_box(raw: Any, name: str = "", singular: Optional[Sequence] = None) -> ChartBox:
    """
    A box is a list of [lo, hi] pairs; `singular` lists [index, value]
    hyperplanes the probes keep away from.
    """
    try:
        bounds = [(float(lo), float(hi)) for lo, hi in raw]
        loci = [coordinate_locus(int(index), float(value)) for index, value in (singular or [])]
        return ChartBox(bounds, loci, name=name)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Failed to parse box '{name}': {e}")


def parse_matrix(raw: Any, name: str = "") -> np.ndarray:
    try:
        matrix = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Failed to parse matrix '{name}': {e}")
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ConfigError(f"Matrix '{name}' must be square, got shape {matrix.shape}")
    if np.max(np.abs(matrix + matrix.T), initial=0.0) > 0.0:
        raise ConfigError(f"Matrix '{name}' must be antisymmetric")
    return matrix


def require(data: Dict[str, Any], keys: List[str], name: str) -> None:
    missing = [key for key in keys if key not in data]
    if missing:
        raise ConfigError(f"Fixture '{name}' is missing {', '.join(missing)}")
