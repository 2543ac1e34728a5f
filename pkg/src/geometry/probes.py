"""
Deterministic probe clouds for invariant checks.

A probe cloud is a scrambled Halton grid plus uniform random points, both
seeded, restricted to a coordinate box and kept out of a thin tube around the
declared singular loci of the chart.
"""

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from src.geometry.errors import DimensionMismatchError

logger = logging.getLogger(__name__)

TUBE_RADIUS = 1e-3
GRID_POINTS = 16
RANDOM_POINTS = 64
MAX_DRAW_ROUNDS = 50

Locus = Callable[[np.ndarray], float]


class ChartBox:
    """
    Axis-aligned coordinate box.

    Each singular locus is a callable returning the distance (or any
    nonnegative proxy of it) from a point to the locus.
    """

    def __init__(self, bounds: Sequence[Tuple[float, float]], singular_loci: Sequence[Locus] = (), name: str = ""):
        bounds = [(float(lo), float(hi)) for lo, hi in bounds]
        if not bounds:
            raise DimensionMismatchError("ChartBox needs at least one coordinate")
        for lo, hi in bounds:
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
                raise ValueError(f"Invalid box bounds ({lo}, {hi})")
        self.bounds = bounds
        self.singular_loci = list(singular_loci)
        self.name = name

    @property
    def dimension(self) -> int:
        return len(self.bounds)

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])

    def contains(self, point, slack: float = 0.0) -> bool:
        point = np.asarray(point, dtype=float)
        return bool(np.all(point >= self.lower - slack) and np.all(point <= self.upper + slack))

    def distance_to_singular(self, point) -> float:
        if not self.singular_loci:
            return float("inf")
        point = np.asarray(point, dtype=float)
        return min(float(locus(point)) for locus in self.singular_loci)

    def admissible(self, point, tube: float = TUBE_RADIUS) -> bool:
        return self.contains(point) and self.distance_to_singular(point) > tube

    def product(self, other: "ChartBox", name: str = "") -> "ChartBox":
        """Box on the concatenated coordinates; loci act on their own block."""
        n = self.dimension
        loci = [lambda p, f=f: f(p[:n]) for f in self.singular_loci]
        loci += [lambda p, f=f: f(p[n:]) for f in other.singular_loci]
        return ChartBox(self.bounds + other.bounds, loci, name=name or f"{self.name}x{other.name}")

    def __repr__(self) -> str:
        return f"ChartBox({self.name or '?'}, {self.bounds})"


def coordinate_locus(index: int, value: float = 0.0) -> Locus:
    """Distance to the hyperplane {x_index = value}."""
    return lambda p: abs(p[index] - value)


def halton_grid(box: ChartBox, count: int, seed: int) -> np.ndarray:
    if count <= 0:
        return np.empty((0, box.dimension))
    sampler = qmc.Halton(d=box.dimension, scramble=True, seed=seed)
    return qmc.scale(sampler.random(count), box.lower, box.upper)


def probe_points(
    box: ChartBox,
    seed: int = 0,
    count: int = RANDOM_POINTS,
    grid: int = GRID_POINTS,
    tube: float = TUBE_RADIUS,
    accept: Optional[Callable[[np.ndarray], bool]] = None,
) -> np.ndarray:
    """
    `grid` Halton points (inadmissible ones dropped) followed by exactly
    `count` admissible uniform points from a seeded generator.

    `accept` adds a chart-specific admissibility test (for example staying
    away from a blow-up locus).
    """

    def ok(p: np.ndarray) -> bool:
        return box.admissible(p, tube) and (accept is None or accept(p))

    points: List[np.ndarray] = [p for p in halton_grid(box, grid, seed) if ok(p)]
    dropped = grid - len(points)

    rng = np.random.default_rng(seed)
    accepted: List[np.ndarray] = []
    for _ in range(MAX_DRAW_ROUNDS):
        if len(accepted) >= count:
            break
        draws = rng.uniform(box.lower, box.upper, size=(2 * max(count, 1), box.dimension))
        accepted.extend(p for p in draws if ok(p))
    if len(accepted) < count:
        raise ValueError(f"Could not place {count} admissible probes in {box!r}")
    if dropped:
        logger.debug("Dropped %d grid probes inside the singular tube of %s", dropped, box.name)
    points.extend(accepted[:count])
    return np.array(points).reshape(-1, box.dimension)
