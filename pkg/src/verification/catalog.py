"""
Named structures that fixtures refer to: anchor frames, bivectors with known
coefficients, cosymplectic charts and the coefficient oracle for f = x^2.

Fixtures are JSON and cannot carry functions, so they name an entry here.
"""

from typing import Callable, Dict, List, Tuple

import numpy as np

from src.cosymplectic.structure import CosymplecticStructure
from src.cosymplectic.symplectization import PairChart
from src.flows.generators import GeneratorFunction
from src.geometry import jetmath
from src.geometry.errors import ConfigError
from src.geometry.fields import BivectorField, CovectorField, SmoothMap, TwoFormField, VectorField
from src.geometry.probes import ChartBox
from src.groupoid.frame import AnchoredFrame
from src.realization.algebroid import AiAlgebroidChart


def _frame(name: str, dimension: int, columns: List[Callable]) -> AnchoredFrame:
    fields = [VectorField.from_function(dimension, fn, name=f"{name}.X{i}") for i, fn in enumerate(columns)]
    return AnchoredFrame(fields, name=name)


FRAMES: Dict[str, Callable[[], AnchoredFrame]] = {
    "translations": lambda: _frame("translations", 2, [lambda x, y: [1.0, 0.0], lambda x, y: [0.0, 1.0]]),
    "b": lambda: _frame("b", 2, [lambda x, y: [x, 0.0], lambda x, y: [0.0, 1.0]]),
    "zero_tangent": lambda: _frame("zero_tangent", 2, [lambda x, y: [x, 0.0], lambda x, y: [0.0, x]]),
    "scaling_r4": lambda: _frame(
        "scaling_r4", 4, [lambda x, y, z, w: [x, 0.0, 0.0, w], lambda x, y, z, w: [0.0, y, z, 0.0]]
    ),
    "heisenberg": lambda: _frame(
        "heisenberg",
        3,
        [lambda x, y, z: [1.0, 0.0, 0.0], lambda x, y, z: [0.0, 1.0, x], lambda x, y, z: [0.0, 0.0, 1.0]],
    ),
    "constant_r4": lambda: _frame(
        "constant_r4", 4, [lambda *u, i=i: [1.0 if l == i else 0.0 for l in range(4)] for i in range(4)]
    ),
}

BIVECTORS: Dict[str, Callable[[], BivectorField]] = {
    "x_dx_dy": lambda: BivectorField(2, lambda x, y: {(0, 1): x}, name="x dx^dy"),
    "scaling_r4": lambda: BivectorField(
        4,
        lambda x, y, z, w: {(0, 1): -x * y, (0, 2): -x * z, (1, 3): y * w, (2, 3): z * w},
        name="-xy dx^dy - xz dx^dz + yw dy^dw + zw dz^dw",
    ),
}

# W(p) of expected E-2-forms, k x k
E_FORMS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "x_alpha_beta": lambda p: np.array([[0.0, p[0]], [-p[0], 0.0]]),
}


def get_frame(name: str) -> AnchoredFrame:
    if name not in FRAMES:
        raise ConfigError(f"Unknown frame: {name}")
    return FRAMES[name]()


def get_bivector(name: str) -> BivectorField:
    if name not in BIVECTORS:
        raise ConfigError(f"Unknown bivector: {name}")
    return BIVECTORS[name]()


def get_e_form(name: str) -> Callable[[np.ndarray], np.ndarray]:
    if name not in E_FORMS:
        raise ConfigError(f"Unknown E-form: {name}")
    return E_FORMS[name]


def flow_algebroid(f: GeneratorFunction) -> Tuple[AiAlgebroidChart, BivectorField]:
    """
    Anchor (f d_x, -f d_y) for pi = f d_x ^ d_y on (x, y). Away from f = 0 it
    factors pi-sharp with dual frame rho(alpha_1) = -d_y, rho(alpha_2) = -d_x.
    """
    frame = _frame(f"rho[{f.name}]", 2, [lambda x, y: [f(x), 0.0], lambda x, y: [0.0, -f(x)]])
    pi = BivectorField(2, lambda x, y: {(0, 1): f(x)}, name=f"{f.name} dx^dy")
    return AiAlgebroidChart(frame), pi


def bm_oracle(m: int) -> Callable[[float, float, float], Tuple[float, float, float, float]]:
    """(pi^ay, pi^bx, pi^by, pi^xy) in closed form; only f = x^2 has one here."""
    if m != 2:
        raise ConfigError(f"No coefficient oracle for m = {m}")
    return lambda a, b, x: (1.0, 1.0 - a * x, b * x, -x * x)


def _mapping_torus() -> CosymplecticStructure:
    """(q, z, w): omega = dz ^ dw, alpha = dq."""
    omega = TwoFormField(3, lambda q, z, w: {(1, 2): 1.0}, name="dz^dw")
    alpha = CovectorField.from_function(3, lambda q, z, w: [1.0, 0.0, 0.0], name="dq")
    return CosymplecticStructure(omega, alpha, name="mapping_torus")


def _twisted() -> CosymplecticStructure:
    """(q, z, w): omega = dz ^ dw + d(w sin z) ^ dq, alpha = dq."""

    def entries(q, z, w):
        return {(0, 1): -w * jetmath.cos(z), (0, 2): -jetmath.sin(z), (1, 2): 1.0}

    omega = TwoFormField(3, entries, name="dz^dw + d(w sin z)^dq")
    alpha = CovectorField.from_function(3, lambda q, z, w: [1.0, 0.0, 0.0], name="dq")
    return CosymplecticStructure(omega, alpha, name="twisted")


def _slanted() -> CosymplecticStructure:
    """omega = dq ^ dw, alpha = dz: not fibred over the q-slices of the pair chart."""
    omega = TwoFormField(3, lambda q, z, w: {(0, 2): 1.0}, name="dq^dw")
    alpha = CovectorField.from_function(3, lambda q, z, w: [0.0, 1.0, 0.0], name="dz")
    return CosymplecticStructure(omega, alpha, name="slanted")


COSYMPLECTIC: Dict[str, Callable[[], CosymplecticStructure]] = {
    "mapping_torus": _mapping_torus,
    "twisted": _twisted,
    "slanted": _slanted,
}


def get_cosymplectic(name: str) -> CosymplecticStructure:
    if name not in COSYMPLECTIC:
        raise ConfigError(f"Unknown cosymplectic structure: {name}")
    return COSYMPLECTIC[name]()


def cosymplectic_pair_chart(box: ChartBox) -> PairChart:
    """
    Arrows (q, z', w', z, w) between points on one q-slice: source (q, z, w),
    target (q, z', w').
    """
    if box.dimension != 5:
        raise ConfigError(f"The pair chart has 5 coordinates, the box has {box.dimension}")
    source = SmoothMap(5, 3, lambda q, z1, w1, z, w: [q, z, w], name="s")
    target = SmoothMap(5, 3, lambda q, z1, w1, z, w: [q, z1, w1], name="t")
    return PairChart(source, target, box, name="pair[q]")
