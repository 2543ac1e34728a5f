import logging
import math
from typing import Any, Dict

import numpy as np
import pandas as pd

from src.flows.closed_forms import bm_chart_margin
from src.flows.generators import GeneratorFunction, get_generator, monomial
from src.flows.scalar import EXP_MEAN, SEAM, G_direct, G_series, alpha_direct, alpha_of, alpha_series, solve_F
from src.geometry.errors import ConfigError
from src.geometry.probes import ChartBox
from src.geometry.tensors import max_jacobiator, pfaffian4
from src.realization.groupoid_poisson import (
    METHOD_CLOSED_FORM,
    METHOD_ODE,
    GroupoidPoissonChart,
    assemble_groupoid_poisson,
)
from src.realization.multiplicativity import verify_multiplicativity_pushforwards
from src.utils.fixture_parser import KIND_GENERATOR, parse_box, parse_matrix, require
from src.verification import catalog
from src.verification.manager import SuiteContext, VerificationSuite
from src.verification.report import CheckResult, exceeds

logger = logging.getLogger(__name__)

ORACLE_TOL = 1e-9
COEFFICIENT_TOL = 1e-12
COEFFICIENT_ODE_TOL = 1e-8
JACOBI_TOL = 1e-7
PUSHFORWARD_TOL = 1e-6
PFAFFIAN_TOL = 1e-9
SEAM_TOL = 1e-9
SIGN_FLIP_THRESHOLD = 1e-3
CHART_MARGIN = 0.05
ORACLE_NODES = 33
COEFFICIENT_NODES = 11


def _seam_points(f: GeneratorFunction, box: ChartBox):
    """(a, x) in the annulus SEAM/2 <= |a| <= 2 SEAM, away from the zeros of f."""
    lo, hi = box.bounds[2]
    xs = [x for x in np.linspace(lo, hi, 9) if abs(float(f(x))) > 1e-3]
    scales = (0.5, 0.9, 1.1, 2.0)
    return [(sign * s * SEAM, x) for x in xs for s in scales for sign in (-1.0, 1.0)]


def _seam_defect(f: GeneratorFunction, a: float, x: float) -> float:
    mean_arg = a * f.derivative(x)
    return max(
        abs(G_series(f, a, x) - G_direct(f, a, x)),
        abs(alpha_series(f, a, x) - alpha_direct(f, a, x)),
        abs(EXP_MEAN.series_branch(a) - EXP_MEAN.direct_branch(a)),
        abs(EXP_MEAN(mean_arg) - math.expm1(mean_arg) / mean_arg) if mean_arg else 0.0,
        abs(alpha_of(f, 0.0, x) - 1.0),
    )


def _zero_points(f: GeneratorFunction, box: ChartBox) -> np.ndarray:
    """(a, b, x0, y) on the declared zeros of f inside the box."""
    (a_lo, a_hi), (b_lo, b_hi), (x_lo, x_hi), (y_lo, y_hi) = box.bounds[:4]
    zeros = [z for z in f.zeros if x_lo <= z <= x_hi]
    points = []
    for z in zeros:
        for a in np.linspace(a_lo, a_hi, 7):
            points.append([a, 0.5 * (b_lo + b_hi) + 0.3 * (b_hi - b_lo), z, 0.5 * (y_lo + y_hi)])
    return np.array(points).reshape(-1, 4)


class BmSuite(VerificationSuite):
    """Flow groupoids of f dx ^ dy: coefficients, Jacobi, pushforwards, Pfaffian and seams."""

    @property
    def name(self) -> str:
        return "bm"

    def run(self, context: SuiteContext) -> None:
        self._oracle_grid(context)
        self._coefficient_table(context)
        for fixture in context.fixtures(KIND_GENERATOR):
            self._fixture(context, fixture)

    def _oracle_grid(self, context: SuiteContext) -> None:
        f = monomial(1)
        grid = [(a, x) for a in np.linspace(-2.0, 2.0, ORACLE_NODES) for x in np.linspace(-2.0, 2.0, ORACLE_NODES)]
        context.worst(
            "bm.b_case_oracle",
            grid,
            lambda p: abs(solve_F(f, p[0], p[1]) - p[1] * math.exp(p[0])),
            ORACLE_TOL,
            nodes=len(grid),
        )

    def _coefficient_table(self, context: SuiteContext) -> None:
        m = context.config.m
        f = monomial(m)
        closed = assemble_groupoid_poisson(f, method=METHOD_CLOSED_FORM)
        ode = assemble_groupoid_poisson(f, method=METHOD_ODE)
        nodes = np.linspace(-1.0, 1.0, COEFFICIENT_NODES)
        points = [
            np.array([a, b, x, 0.0])
            for a in nodes
            for x in nodes
            for b in (-0.5, 0.7)
            if bm_chart_margin(m, a, x) > CHART_MARGIN
        ]
        keys = [("ay", (0, 3)), ("bx", (1, 2)), ("by", (1, 3)), ("xy", (2, 3))]
        rows = []
        for z in points:
            c, o = closed.bivector.matrix(z), ode.bivector.matrix(z)
            row = {"a": z[0], "b": z[1], "x": z[2]}
            row.update({f"pi_{label}": c[idx] for label, idx in keys})
            row.update({f"ode_pi_{label}": o[idx] for label, idx in keys})
            rows.append(row)
        table = pd.DataFrame(rows, columns=["a", "b", "x"] + [f"{p}pi_{l}" for p in ("", "ode_") for l, _ in keys])
        context.report.add_table(f"coefficients_m{m}", table)

        try:
            oracle = catalog.bm_oracle(m)
        except ConfigError:
            oracle = None

        def reference(z):
            if oracle is not None:
                return np.array(oracle(z[0], z[1], z[2]))
            c = closed.bivector.matrix(z)
            return np.array([c[idx] for _, idx in keys])

        def pick(chart: GroupoidPoissonChart, z):
            matrix = chart.bivector.matrix(z)
            return np.array([matrix[idx] for _, idx in keys])

        source = "closed form of f = x^2" if oracle is not None else "closed-form assembly"
        if oracle is not None:
            context.worst(
                f"bm.m{m}.coefficients_closed",
                points,
                lambda z: float(np.max(np.abs(pick(closed, z) - reference(z)))),
                COEFFICIENT_TOL,
                reference=source,
            )
        context.worst(
            f"bm.m{m}.coefficients_ode",
            points,
            lambda z: float(np.max(np.abs(pick(ode, z) - reference(z)))),
            COEFFICIENT_ODE_TOL,
            reference=source,
        )

    def _fixture(self, context: SuiteContext, fixture: Dict[str, Any]) -> None:
        name = fixture["name"]
        require(fixture, ["generator", "box"], name)
        f = get_generator(fixture["generator"], **fixture.get("params", {}))
        method = fixture.get("method", METHOD_CLOSED_FORM if f.degree is not None else METHOD_ODE)
        box = parse_box(fixture["box"], name, fixture.get("singular"))
        if box.dimension != 4 + f.parameters:
            raise ConfigError(f"Fixture '{name}' needs a box on (a, b, x, y{', v' if f.parameters else ''})")
        chart = assemble_groupoid_poisson(f, box=box, method=method, name=name)
        probes = context.probes(box, accept=chart.admissible)

        context.check(f"{name}.jacobi", lambda: self._jacobi(context, f"{name}.jacobi", chart, probes))
        if "pi0" in fixture:
            pi0 = parse_matrix(fixture["pi0"], f"{name}.pi0")
            # the block coordinates sit after (a, b, x, y), so singular indices below 4 carry over
            bounds = box.bounds[:4] + [(-1.0, 1.0)] * (2 * pi0.shape[0]) + box.bounds[4:]
            wide_box = parse_box(bounds, f"{name}+pi0", fixture.get("singular"))
            wide = assemble_groupoid_poisson(f, pi0, box=wide_box, method=method, name=f"{name}+pi0")
            wide_probes = context.probes(wide_box, accept=wide.admissible)
            context.check(f"{name}.jacobi_pi0", lambda: self._jacobi(context, f"{name}.jacobi_pi0", wide, wide_probes))
            context.check(
                f"{name}.pushforward_pi0", lambda: self._pushforward(context, f"{name}.pushforward_pi0", wide, wide_probes)
            )
        context.check(f"{name}.pushforward", lambda: self._pushforward(context, f"{name}.pushforward", chart, probes))

        if f.parameters == 0:
            context.check(
                f"{name}.zero_set",
                lambda: CheckResult(
                    f"{name}.zero_set",
                    0.0 if f.check_zero_set(*box.bounds[2]) else 1.0,
                    0.5,
                    details={"zeros": f.zero_description},
                ),
            )
            points = np.vstack([probes, _zero_points(f, box)])
            context.worst(
                f"{name}.pfaffian",
                points,
                lambda z: abs(pfaffian4(chart.bivector.matrix(z)[:4, :4]) - alpha_of(f, z[0], z[2])),
                PFAFFIAN_TOL,
            )
            context.check(
                f"{name}.pfaffian_positive",
                lambda: exceeds(
                    f"{name}.pfaffian_positive",
                    min(pfaffian4(chart.bivector.matrix(z)[:4, :4]) for z in points),
                    1e-12,
                ),
            )
            context.worst(f"{name}.seams", _seam_points(f, box), lambda p: _seam_defect(f, p[0], p[1]), SEAM_TOL)

        flipped = assemble_groupoid_poisson(f, box=box, method=method, sign=-1.0, name=f"{name}.flipped")
        context.check(
            f"{name}.sign_flip_rejected",
            lambda: exceeds(
                f"{name}.sign_flip_rejected",
                verify_multiplicativity_pushforwards(
                    flipped.bivector, flipped.source, flipped.target, flipped.base, probes
                ).max_defect,
                SIGN_FLIP_THRESHOLD,
                details={"candidate": "alpha d_b^d_x with the opposite sign"},
            ),
        )

    def _jacobi(self, context: SuiteContext, check: str, chart: GroupoidPoissonChart, probes) -> CheckResult:
        worst, witness = max_jacobiator(chart.bivector, probes)
        return CheckResult(check, worst, context.tolerance(JACOBI_TOL), witness=witness, details={"probes": len(probes)})

    def _pushforward(self, context: SuiteContext, check: str, chart: GroupoidPoissonChart, probes) -> CheckResult:
        tolerance = context.tolerance(PUSHFORWARD_TOL)
        result = verify_multiplicativity_pushforwards(
            chart.bivector, chart.source, chart.target, chart.base, probes, tolerance
        )
        return CheckResult(
            check,
            result.max_defect,
            tolerance,
            witness=result.witness,
            details={"source": result.source_defect, "target": result.target_defect, "probes": result.probes},
        )
