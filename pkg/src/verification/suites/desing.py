from typing import Any, Dict

import numpy as np

from src.desingularization.convergence import ORDER_TOLERANCE, convergence_report
from src.desingularization.family import DesingFamily
from src.desingularization.groupoid import (
    block_pfaffian,
    desing_alpha,
    desing_groupoid_chart,
    flow_residual,
    in_range,
    seam_jump,
)
from src.flows.scalar import alpha_of
from src.realization.multiplicativity import verify_multiplicativity_pushforwards
from src.utils.fixture_parser import KIND_DESING, parse_box, require
from src.verification.manager import SuiteContext, VerificationSuite
from src.verification.report import CheckResult, exceeds

G_ZERO_TOL = 1e-10
ALPHA_TOL = 1e-7
PUSHFORWARD_TOL = 1e-6
PFAFFIAN_TOL = 1e-9
FLOW_TOL = 1e-8
SEAM_TOL = 1e-7
SEAM_MIN_X = 0.3
SUPPORT_SAMPLES = 401
EXACT_ZERO = np.finfo(float).tiny


class DesingSuite(VerificationSuite):
    """The x^{2k} + g_eps family: profile of g_eps, convergence orders and its flow groupoids."""

    @property
    def name(self) -> str:
        return "desing"

    def run(self, context: SuiteContext) -> None:
        k = context.config.k
        for eps in context.config.eps:
            self._profile(context, DesingFamily(k, eps))
        self._convergence(context)
        for fixture in context.fixtures(KIND_DESING):
            self._fixture(context, fixture)

    def _profile(self, context: SuiteContext, family: DesingFamily) -> None:
        label = f"desing.k{family.k}.eps{family.eps:g}"
        w = family.width
        outside = np.concatenate([np.linspace(w, 3.0 * w, SUPPORT_SAMPLES), -np.linspace(w, 3.0 * w, SUPPORT_SAMPLES)])
        context.worst(f"{label}.support", outside, lambda x: abs(family.g_eps(float(x))), EXACT_ZERO)

        expected = family.eps ** (4 * family.k) / family.h.h_prime(0.0)
        context.check(
            f"{label}.g_at_zero",
            lambda: CheckResult(
                f"{label}.g_at_zero",
                abs(family.g_eps(0.0) - expected) / expected,
                context.tolerance(G_ZERO_TOL),
                details={"g0": family.g_eps(0.0), "expected": expected},
            ),
        )
        inside = np.linspace(-w, w, SUPPORT_SAMPLES)
        context.worst(f"{label}.nonnegative", inside, lambda x: max(0.0, -family.g_eps(float(x))), EXACT_ZERO)

    def _convergence(self, context: SuiteContext) -> None:
        k, eps = context.config.k, context.config.eps

        def run() -> CheckResult:
            report = convergence_report(k, eps)
            context.report.add_table("desing_convergence", report.to_frame())
            context.report.add_table("desing_orders", report.orders_frame())
            defects = report.order_defects()
            worst = int(np.argmax(defects))
            return CheckResult(
                f"desing.k{k}.orders",
                float(defects[worst]) if report.decreasing() else np.inf,
                context.tolerance(ORDER_TOLERANCE),
                details={
                    "observed": report.observed_orders.tolist(),
                    "expected": report.expected_orders.tolist(),
                    "worst_derivative": worst,
                    "decreasing": report.decreasing(),
                },
            )

        context.check(f"desing.k{k}.orders", run)

    def _fixture(self, context: SuiteContext, fixture: Dict[str, Any]) -> None:
        name = fixture["name"]
        require(fixture, ["desing", "box"], name)
        section = fixture["desing"]
        require(section, ["k", "eps"], f"{name}.desing")
        box = parse_box(fixture["box"], name, fixture.get("singular"))
        for eps in section["eps"]:
            family = DesingFamily(int(section["k"]), float(eps))
            self._groupoid(context, f"{name}.eps{family.eps:g}", family, box)

    def _groupoid(self, context: SuiteContext, label: str, family: DesingFamily, box) -> None:
        chart = desing_groupoid_chart(family, box=box)
        f = family.generator()
        probes = context.probes(box, accept=chart.admissible)
        # (a, x) pairs on the former singular line and near it
        axis = np.array(
            [[a, 0.3, x, 0.1] for a in np.linspace(*box.bounds[0], 5) for x in (0.0, 0.5 * family.width, -family.width)]
        )
        axis = np.array([z for z in axis if in_range(family, z[0], z[2])]).reshape(-1, 4)
        points = np.vstack([probes, axis])

        context.worst(
            f"{label}.alpha",
            points,
            lambda z: abs(desing_alpha(family, z[0], z[2]) - alpha_of(f, z[0], z[2])),
            ALPHA_TOL,
        )

        def pushforward() -> CheckResult:
            tolerance = context.tolerance(PUSHFORWARD_TOL)
            report = verify_multiplicativity_pushforwards(
                chart.bivector, chart.source, chart.target, chart.base, probes, tolerance
            )
            return CheckResult(
                f"{label}.pushforward",
                report.max_defect,
                tolerance,
                witness=report.witness,
                details={"source": report.source_defect, "target": report.target_defect},
            )

        context.check(f"{label}.pushforward", pushforward)
        context.worst(
            f"{label}.pfaffian",
            points,
            lambda z: abs(block_pfaffian(chart, z) - desing_alpha(family, z[0], z[2])),
            PFAFFIAN_TOL,
        )
        context.check(
            f"{label}.pfaffian_positive",
            lambda: exceeds(f"{label}.pfaffian_positive", min(block_pfaffian(chart, z) for z in points), 1e-12),
        )
        context.worst(f"{label}.flow", points, lambda z: flow_residual(family, z[0], z[2]), FLOW_TOL)
        xs = [x for x in np.linspace(*box.bounds[2], 9) if abs(x) >= SEAM_MIN_X]
        context.worst(f"{label}.seams", xs, lambda x: seam_jump(family, float(x)), SEAM_TOL)
