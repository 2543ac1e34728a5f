from typing import Any, Dict

import numpy as np

from src.flows.generators import get_generator
from src.geometry.fields import AntisymmetricField
from src.geometry.tensors import max_jacobiator
from src.realization.algebroid import (
    AiAlgebroidChart,
    EBivector,
    check_nondegenerate,
    e_symplectic_to_poisson,
    poisson_to_e_form,
)
from src.realization.groupoid_poisson import assemble_groupoid_poisson, identity_bisection_bivector, pair_chart_poisson
from src.realization.multiplicativity import verify_multiplicativity_pushforwards
from src.utils.fixture_parser import (
    KIND_E_SYMPLECTIC,
    KIND_IDENTITY_BISECTION,
    KIND_PAIR_CHART,
    KIND_POISSON,
    parse_box,
    parse_matrix,
    require,
)
from src.verification import catalog
from src.verification.manager import SuiteContext, VerificationSuite
from src.verification.report import CheckResult

COEFFICIENT_TOL = 1e-12
ROUND_TRIP_TOL = 1e-10
FACTORIZATION_TOL = 1e-10
JACOBI_TOL = 1e-7
PUSHFORWARD_TOL = 1e-6
BISECTION_TOL = 1e-9
RANK_RCOND = 1e-9


class PoissonSuite(VerificationSuite):
    """Both directions between E-symplectic forms and Poisson structures, and the chart bivectors built from them."""

    @property
    def name(self) -> str:
        return "poisson"

    def run(self, context: SuiteContext) -> None:
        for fixture in context.fixtures(KIND_E_SYMPLECTIC):
            self._e_symplectic(context, fixture)
        for fixture in context.fixtures(KIND_POISSON):
            self._poisson(context, fixture)
        for fixture in context.fixtures(KIND_PAIR_CHART):
            self._pair_chart(context, fixture)
        for fixture in context.fixtures(KIND_IDENTITY_BISECTION):
            self._identity_bisection(context, fixture)

    def _e_symplectic(self, context: SuiteContext, fixture: Dict[str, Any]) -> None:
        name = fixture["name"]
        require(fixture, ["frame", "omega", "box"], name)
        algebroid = AiAlgebroidChart(catalog.get_frame(fixture["frame"]))
        omega = EBivector.constant(parse_matrix(fixture["omega"], f"{name}.omega"), algebroid.dimension, name="omega")
        box = parse_box(fixture["box"], name, fixture.get("singular"))
        probes = context.probes(box)
        pi = e_symplectic_to_poisson(algebroid, omega, name=f"pi[{name}]")

        context.check(
            f"{name}.nondegenerate",
            lambda: CheckResult(f"{name}.nondegenerate", 0.0, 1.0, details={"min_det": check_nondegenerate(omega, probes)}),
        )
        if "expected" in fixture:
            expected = catalog.get_bivector(fixture["expected"])
            context.worst(
                f"{name}.coefficients",
                probes,
                lambda p: float(np.max(np.abs(pi.matrix(p) - expected.matrix(p)))),
                COEFFICIENT_TOL,
                expected=expected.name,
            )
        context.check(f"{name}.jacobi", lambda: self._jacobi(context, f"{name}.jacobi", pi, probes))

    def _poisson(self, context: SuiteContext, fixture: Dict[str, Any]) -> None:
        name = fixture["name"]
        require(fixture, ["frame", "poisson", "box"], name)
        algebroid = AiAlgebroidChart(catalog.get_frame(fixture["frame"]))
        pi = catalog.get_bivector(fixture["poisson"])
        box = parse_box(fixture["box"], name, fixture.get("singular"))
        probes = context.probes(box)
        omega, factorization = poisson_to_e_form(pi, algebroid, probes, name=f"omega[{name}]")

        def factors() -> CheckResult:
            report = factorization.validate(probes)
            return CheckResult(
                f"{name}.factorization",
                max(report.residual, report.compatibility, report.antisymmetry),
                context.tolerance(FACTORIZATION_TOL),
                details={"checked": report.checked, "skipped": len(report.skipped)},
            )

        context.check(f"{name}.factorization", factors)
        if "expected_lambda" in fixture:
            expected_lambda = np.asarray(fixture["expected_lambda"], dtype=float)
            context.worst(
                f"{name}.lambda",
                probes,
                lambda p: float(np.max(np.abs(factorization.matrix(p) - expected_lambda))),
                COEFFICIENT_TOL,
            )
        if "expected_omega" in fixture:
            expected_omega = catalog.get_e_form(fixture["expected_omega"])
            context.worst(
                f"{name}.omega",
                probes,
                lambda p: float(np.max(np.abs(omega.matrix(p) - expected_omega(p)))),
                COEFFICIENT_TOL,
            )
        back = e_symplectic_to_poisson(algebroid, omega)
        context.worst(
            f"{name}.round_trip",
            probes,
            lambda p: float(np.max(np.abs(back.matrix(p) - pi.matrix(p)))),
            ROUND_TRIP_TOL,
        )

    def _pair_chart(self, context: SuiteContext, fixture: Dict[str, Any]) -> None:
        name = fixture["name"]
        require(fixture, ["frame", "coefficients", "arrow_box", "base_box"], name)
        frame = catalog.get_frame(fixture["frame"])
        coefficients = AntisymmetricField.constant(
            parse_matrix(fixture["coefficients"], f"{name}.coefficients"), name="W", dimension=frame.dimension
        )
        chart = pair_chart_poisson(
            frame,
            coefficients,
            parse_box(fixture["arrow_box"], f"{name}.arrows"),
            parse_box(fixture["base_box"], f"{name}.base", fixture.get("singular")),
            name=name,
        )
        probes = context.probes(chart.box)
        if "expected_base" in fixture:
            expected = catalog.get_bivector(fixture["expected_base"])
            base_probes = probes[:, frame.rank :]
            context.worst(
                f"{name}.base",
                base_probes,
                lambda u: float(np.max(np.abs(chart.base.matrix(u) - expected.matrix(u)))),
                COEFFICIENT_TOL,
            )

        def pushforward() -> CheckResult:
            tolerance = context.tolerance(PUSHFORWARD_TOL)
            report = verify_multiplicativity_pushforwards(
                chart.bivector, chart.source, chart.target, chart.base, probes, tolerance
            )
            return CheckResult(
                f"{name}.pushforward",
                report.max_defect,
                tolerance,
                witness=report.witness,
                details={"source": report.source_defect, "target": report.target_defect},
            )

        context.check(f"{name}.pushforward", pushforward)
        context.check(f"{name}.jacobi", lambda: self._jacobi(context, f"{name}.jacobi", chart.bivector, probes))

    def _identity_bisection(self, context: SuiteContext, fixture: Dict[str, Any]) -> None:
        name = fixture["name"]
        require(fixture, ["identity_bisection", "box"], name)
        section = fixture["identity_bisection"]
        f = get_generator(section["generator"], **section.get("params", {}))
        algebroid, pi = catalog.flow_algebroid(f)
        box = parse_box(fixture["box"], name, fixture.get("singular"))
        probes = context.probes(box)
        omega, factorization = poisson_to_e_form(pi, algebroid, probes, name=f"omega[{name}]")
        dual = factorization.dual_frame()
        groupoid = assemble_groupoid_poisson(f)
        k = algebroid.rank

        def gap(u) -> float:
            along = identity_bisection_bivector(dual, omega, u)
            assembled = groupoid.bivector.matrix([0.0, 0.0, u[0], u[1]])
            return float(np.max(np.abs(along - assembled)))

        context.worst(f"{name}.matches_assembly", probes, gap, BISECTION_TOL)

        def rank_gap(u) -> float:
            along = identity_bisection_bivector(dual, omega, u)
            s = np.linalg.svd(along, compute_uv=False)
            return abs(int(np.sum(s > RANK_RCOND * s[0])) - 2 * k)

        context.worst(f"{name}.rank", probes, rank_gap, 0.5, expected_rank=2 * k)

    def _jacobi(self, context: SuiteContext, check: str, pi, probes) -> CheckResult:
        worst, witness = max_jacobiator(pi, probes)
        return CheckResult(check, worst, context.tolerance(JACOBI_TOL), witness=witness)
