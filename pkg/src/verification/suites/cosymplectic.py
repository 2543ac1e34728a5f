from typing import Any, Dict

import numpy as np

from src.cosymplectic.structure import VOLUME_TOL, CosymplecticStructure
from src.cosymplectic.symplectization import PROJECTION_TOL, pair_chart_cosym_forms, symplectization_form
from src.geometry.errors import FibrationMismatchError
from src.geometry.tensors import max_jacobiator
from src.utils.fixture_parser import KIND_COSYMPLECTIC, parse_box, require
from src.verification import catalog
from src.verification.manager import SuiteContext, VerificationSuite
from src.verification.report import CheckResult, exceeds

CLOSED_TOL = 1e-9
REEB_TOL = 1e-10
JACOBI_TOL = 1e-9
KERNEL_TOL = 1e-10
PFAFFIAN_TOL = 1e-9


class CosymplecticSuite(VerificationSuite):
    """Reeb field, induced Poisson structure and the symplectization of a pair chart."""

    @property
    def name(self) -> str:
        return "cosymplectic"

    def run(self, context: SuiteContext) -> None:
        for fixture in context.fixtures(KIND_COSYMPLECTIC):
            if fixture.get("fibred", True):
                self._fixture(context, fixture)
            else:
                self._fibration_mismatch(context, fixture)

    def _fixture(self, context: SuiteContext, fixture: Dict[str, Any]) -> None:
        name = fixture["name"]
        require(fixture, ["cosymplectic", "box", "pair_box"], name)
        c = catalog.get_cosymplectic(fixture["cosymplectic"])
        box = parse_box(fixture["box"], name)
        probes = context.probes(box)

        context.check(
            f"{name}.volume",
            lambda: exceeds(
                f"{name}.volume", min(abs(c.volume_coefficient(p)) for p in probes), VOLUME_TOL
            ),
        )
        context.check(
            f"{name}.closed",
            lambda: CheckResult(f"{name}.closed", c.closedness(probes), context.tolerance(CLOSED_TOL)),
        )
        if "reeb" in fixture:
            expected = np.asarray(fixture["reeb"], dtype=float)
            context.worst(f"{name}.reeb", probes, lambda p: float(np.max(np.abs(c.reeb_field(p) - expected))), REEB_TOL)
        else:
            context.worst(f"{name}.reeb", probes, lambda p: _reeb_residual(c, p), REEB_TOL)

        field = c.induced_poisson_field()

        def jacobi() -> CheckResult:
            worst, witness = max_jacobiator(field, probes)
            return CheckResult(f"{name}.jacobi", worst, context.tolerance(JACOBI_TOL), witness=witness)

        context.check(f"{name}.jacobi", jacobi)
        context.worst(
            f"{name}.poisson_field",
            probes,
            lambda p: float(np.max(np.abs(field.matrix(p) - c.induced_poisson(p)))),
            KERNEL_TOL,
        )

        def kernel(p) -> float:
            rank, leak = c.kernel_check(p)
            return leak if rank == 2 * c.half_rank else np.inf

        context.worst(f"{name}.kernel", probes, kernel, KERNEL_TOL, expected_rank=2 * c.half_rank)
        self._symplectization(context, fixture, c, field)

    def _symplectization(self, context: SuiteContext, fixture: Dict[str, Any], c: CosymplecticStructure, field) -> None:
        name = fixture["name"]
        chart = catalog.cosymplectic_pair_chart(parse_box(fixture["pair_box"], f"{name}.pair"))
        arrow_probes = context.probes(chart.box)
        omega_hat, alpha_hat = pair_chart_cosym_forms(c, chart, arrow_probes)
        symplectization = symplectization_form(omega_hat, alpha_hat, chart)
        # the extra fibre coordinate p sits in front
        fibre = np.linspace(-1.0, 1.0, len(arrow_probes)).reshape(-1, 1)
        probes = np.hstack([fibre, arrow_probes])

        context.check(
            f"{name}.symplectization_closed",
            lambda: CheckResult(
                f"{name}.symplectization_closed", symplectization.closedness(probes), context.tolerance(CLOSED_TOL)
            ),
        )
        context.worst(
            f"{name}.symplectization_pfaffian",
            probes,
            lambda p: abs(abs(symplectization.pfaffian(p)) - 1.0),
            PFAFFIAN_TOL,
        )
        context.check(
            f"{name}.projections",
            lambda: CheckResult(
                f"{name}.projections",
                symplectization.projection_defect(field, probes),
                context.tolerance(PROJECTION_TOL),
            ),
        )

    def _fibration_mismatch(self, context: SuiteContext, fixture: Dict[str, Any]) -> None:
        name = fixture["name"]
        require(fixture, ["cosymplectic", "pair_box"], name)
        c = catalog.get_cosymplectic(fixture["cosymplectic"])
        chart = catalog.cosymplectic_pair_chart(parse_box(fixture["pair_box"], f"{name}.pair"))
        probes = context.probes(chart.box)

        def rejected() -> CheckResult:
            try:
                pair_chart_cosym_forms(c, chart, probes)
            except FibrationMismatchError as e:
                return CheckResult(f"{name}.fibration_rejected", 0.0, 1.0, details={"error": str(e)})
            return CheckResult(f"{name}.fibration_rejected", np.inf, 1.0, details={"error": "accepted"})

        context.check(f"{name}.fibration_rejected", rejected)


def _reeb_residual(c: CosymplecticStructure, p) -> float:
    """|iota_K omega| + |alpha(K) - 1|."""
    k = c.reeb_field(p)
    return float(np.max(np.abs(c.omega.matrix(p).T @ k))) + abs(float(c.alpha.at(p) @ k) - 1.0)
