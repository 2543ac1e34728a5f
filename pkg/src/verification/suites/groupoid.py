from typing import Any, Dict

from src.groupoid.chart import ChartGroupoid, composable_triples, pair_map_separation, verify_axioms
from src.groupoid.frame import verify_commutative_frame
from src.utils.fixture_parser import KIND_FRAME, parse_box, require
from src.verification import catalog
from src.verification.manager import SuiteContext, VerificationSuite
from src.verification.report import CheckResult, exceeds

AXIOM_TOL = 1e-7
NON_COMMUTING_THRESHOLD = 1e-3
SEPARATION_THRESHOLD = 0.1
TRIPLES_PER_PROBE = 4


class GroupoidSuite(VerificationSuite):
    """Local groupoid axioms for the shipped frames, with the non-commuting frame as negative control."""

    @property
    def name(self) -> str:
        return "groupoid"

    def run(self, context: SuiteContext) -> None:
        for fixture in context.fixtures(KIND_FRAME):
            self._fixture(context, fixture)

    def _fixture(self, context: SuiteContext, fixture: Dict[str, Any]) -> None:
        name = fixture["name"]
        require(fixture, ["frame", "arrow_box", "base_box", "commutes"], name)
        frame = catalog.get_frame(fixture["frame"])
        groupoid = ChartGroupoid(
            frame,
            parse_box(fixture["arrow_box"], f"{name}.arrows"),
            parse_box(fixture["base_box"], f"{name}.base"),
            name=name,
        )
        count = max(2, context.config.probes // TRIPLES_PER_PROBE)
        triples = composable_triples(groupoid, seed=context.config.seed, count=count)
        commutes = bool(fixture["commutes"])

        if commutes:

            def axioms() -> CheckResult:
                report = verify_axioms(groupoid, triples, tolerance=context.tolerance(AXIOM_TOL))
                worst = max(report.defects, key=report.defects.get)
                witness = report.witnesses[worst][0].as_point() if worst in report.witnesses else None
                return CheckResult(
                    f"{name}.axioms",
                    report.max_defect if report.frame_commutes else max(report.max_defect, report.bracket_norm),
                    report.tolerance,
                    witness=witness,
                    details={"defects": report.defects, "bracket_norm": report.bracket_norm, "triples": report.triples},
                )

            context.check(f"{name}.axioms", axioms)
        else:

            def rejected() -> CheckResult:
                report = verify_axioms(groupoid, triples)
                _, bracket = verify_commutative_frame(frame, [h.u for h, _, _ in triples])
                return exceeds(
                    f"{name}.target_of_composition_rejected",
                    report.defects["target"],
                    NON_COMMUTING_THRESHOLD,
                    witness=report.witnesses["target"][0].as_point(),
                    details={"bracket_norm": bracket},
                )

            context.check(f"{name}.target_of_composition_rejected", rejected)

        if fixture.get("separation"):

            def separation() -> CheckResult:
                arrows = [arrow for triple in triples for arrow in triple]
                _, ratio = pair_map_separation(groupoid, arrows)
                return exceeds(f"{name}.pair_map_separation", ratio, SEPARATION_THRESHOLD)

            context.check(f"{name}.pair_map_separation", separation)
