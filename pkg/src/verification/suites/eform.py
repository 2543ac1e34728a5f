from typing import Any, Dict

import numpy as np

from src.eforms.darboux import SplitForm, canonical_form, closedness_commutativity_check, symplectic_gram_schmidt
from src.eforms.forms import EForm, exterior_derivative
from src.eforms.structure import fit_structure_functions
from src.geometry import jetmath
from src.geometry.fields import ScalarField
from src.utils.fixture_parser import KIND_EFORM, parse_box, require
from src.verification import catalog
from src.verification.manager import SuiteContext, VerificationSuite
from src.verification.report import CheckResult

STRUCTURE_TOL = 1e-7
DD_TOL = 1e-7
CANONICAL_TOL = 1e-10


def _sample_function(dimension: int) -> ScalarField:
    def fn(*u):
        return jetmath.sin(u[0]) * jetmath.exp(0.5 * u[-1]) + u[0] * u[-1] * u[-1]

    return ScalarField(dimension, fn, name="phi")


class EFormSuite(VerificationSuite):
    """Algebroid differential, closed split forms against commuting dual frames, and symplectic Gram-Schmidt."""

    @property
    def name(self) -> str:
        return "eform"

    def run(self, context: SuiteContext) -> None:
        for fixture in context.fixtures(KIND_EFORM):
            self._fixture(context, fixture)

    def _fixture(self, context: SuiteContext, fixture: Dict[str, Any]) -> None:
        name = fixture["name"]
        require(fixture, ["eforms", "box"], name)
        section = fixture["eforms"]
        require(section, ["frame"], f"{name}.eforms")
        frame = catalog.get_frame(section["frame"])
        box = parse_box(fixture["box"], name, fixture.get("singular"))
        probes = context.probes(box)
        structure = fit_structure_functions(frame, probes)

        context.check(
            f"{name}.structure",
            lambda: CheckResult(
                f"{name}.structure",
                structure.residual if structure.checked else np.inf,
                context.tolerance(STRUCTURE_TOL),
                details={"checked": structure.checked, "skipped": len(structure.skipped)},
            ),
        )

        phi = EForm.function(_sample_function(frame.dimension), frame.rank)
        if frame.rank >= 2:
            dd0 = exterior_derivative(exterior_derivative(phi, frame, structure), frame, structure)
            context.worst(f"{name}.dd_function", probes, dd0.norm_at, DD_TOL)
        if frame.rank >= 3:
            psi = _sample_function(frame.dimension)
            theta = EForm.dual(0, frame.rank, frame.dimension).scaled(psi) + EForm.dual(1, frame.rank, frame.dimension)
            dd1 = exterior_derivative(exterior_derivative(theta, frame, structure), frame, structure)
            context.worst(f"{name}.dd_one_form", probes, dd1.norm_at, DD_TOL)

        if "expected" in section:
            expected = tuple(bool(v) for v in section["expected"])
            split = SplitForm.from_duals(frame.rank, frame.dimension, name=f"split[{frame.name}]")

            def darboux() -> CheckResult:
                closed, commutes = closedness_commutativity_check(frame, split, probes, structure)
                return CheckResult(
                    f"{name}.darboux",
                    0.0 if (closed, commutes) == expected else 1.0,
                    0.5,
                    details={"closed": closed, "commutes": commutes, "expected": list(expected)},
                )

            context.check(f"{name}.darboux", darboux)

        if frame.rank % 2 == 0:
            rng = np.random.default_rng(context.config.seed)
            a = rng.uniform(-1.0, 1.0, (frame.rank, frame.rank))
            w = a - a.T + 2.0 * canonical_form(frame.rank)

            def gram_schmidt() -> CheckResult:
                b = symplectic_gram_schmidt(w)
                return CheckResult(
                    f"{name}.gram_schmidt",
                    float(np.max(np.abs(b.T @ w @ b - canonical_form(frame.rank)))),
                    context.tolerance(CANONICAL_TOL),
                )

            context.check(f"{name}.gram_schmidt", gram_schmidt)
