import logging
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from src.geometry.probes import ChartBox, probe_points
from src.verification.config import RunConfig
from src.verification.report import CheckResult, VerificationReport
from src.verification.repository import FixtureRepository

logger = logging.getLogger(__name__)


class SuiteContext:
    """What a suite sees of the run: config, fixtures, seeded probes and the report."""

    def __init__(self, config: RunConfig, repository: FixtureRepository, report: VerificationReport):
        self.config = config
        self.repository = repository
        self.report = report

    def tolerance(self, value: float) -> float:
        return self.config.tolerance(value)

    def fixtures(self, kind: str) -> List[Dict[str, Any]]:
        """Fixtures of one kind; with --fixture only that one, if it has the kind."""
        if self.config.fixture is not None:
            data = self.repository.load(self.config.fixture)
            return [data] if data["kind"] == kind else []
        return self.repository.load_kind(kind)

    def probes(
        self,
        box: ChartBox,
        count: Optional[int] = None,
        accept: Optional[Callable[[np.ndarray], bool]] = None,
        grid: int = 0,
    ) -> np.ndarray:
        return probe_points(
            box, seed=self.config.seed, count=count or self.config.probes, grid=grid, accept=accept
        )

    def check(self, name: str, fn: Callable[[], CheckResult]) -> CheckResult:
        return self.report.timed(name, fn)

    def worst(
        self, name: str, points: Sequence, defect: Callable[[np.ndarray], float], tolerance: float, **details
    ) -> CheckResult:
        """Largest defect over points, with the point where it occurs."""

        def run() -> CheckResult:
            worst, witness = 0.0, None
            for p in points:
                point = np.asarray(p, dtype=float)
                value = float(defect(point))
                if witness is None or value > worst or np.isnan(value):
                    worst, witness = value, point
            return CheckResult(name, worst, self.tolerance(tolerance), witness=witness, details=details)

        return self.check(name, run)


class VerificationSuite(ABC):
    @property
    @abstractmethod
    def name(self) -> str:
        pass

    @abstractmethod
    def run(self, context: SuiteContext) -> None:
        pass


def _registry() -> Dict[str, Callable[[], VerificationSuite]]:
    from src.verification.suites.bm import BmSuite
    from src.verification.suites.cosymplectic import CosymplecticSuite
    from src.verification.suites.desing import DesingSuite
    from src.verification.suites.eform import EFormSuite
    from src.verification.suites.groupoid import GroupoidSuite
    from src.verification.suites.poisson import PoissonSuite

    return {
        "poisson": PoissonSuite,
        "groupoid": GroupoidSuite,
        "bm": BmSuite,
        "desing": DesingSuite,
        "cosymplectic": CosymplecticSuite,
        "eform": EFormSuite,
    }


class SuiteManager:
    _instance = None

    def __init__(self):
        self._cache: Dict[str, VerificationSuite] = {}

    @classmethod
    def get_instance(cls):
        if cls._instance is None:
            cls._instance = cls()
        return cls._instance

    def get_suite(self, name: str) -> VerificationSuite:
        if name in self._cache:
            return self._cache[name]

        suites = _registry()
        if name not in suites:
            raise ValueError(f"Unknown suite: {name}")
        suite = suites[name]()

        self._cache[name] = suite
        return suite

    def run(self, config: RunConfig) -> VerificationReport:
        """Runs every selected suite in order into one report."""
        repository = FixtureRepository(config.fixtures_dir)
        report = VerificationReport(config.suite, config.seed, config.probes, config.tol_scale)
        context = SuiteContext(config, repository, report)
        for name in config.suites:
            suite = self.get_suite(name)
            logger.info("Running suite %s", name)
            before = len(report.entries)
            suite.run(context)
            failing = [e.check for e in report.entries[before:] if not e.passed]
            logger.info("Suite %s: %d checks, %d failing", name, len(report.entries) - before, len(failing))
        return report
