import json
import logging
import math
import os
import tempfile
import time
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.geometry.errors import ConfigError, GeometryError

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"
EXCEEDS_TOL = 1e-12


def _plain(value: Any) -> Any:
    """JSON-safe copy: numpy scalars and arrays become Python values, non-finite floats strings."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    return value


class CheckResult:
    """One verification entry; passed iff max_defect < tolerance."""

    def __init__(
        self,
        check: str,
        max_defect: float,
        tolerance: float,
        witness: Optional[Sequence[float]] = None,
        wall_time: float = 0.0,
        details: Optional[Dict[str, Any]] = None,
    ):
        self.check = check
        self.max_defect = float(max_defect)
        self.tolerance = float(tolerance)
        self.witness = None if witness is None else [float(v) for v in np.asarray(witness).reshape(-1)]
        self.wall_time = wall_time
        self.details = details or {}

    @property
    def passed(self) -> bool:
        return math.isfinite(self.max_defect) and self.max_defect < self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        """Report entry; wall time stays out so reports are reproducible."""
        return _plain(
            {
                "check": self.check,
                "max_defect": self.max_defect,
                "tolerance": self.tolerance,
                "passed": self.passed,
                "witness": self.witness,
                "details": self.details,
            }
        )

    def __repr__(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"CheckResult({self.check}: {self.max_defect:.3g} / {self.tolerance:.3g} {status})"


def exceeds(check: str, observed: float, threshold: float, witness=None, details=None) -> CheckResult:
    """
    A check that passes when `observed` exceeds `threshold`. The defect is the
    relative shortfall, so negative controls and lower bounds read like every
    other entry.
    """
    if threshold <= 0.0:
        raise ValueError(f"Threshold must be positive, got {threshold}")
    observed = float(observed)
    defect = math.inf if math.isnan(observed) else max(0.0, threshold - observed) / threshold
    info = {"observed": observed, "threshold": threshold}
    info.update(details or {})
    return CheckResult(check, defect, EXCEEDS_TOL, witness=witness, details=info)


class VerificationReport:
    def __init__(self, suite: str, seed: int, probes: int, tol_scale: float = 1.0):
        self.suite = suite
        self.seed = seed
        self.probes = probes
        self.tol_scale = tol_scale
        self.entries: List[CheckResult] = []
        self.tables: Dict[str, pd.DataFrame] = {}

    def add(self, entry: CheckResult) -> CheckResult:
        self.entries.append(entry)
        level = logging.INFO if entry.passed else logging.WARNING
        logger.log(level, "%r", entry)
        return entry

    def timed(self, check: str, fn: Callable[[], CheckResult]) -> CheckResult:
        """
        Run fn, stamp its wall time and add it. A GeometryError or ValueError
        fails the check; a ConfigError propagates.
        """
        start = time.perf_counter()
        try:
            entry = fn()
        except ConfigError:
            raise
        except (GeometryError, ValueError) as e:
            entry = CheckResult(check, math.inf, 1.0, details={"error": f"{type(e).__name__}: {e}"})
        entry.wall_time = time.perf_counter() - start
        return self.add(entry)

    def add_table(self, name: str, frame: pd.DataFrame) -> None:
        if name in self.tables:
            raise ValueError(f"Duplicate table: {name}")
        self.tables[name] = frame

    def merge(self, other: "VerificationReport") -> None:
        self.entries.extend(other.entries)
        for name, frame in other.tables.items():
            self.add_table(name, frame)

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    @property
    def failing(self) -> List[str]:
        return [entry.check for entry in self.entries if not entry.passed]

    def to_dict(self) -> Dict[str, Any]:
        return _plain(
            {
                "suite": self.suite,
                "seed": self.seed,
                "probes": self.probes,
                "tol_scale": self.tol_scale,
                "passed": self.passed,
                "checks": [entry.to_dict() for entry in self.entries],
            }
        )

    def timings(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"check": [e.check for e in self.entries], "wall_time": [e.wall_time for e in self.entries]}
        )

    def __repr__(self) -> str:
        return f"VerificationReport({self.suite}, {len(self.entries)} checks, failing={len(self.failing)})"


def _atomic_write(path: str, write: Callable[[Any], None]) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            write(f)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def write_csv(frame: pd.DataFrame, path: str) -> str:
    _atomic_write(path, lambda f: frame.to_csv(f, index=False, float_format=CSV_FLOAT_FORMAT, na_rep="nan"))
    return path


class ReportWriter:
    def __init__(self, out_dir: str):
        self.out_dir = out_dir

    def write(self, report: VerificationReport) -> List[str]:
        """report.json, one CSV per table and timings.csv, each written atomically."""
        try:
            os.makedirs(self.out_dir, exist_ok=True)
            paths = [os.path.join(self.out_dir, "report.json")]
            payload = json.dumps(report.to_dict(), indent=2, sort_keys=True)
            _atomic_write(paths[0], lambda f: f.write(payload + "\n"))
            for name in sorted(report.tables):
                paths.append(write_csv(report.tables[name], os.path.join(self.out_dir, f"{name}.csv")))
            paths.append(write_csv(report.timings(), os.path.join(self.out_dir, "timings.csv")))
        except OSError as e:
            raise RuntimeError(f"Failed to write report to '{self.out_dir}': {e}")
        for path in paths:
            logger.info("Wrote %s", path)
        return paths
