import argparse
import os
from typing import List, Optional, Sequence, Tuple

from src.geometry.errors import ConfigError

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", ".."))

SUITES = ("poisson", "groupoid", "bm", "desing", "cosymplectic", "eform")
SUITE_ALL = "all"
QUANTITIES = ("alpha", "pi", "g_eps")
COMMANDS = ("verify", "surface")

MIN_PROBES = 8
DEFAULT_SEED = 0
DEFAULT_PROBES = 64
DEFAULT_GRID = 33
DEFAULT_EPS = (0.4, 0.2, 0.1, 0.05)
DEFAULT_BOUNDS = (-1.0, 1.0, -1.0, 1.0)

ENV_SEED = "GROUPOID_CHARTS_SEED"
ENV_PROBES = "GROUPOID_CHARTS_PROBES"
ENV_OUT = "GROUPOID_CHARTS_OUT"
ENV_FIXTURES = "GROUPOID_CHARTS_FIXTURES"
ENV_LOG_LEVEL = "GROUPOID_CHARTS_LOG_LEVEL"


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got '{raw}'")


def parse_float_list(raw: str, flag: str) -> List[float]:
    try:
        return [float(item) for item in raw.split(",") if item.strip()]
    except ValueError:
        raise ConfigError(f"{flag} expects comma-separated numbers, got '{raw}'")


class RunConfig:
    """Everything one CLI invocation needs; validated on construction."""

    def __init__(
        self,
        command: str = "verify",
        suite: str = SUITE_ALL,
        fixture: Optional[str] = None,
        m: int = 2,
        k: int = 1,
        eps: Sequence[float] = DEFAULT_EPS,
        seed: int = DEFAULT_SEED,
        probes: int = DEFAULT_PROBES,
        out: str = "out",
        tol_scale: float = 1.0,
        grid: int = DEFAULT_GRID,
        quantity: str = "alpha",
        bounds: Sequence[float] = DEFAULT_BOUNDS,
        fixtures_dir: Optional[str] = None,
    ):
        self.command = command
        self.suite = suite
        self.fixture = fixture
        self.m = m
        self.k = k
        self.eps = [float(e) for e in eps]
        self.seed = seed
        self.probes = probes
        self.out = out
        self.tol_scale = tol_scale
        self.grid = grid
        self.quantity = quantity
        self.bounds = tuple(float(b) for b in bounds)
        self.fixtures_dir = fixtures_dir or os.path.join(PROJECT_ROOT, "fixtures")
        self.validate()

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command: {self.command}")
        if self.suite != SUITE_ALL and self.suite not in SUITES:
            raise ConfigError(f"Unknown suite: {self.suite} (choose from {', '.join(SUITES + (SUITE_ALL,))})")
        if self.quantity not in QUANTITIES:
            raise ConfigError(f"Unknown quantity: {self.quantity} (choose from {', '.join(QUANTITIES)})")
        if self.probes < MIN_PROBES:
            raise ConfigError(f"Probe count must be at least {MIN_PROBES}, got {self.probes}")
        if not self.tol_scale > 0.0:
            raise ConfigError(f"Tolerance scale must be positive, got {self.tol_scale}")
        if self.m < 1:
            raise ConfigError(f"--m must be at least 1, got {self.m}")
        if self.k < 1:
            raise ConfigError(f"--k must be at least 1, got {self.k}")
        if self.grid < 0:
            raise ConfigError(f"--grid must be nonnegative, got {self.grid}")
        if len(self.eps) < 2:
            raise ConfigError("--eps needs at least two values")
        if any(not 0.0 < e < 1.0 for e in self.eps):
            raise ConfigError(f"--eps values must lie in (0, 1), got {self.eps}")
        if any(b >= a for a, b in zip(self.eps, self.eps[1:])):
            raise ConfigError(f"--eps must be strictly decreasing, got {self.eps}")
        if len(self.bounds) != 4 or self.bounds[0] >= self.bounds[1] or self.bounds[2] >= self.bounds[3]:
            raise ConfigError(f"--bounds expects a_lo,a_hi,x_lo,x_hi with lo < hi, got {list(self.bounds)}")

    @property
    def a_range(self) -> Tuple[float, float]:
        return self.bounds[0], self.bounds[1]

    @property
    def x_range(self) -> Tuple[float, float]:
        return self.bounds[2], self.bounds[3]

    @property
    def suites(self) -> List[str]:
        return list(SUITES) if self.suite == SUITE_ALL else [self.suite]

    def tolerance(self, value: float) -> float:
        return value * self.tol_scale

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        """Flags override the environment, which overrides the defaults."""
        return cls(
            command=args.command,
            suite=getattr(args, "suite", SUITE_ALL),
            fixture=args.fixture,
            m=args.m,
            k=args.k,
            eps=parse_float_list(args.eps, "--eps") if args.eps else DEFAULT_EPS,
            seed=args.seed if args.seed is not None else _env_int(ENV_SEED, DEFAULT_SEED),
            probes=args.probes if args.probes is not None else _env_int(ENV_PROBES, DEFAULT_PROBES),
            out=args.out or os.environ.get(ENV_OUT) or "out",
            tol_scale=args.tol_scale,
            grid=getattr(args, "grid", DEFAULT_GRID),
            quantity=getattr(args, "quantity", "alpha"),
            bounds=parse_float_list(args.bounds, "--bounds") if getattr(args, "bounds", None) else DEFAULT_BOUNDS,
            fixtures_dir=os.environ.get(ENV_FIXTURES) or None,
        )

    def __repr__(self) -> str:
        return (
            f"RunConfig({self.command}, suite={self.suite}, fixture={self.fixture}, seed={self.seed}, "
            f"probes={self.probes}, tol_scale={self.tol_scale:g})"
        )
