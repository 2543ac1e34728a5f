import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Add src to path if running directly
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.geometry.errors import ConfigError
from src.verification.config import ENV_LOG_LEVEL, QUANTITIES, SUITE_ALL, SUITES, RunConfig
from src.verification.manager import SuiteManager
from src.verification.report import ReportWriter
from src.verification.surface import write_surface

logger = logging.getLogger("groupoid_charts")

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


class _Parser(argparse.ArgumentParser):
    """Usage errors become ConfigError so they share exit code 2."""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="groupoid-charts", description="Chart-level checks of Poisson groupoid constructions")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--m", type=int, default=2, help="exponent of f = x^m")
        sub.add_argument("--k", type=int, default=1, help="order of the desingularized family")
        sub.add_argument("--eps", default=None, help="comma-separated, strictly decreasing eps values")
        sub.add_argument("--seed", type=int, default=None)
        sub.add_argument("--probes", type=int, default=None)
        sub.add_argument("--out", default=None, help="output directory")
        sub.add_argument("--tol-scale", dest="tol_scale", type=float, default=1.0)
        sub.add_argument("--fixture", default=None, help="run a single fixture by name")

    verify = commands.add_parser("verify", help="run verification suites")
    verify.add_argument("--suite", default=SUITE_ALL, choices=list(SUITES) + [SUITE_ALL])
    common(verify)

    surface = commands.add_parser("surface", help="write a CSV grid")
    surface.add_argument("--quantity", default="alpha", choices=list(QUANTITIES))
    surface.add_argument("--grid", type=int, default=33)
    surface.add_argument("--bounds", default=None, help="a_lo,a_hi,x_lo,x_hi")
    common(surface)
    return parser


def configure_logging() -> None:
    level = os.environ.get(ENV_LOG_LEVEL, "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def run_verify(config: RunConfig) -> int:
    report = SuiteManager.get_instance().run(config)
    ReportWriter(config.out).write(report)
    if not report.passed:
        logger.error("%d failing checks: %s", len(report.failing), ", ".join(report.failing))
        return EXIT_FAIL
    logger.info("All %d checks passed", len(report.entries))
    return EXIT_PASS


def run_surface(config: RunConfig) -> int:
    write_surface(config)
    return EXIT_PASS


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
        config = RunConfig.from_args(args)
        logger.info("%r", config)
        if config.command == "surface":
            return run_surface(config)
        return run_verify(config)
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
