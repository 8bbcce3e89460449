"""
Command-line front end: parse argv, run the subcommand, build the JSON
report and map exceptions to exit codes.
"""

import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence

from pydantic import ValidationError

from src import __version__
from src.backend.routes import build_parser
from src.models.schemas import Report
from src.utils.enhanced_cache import cache_manager
from src.utils.env_setup import Settings, load_settings
from src.utils.error_handling import InvalidInstance, RationalityError, UsageError, log_exception

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    exit_code: int
    report: Optional[Report]
    summary: str = ""


def _settings(args) -> Settings:
    try:
        return load_settings(search_bound=args.bound, seed=args.seed, log_level=args.log_level)
    except ValidationError as e:
        raise UsageError(f"Invalid setting: {InvalidInstance.from_validation(e).field_errors}")


def run(argv: Optional[Sequence[str]] = None) -> RunResult:
    """
    Run one subcommand.

    Args:
        argv: Arguments without the program name

    Returns:
        Exit code, the report (None when the command failed before
        producing a result) and a one-line human summary
    """
    started = time.perf_counter()
    subcommand = None
    try:
        parser = build_parser()
        args = parser.parse_args(list(argv) if argv is not None else None)
        subcommand = args.subcommand
        if subcommand is None:
            raise UsageError("No subcommand given; run with --help for the list")
        settings = _settings(args)
        logging.getLogger().setLevel(settings.log_level)
        cache_manager.configure(settings.cache_size)

        outcome = args.handler(args, settings)
        report = Report(
            subcommand=subcommand,
            inputs={"seed": settings.seed, "search_bound": settings.search_bound, **outcome.inputs},
            result=outcome.result,
            timing=round(time.perf_counter() - started, 6),
            version=__version__,
        )
        logger.info(f"{subcommand} finished with exit code {outcome.exit_code}")
        logger.debug(f"Cache statistics: {cache_manager.get_all_stats()}")
        return RunResult(outcome.exit_code, report, outcome.summary)

    except RationalityError as e:
        log_exception(e)
        report = Report(
            subcommand=subcommand or "",
            result=e.to_dict(),
            timing=round(time.perf_counter() - started, 6),
            version=__version__,
        )
        return RunResult(e.exit_code, report, f"error: {e.message}")


def render(result: RunResult, json_only: bool = False, include_timing: bool = True) -> List[str]:
    """stdout text and stderr text for a finished run."""
    stdout = result.report.to_json(include_timing=include_timing) if result.report else ""
    stderr = "" if json_only else result.summary
    return [stdout, stderr]
