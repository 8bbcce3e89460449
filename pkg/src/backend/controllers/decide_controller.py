"""
Decision subcommands: decide an instance file (or a batch of them) and the
one-dimensional criterion.

An instance file is TOML:

    group = "C4"
    H = "sigma^2"
    [params]
    a = 2
    c = "1"

A batch file holds the same tables under [[instance]].
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict, List

from pydantic import ValidationError

from src.backend.controllers import CommandOutcome, CommandRouter
from src.models.schemas import Instance, Verdict
from src.utils.decision_service import decide, decide_batch, decide_dim1
from src.utils.env_setup import Settings
from src.utils.error_handling import EXIT_INVALID, InvalidInstance, ParseError, RationalityError, UsageError
from src.utils.expression_parser import position_from_message

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

logger = logging.getLogger(__name__)

router = CommandRouter(tags=["Decision"])


def read_toml(path: str) -> Dict[str, Any]:
    """
    Read a TOML document.

    Raises:
        UsageError: the file cannot be read
        ParseError: the file is not valid TOML, with line and column
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"Cannot read '{path}': {e.strerror or e}")
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        line, column = position_from_message(str(e))
        raise ParseError(f"Invalid TOML in {path}: {e}", line=line, column=column, source=path)


def instance_from_table(table: Dict[str, Any], source: str = "<instance>") -> Instance:
    """Validate one instance table."""
    try:
        return Instance.model_validate(table)
    except ValidationError as e:
        raise InvalidInstance.from_validation(e, source)


def load_instances(path: str, batch: bool = False) -> List[Instance]:
    """
    Load a single instance, or every [[instance]] table when batch is set.
    """
    document = read_toml(path)
    if not batch:
        if "instance" in document:
            raise UsageError(f"{path} holds [[instance]] tables; use decide --batch")
        return [instance_from_table(document, path)]
    tables = document.get("instance")
    if not isinstance(tables, list) or not tables:
        raise UsageError(f"{path} has no [[instance]] tables")
    return [instance_from_table(t, f"{path}[instance {i}]") for i, t in enumerate(tables)]


def _summary(verdict: Verdict) -> str:
    line = f"{verdict.status.value}: {verdict.clause}"
    if verdict.obstructions:
        line += " (obstruction " + ", ".join(s.describe() for s in verdict.obstructions) + ")"
    if verdict.pending:
        line += " (pending " + ", ".join(s.describe() for s in verdict.pending) + ")"
    return line


def _decide_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("file", help="TOML instance file")
    parser.add_argument("--batch", action="store_true", help="File holds [[instance]] tables; decide them in parallel")


@router.command("decide", "Decide k-rationality of K(x,y)^G for an instance file", _decide_arguments)
def decide_command(args: argparse.Namespace, settings: Settings) -> CommandOutcome:
    instances = load_instances(args.file, batch=args.batch)
    if not args.batch:
        verdict = decide(instances[0], settings)
        return CommandOutcome(
            result=verdict.model_dump(mode="json"),
            exit_code=verdict.exit_code,
            summary=_summary(verdict),
            inputs={"file": args.file, "instance": instances[0].model_dump(mode="json")},
        )

    results, codes, lines = [], [], []
    for instance, outcome in zip(instances, decide_batch(instances, settings)):
        if isinstance(outcome, RationalityError):
            results.append(outcome.to_dict())
            codes.append(outcome.exit_code)
            lines.append(f"{instance.group.value} H={instance.H}: error {outcome.message}")
        else:
            results.append(outcome.model_dump(mode="json"))
            codes.append(outcome.exit_code)
            lines.append(f"{instance.group.value} H={instance.H}: {_summary(outcome)}")
    # an invalid instance outranks the verdict codes
    exit_code = EXIT_INVALID if EXIT_INVALID in codes else max(codes)
    logger.info(f"Batch of {len(instances)} instances finished with exit code {exit_code}")
    return CommandOutcome(
        result=results,
        exit_code=exit_code,
        summary="\n".join(lines),
        inputs={"file": args.file, "count": len(instances)},
    )


def _dim1_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("a", help="Radicand of K = k(sqrt a)")
    parser.add_argument("b", help="Coefficient of x -> b/x")


@router.command("dim1", "Decide rationality of K(x)^G for x -> b/x, sqrt(a) -> -sqrt(a)", _dim1_arguments)
def dim1_command(args: argparse.Namespace, settings: Settings) -> CommandOutcome:
    verdict = decide_dim1(args.a, args.b, settings)
    return CommandOutcome(
        result=verdict.model_dump(mode="json"),
        exit_code=verdict.exit_code,
        summary=_summary(verdict),
        inputs={"a": args.a, "b": args.b},
    )
