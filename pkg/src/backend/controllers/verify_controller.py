"""
Symbolic verification of the registered change-of-variables chains.
"""

import argparse
import logging
from typing import Dict

from src.backend.controllers import CommandOutcome, CommandRouter
from src.models.case_chains import case_chain, list_cases, verify_all
from src.utils.env_setup import Settings
from src.utils.error_handling import EXIT_NOT_RATIONAL, UsageError

logger = logging.getLogger(__name__)

router = CommandRouter(tags=["Verification"])


def parse_assignments(items) -> Dict[str, str]:
    """name=value pairs from the command line."""
    params = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name.strip() or not value.strip():
            raise UsageError(f"Expected name=value, got '{item}'")
        params[name.strip()] = value.strip()
    return params


def _verify_case_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("tag", help="Case tag, see list-cases")
    parser.add_argument("--param", action="append", metavar="NAME=VALUE",
                        help="Specialize a free parameter of the chain (repeatable)")
    parser.add_argument("--strict", action="store_true", help="Stop at the first failing identity")


@router.command("verify-case", "Verify every identity of one change-of-variables chain", _verify_case_arguments)
def verify_case_command(args: argparse.Namespace, settings: Settings) -> CommandOutcome:
    params = parse_assignments(args.param)
    chain = case_chain(args.tag, params or None, strict=args.strict)
    status = "PASS" if chain.passed else "FAIL"
    return CommandOutcome(
        result=chain.to_dict(),
        exit_code=0 if chain.passed else EXIT_NOT_RATIONAL,
        summary=f"{status} {chain.tag}: {chain.identity_count - len(chain.failures)}/{chain.identity_count} identities",
        inputs={"tag": args.tag, "params": params},
    )


def _verify_all_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--group", default=None, help="Only chains of this group label")


@router.command("verify-all", "Verify every registered change-of-variables chain", _verify_all_arguments)
def verify_all_command(args: argparse.Namespace, settings: Settings) -> CommandOutcome:
    tags = list_cases(args.group)
    if not tags:
        raise UsageError(f"No case chains registered for group '{args.group}'")
    chains = verify_all(tags)
    identities = sum(c.identity_count for c in chains)
    failed_identities = sum(len(c.failures) for c in chains)
    failed = [c.tag for c in chains if not c.passed]
    result = {
        "cases": [{"tag": c.tag, "passed": c.passed, "identity_count": c.identity_count} for c in chains],
        "case_count": len(chains),
        "identity_count": identities,
        "passed_identities": identities - failed_identities,
        "failed_cases": failed,
    }
    summary = f"PASS {identities - failed_identities}/{identities} identities in {len(chains)} cases"
    if failed:
        summary += f"; failing: {', '.join(failed)}"
    return CommandOutcome(
        result=result,
        exit_code=EXIT_NOT_RATIONAL if failed else 0,
        summary=summary,
        inputs={"group": args.group},
    )


@router.command("list-cases", "List registered case tags")
def list_cases_command(args: argparse.Namespace, settings: Settings) -> CommandOutcome:
    tags = list_cases()
    return CommandOutcome(result=tags, summary="\n".join(tags))
