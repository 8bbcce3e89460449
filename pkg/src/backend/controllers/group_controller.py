"""
Classification of finite subgroups of GL2(Z) given by generators.
"""

import argparse
import logging
import re
from typing import List

from src.backend.controllers import CommandOutcome, CommandRouter
from src.models.glz import NORMAL_SUBGROUP_TABLE, IntMatrix2, classify, close_group, parse_word
from src.utils.env_setup import Settings
from src.utils.error_handling import ParseError

logger = logging.getLogger(__name__)

router = CommandRouter(tags=["Groups"])

_ENTRIES = re.compile(r"^\[?\s*-?\d+(\s*,\s*-?\d+){3}\s*\]?$")


def parse_generator(text: str) -> IntMatrix2:
    """
    A generator is either a word ("sigma", "-I", "tau*sigma") or the four
    entries a11,a12,a21,a22.
    """
    if _ENTRIES.match(text.strip()):
        entries = [int(e) for e in text.strip(" []").split(",")]
        try:
            return IntMatrix2.from_entries(entries)
        except ValueError as e:
            raise ParseError(str(e), source=text)
    return parse_word(text)


def _classify_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("generators", nargs="+", help="Words or a11,a12,a21,a22 entries")


@router.command("classify", "Identify the GL2(Z)-conjugacy class of a finite group", _classify_arguments)
def classify_command(args: argparse.Namespace, settings: Settings) -> CommandOutcome:
    gens: List[IntMatrix2] = [parse_generator(g) for g in args.generators]
    group = close_group(gens)
    label, conjugator = classify(group, bound=settings.conjugator_bound)
    result = {
        "label": label.value,
        "order": group.order,
        "conjugator": conjugator.to_list(),
        "elements": [g.to_list() for g in group.elements],
        "normal_subgroups": list(NORMAL_SUBGROUP_TABLE[label]),
    }
    logger.info(f"Classified {args.generators} as {label.value}")
    return CommandOutcome(
        result=result,
        summary=f"{label.value} (order {group.order}), P = {conjugator.to_list()}",
        inputs={"generators": args.generators},
    )
