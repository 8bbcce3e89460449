"""
Central registry of the command-line subcommands.
Every controller router is included here and installed on the parser.
"""

import logging

from src.backend.controllers import CommandParser, CommandRouter
from src.backend.controllers.decide_controller import router as decide_router
from src.backend.controllers.group_controller import router as group_router
from src.backend.controllers.symbol_controller import router as symbol_router
from src.backend.controllers.verify_controller import router as verify_router

logger = logging.getLogger(__name__)

main_router = CommandRouter()
main_router.include_router(decide_router)
main_router.include_router(group_router)
main_router.include_router(symbol_router)
main_router.include_router(verify_router)


def build_parser() -> CommandParser:
    parser = CommandParser(
        prog="qmrational",
        description="Rationality of fixed fields of two-dimensional quasi-monomial actions",
    )
    parser.add_argument("--bound", type=int, default=None, help="Search bound for the cubic norm search")
    parser.add_argument("--seed", type=int, default=None, help="Seed for randomized search orders")
    parser.add_argument("--json-only", action="store_true", help="Print only the JSON report")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    main_router.install(parser)
    logger.debug(f"Subcommands: {[c.name for c in main_router.commands]}")
    return parser
