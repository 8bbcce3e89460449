"""
Command controllers for the qmrational command line.
Each controller module owns a CommandRouter with one group of subcommands;
src.backend.routes collects them into the top-level parser.
"""

import argparse
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

from src.utils.env_setup import Settings
from src.utils.error_handling import UsageError

logger = logging.getLogger(__name__)


@dataclass
class CommandOutcome:
    """What a subcommand hands back to the front end."""
    result: Any
    exit_code: int = 0
    summary: str = ""
    inputs: Dict[str, Any] = field(default_factory=dict)


Handler = Callable[[argparse.Namespace, Settings], CommandOutcome]


@dataclass
class Command:
    name: str
    help: str
    handler: Handler
    arguments: Optional[Callable[[argparse.ArgumentParser], None]] = None


class CommandParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


class CommandRouter:
    """
    Registry of subcommands, used like a web router: controllers decorate
    handlers, the routes module includes every controller router.
    """

    def __init__(self, tags: Optional[List[str]] = None):
        self.tags = tags or []
        self.commands: List[Command] = []

    def command(self, name: str, help: str, arguments: Optional[Callable[[argparse.ArgumentParser], None]] = None):
        def decorator(handler: Handler) -> Handler:
            self.commands.append(Command(name, help, handler, arguments))
            return handler
        return decorator

    def include_router(self, other: "CommandRouter") -> None:
        known = {c.name for c in self.commands}
        for command in other.commands:
            if command.name in known:
                raise ValueError(f"Subcommand '{command.name}' registered twice")
            self.commands.append(command)

    def install(self, parser: argparse.ArgumentParser) -> None:
        subparsers = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
        for command in self.commands:
            sub = subparsers.add_parser(command.name, help=command.help, description=command.help)
            if command.arguments:
                command.arguments(sub)
            sub.set_defaults(handler=command.handler)
