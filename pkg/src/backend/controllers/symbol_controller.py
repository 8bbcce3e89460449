"""
Norm-residue symbol and conic subcommands.
"""

import argparse
import logging
import re

from pydantic import ValidationError

from src.backend.controllers import CommandOutcome, CommandRouter
from src.models.schemas import BaseField, SymbolQuery
from src.utils.env_setup import Settings
from src.utils.error_handling import InvalidInstance, UsageError
from src.utils.expression_parser import parse_rational
from src.utils.symbol_service import conic_point, describe_places, evaluate, hilbert_Q, ramified_places

logger = logging.getLogger(__name__)

router = CommandRouter(tags=["Symbols"])

_QUADRATIC = re.compile(r"^(?:Q\()?sqrt\((?P<m>[^()]+)\)\)?$")


def parse_base(text: str) -> BaseField:
    """
    Read a base field: "Q", "Q(omega)" or "Q(sqrt(m))" (also "sqrt(m)").

    Raises:
        UsageError: anything else
    """
    compact = text.replace(" ", "")
    if compact in ("Q", "QQ"):
        return BaseField.rationals()
    if compact in ("Q(omega)", "omega", "Q(w)"):
        return BaseField.q_omega()
    match = _QUADRATIC.match(compact)
    if match:
        m = parse_rational(match.group("m"))
        if m == 0:
            raise UsageError("Q(sqrt(0)) is not a field")
        return BaseField.quad(m)
    raise UsageError(f"Unknown base field '{text}'; expected Q, Q(omega) or Q(sqrt(m))")


def _symbol_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("a")
    parser.add_argument("b")
    parser.add_argument("--deg", type=int, choices=(2, 3), default=2, help="2 for Hilbert, 3 for the cubic symbol")
    parser.add_argument("--base", default=None, help="Q, Q(omega) or Q(sqrt(m)); cubic symbols default to Q(omega)")
    parser.add_argument("--ext", default=None, metavar="M", help="Evaluate over Q(sqrt(M)); same as --base 'Q(sqrt(M))'")
    parser.add_argument("--bound", dest="symbol_bound", type=int, default=None, metavar="N",
                        help="Norm search box for this query, overriding the global --bound")


def symbol_base(args: argparse.Namespace) -> BaseField:
    """
    Pick the base field from --ext / --base, defaulting to Q(omega) for cubic symbols.

    Raises:
        UsageError: both options given, or an unreadable field
    """
    if args.ext is not None and args.base is not None:
        raise UsageError("Give either --ext or --base, not both")
    if args.ext is not None:
        m = parse_rational(args.ext)
        if m == 0:
            raise UsageError("Q(sqrt(0)) is not a field")
        return BaseField.quad(m)
    if args.base is not None:
        return parse_base(args.base)
    return BaseField.q_omega() if args.deg == 3 else BaseField.rationals()


@router.command("symbol", "Evaluate the norm-residue symbol (a, b) of degree 2 or 3", _symbol_arguments)
def symbol_command(args: argparse.Namespace, settings: Settings) -> CommandOutcome:
    base = symbol_base(args)
    search_bound = settings.search_bound if args.symbol_bound is None else args.symbol_bound
    if search_bound < 0:
        raise UsageError("--bound must be non-negative")
    try:
        query = SymbolQuery(degree=args.deg, a=args.a, b=args.b, base=base)
    except ValidationError as e:
        raise InvalidInstance.from_validation(e, "symbol arguments")
    result = evaluate(query, search_bound=search_bound, seed=settings.seed)
    summary = f"{query.describe()} = {result.value.value}"
    if result.reason:
        summary += f" ({result.reason})"
    return CommandOutcome(
        result=result.model_dump(mode="json"),
        summary=summary,
        inputs={"a": args.a, "b": args.b, "degree": args.deg, "base": str(base),
                "search_bound": search_bound},
    )


def _conic_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("a")
    parser.add_argument("b")
    parser.add_argument("--box", type=int, default=None,
                        help="Search a box of this side instead of the Holzer bound (a miss then proves nothing)")


@router.command("conic", "Find a rational point on X^2 - a Y^2 - b Z^2 = 0", _conic_arguments)
def conic_command(args: argparse.Namespace, settings: Settings) -> CommandOutcome:
    a, b = parse_rational(args.a), parse_rational(args.b)
    if a == 0 or b == 0:
        raise InvalidInstance("a and b must be nonzero", field_errors={"a" if a == 0 else "b": "must be nonzero"})
    point = conic_point(a, b, honor_holzer=args.box is None, bound=args.box, seed=settings.seed)
    places = ramified_places(a, b)
    result = {
        "point": point.as_list() if point else None,
        "hilbert_symbol": hilbert_Q(a, b).value,
        "ramified_places": [str(p) for p in places],
    }
    if point:
        summary = f"point {point.as_list()}"
    elif places:
        summary = f"no rational point; ramified at {describe_places(places)}"
    else:
        summary = f"no point found in a box of side {args.box}"
    return CommandOutcome(result=result, summary=summary, inputs={"a": args.a, "b": args.b, "box": args.box})
