"""
Text front end for exact expressions.

Expressions use integer/rational literals, symbol names, + - * / ^ (or **)
and parentheses. They are read with sympy's parser into a sympy expression
and then folded into whatever value type the caller supplies (rational
functions over a radical tower, plain rationals, ...).
"""

import re
import logging
from typing import Callable, Iterable, Optional, TypeVar

from sympy import Expr, Float, Integer, Rational, Symbol, nan, oo, zoo
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from src.utils.error_handling import ParseError, ZeroDenominator

logger = logging.getLogger(__name__)

T = TypeVar("T")

_TRANSFORMATIONS = standard_transformations + (convert_xor,)
_GLOBALS = {"Integer": Integer, "Rational": Rational, "Float": Float, "Symbol": Symbol}
_POSITION = re.compile(r"line (\d+), column (\d+)")


def parse_to_expr(text: str, names: Iterable[str] = ()) -> Expr:
    """
    Parse expression text into a sympy expression.

    Args:
        text: Expression source
        names: Symbol names the caller knows about

    Returns:
        The evaluated sympy expression

    Raises:
        ParseError: on syntax errors, with the reported column when available
        ZeroDenominator: when the text divides by a literal zero
    """
    if not isinstance(text, str) or not text.strip():
        raise ParseError("Empty expression", source=str(text))
    local_dict = {name: Symbol(name) for name in names}
    try:
        expr = parse_expr(text, local_dict=local_dict, global_dict=dict(_GLOBALS),
                          transformations=_TRANSFORMATIONS, evaluate=True)
    except SyntaxError as exc:
        raise ParseError(f"Syntax error in expression: {exc.msg}", line=exc.lineno or 1,
                         column=exc.offset, source=text) from exc
    except (TypeError, ValueError, NameError, AttributeError, ZeroDivisionError) as exc:
        raise ParseError(f"Could not parse expression: {exc}", line=1, source=text) from exc

    if not isinstance(expr, Expr):
        raise ParseError(f"Expression evaluates to {type(expr).__name__}, not a number or function", source=text)
    if expr.has(zoo, nan, oo, -oo):
        raise ZeroDenominator("Expression divides by zero", expression=text)
    return expr


def fold_expr(
    expr: Expr,
    symbol: Callable[[str], T],
    constant: Callable[[Rational], T],
    source: Optional[str] = None
) -> T:
    """
    Fold a sympy expression into a caller-defined value type.

    Args:
        expr: Parsed expression
        symbol: Resolves a symbol name to a value (raises UnknownSymbol)
        constant: Lifts an exact rational to a value

    Returns:
        The folded value; supports +, * and integer powers only
    """
    if isinstance(expr, Float):
        raise ParseError("Floating point literals are not exact; use a fraction", source=source)
    if expr.is_Rational:
        return constant(Rational(expr))
    if expr.is_Symbol:
        return symbol(expr.name)
    if expr.is_Add:
        terms = [fold_expr(arg, symbol, constant, source) for arg in expr.args]
        total = terms[0]
        for term in terms[1:]:
            total = total + term
        return total
    if expr.is_Mul:
        factors = [fold_expr(arg, symbol, constant, source) for arg in expr.args]
        product = factors[0]
        for factor in factors[1:]:
            product = product * factor
        return product
    if expr.is_Pow:
        base, exponent = expr.args
        if not exponent.is_Integer:
            raise ParseError(f"Only integer exponents are supported, got {exponent}", source=source)
        return fold_expr(base, symbol, constant, source) ** int(exponent)
    raise ParseError(f"Unsupported construct {type(expr).__name__} in expression", source=source)


def parse_rational(text) -> Rational:
    """
    Parse an exact rational from an int, a sympy Rational or text such as "-3/5".
    """
    if isinstance(text, bool):
        raise ParseError(f"Expected a rational number, got {text!r}")
    if isinstance(text, int):
        return Rational(text)
    if isinstance(text, Rational):
        return text
    if isinstance(text, float):
        raise ParseError(f"Floating point value {text!r} is not exact; use a fraction string")
    expr = parse_to_expr(str(text))
    if not expr.is_Rational:
        raise ParseError(f"Expected a rational number, got '{text}'", source=str(text))
    return Rational(expr)


def position_from_message(message: str) -> tuple:
    """Extract (line, column) from a TOML decoder message, or (None, None)."""
    match = _POSITION.search(message)
    if not match:
        return None, None
    return int(match.group(1)), int(match.group(2))
