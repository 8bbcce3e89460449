"""
Centralized error handling for the quasi-monomial rationality toolkit.
Provides the exception hierarchy used by every module and the helpers the
command-line front end uses to turn exceptions into exit codes and JSON.
"""

from typing import Dict, Any, Optional
import logging

logger = logging.getLogger(__name__)

# Exit codes shared by the CLI and the decider contract
EXIT_RATIONAL = 0
EXIT_NOT_RATIONAL = 1
EXIT_UNDECIDED = 2
EXIT_INVALID = 3
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_SOFTWARE = 70


class RationalityError(Exception):
    """
    Base exception for the toolkit.
    Gives every error a stable code, an exit status and optional details.
    """

    def __init__(
        self,
        message: str = "Internal error",
        error_code: str = "internal_error",
        exit_code: int = EXIT_SOFTWARE,
        details: Optional[Dict[str, Any]] = None
    ):
        """
        Initialize the exception.

        Args:
            message: Human readable description
            error_code: Machine readable identifier
            exit_code: Process exit status when the error reaches the CLI
            details: Additional structured context
        """
        self.message = message
        self.error_code = error_code
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """
        Convert the exception to a JSON-ready dictionary.

        Returns:
            Dictionary with status, code, message and details
        """
        error_dict = {
            "status": "error",
            "error_code": self.error_code,
            "message": self.message
        }

        if self.details:
            error_dict["details"] = self.details

        return error_dict


# Input and parsing errors
class UsageError(RationalityError):
    """Command line arguments do not match any subcommand."""

    def __init__(self, message: str = "Invalid command line usage"):
        super().__init__(message=message, error_code="usage_error", exit_code=EXIT_USAGE)


class ParseError(RationalityError):
    """Expression or instance text could not be parsed."""

    def __init__(
        self,
        message: str = "Could not parse input",
        line: Optional[int] = None,
        column: Optional[int] = None,
        source: Optional[str] = None
    ):
        """
        Initialize a parse error with an optional position.

        Args:
            message: Description of the problem
            line: 1-based line of the offending token
            column: 1-based column of the offending token
            source: The text (or file name) being parsed
        """
        details: Dict[str, Any] = {}
        if line is not None:
            details["line"] = line
        if column is not None:
            details["column"] = column
        if source is not None:
            details["source"] = source
        self.line = line
        self.column = column
        super().__init__(message=message, error_code="parse_error", exit_code=EXIT_DATA, details=details)


class UnknownSymbol(RationalityError):
    """A symbol is not registered in the function field."""

    def __init__(self, symbol: str, known: Optional[list] = None):
        details: Dict[str, Any] = {"symbol": symbol}
        if known:
            details["known_symbols"] = sorted(known)
        self.symbol = symbol
        super().__init__(
            message=f"Unknown symbol '{symbol}'",
            error_code="unknown_symbol",
            exit_code=EXIT_DATA,
            details=details
        )


class UnknownCase(RationalityError):
    """A case tag is not in the chain registry."""

    def __init__(self, tag: str, known: Optional[list] = None):
        super().__init__(
            message=f"Unknown case tag '{tag}'",
            error_code="unknown_case",
            exit_code=EXIT_USAGE,
            details={"tag": tag, "known_tags": sorted(known or [])}
        )


# Algebraic errors
class ZeroDenominator(RationalityError):
    """A rational function would have a zero denominator."""

    def __init__(self, message: str = "Denominator normalizes to zero", expression: Optional[str] = None):
        details = {"expression": expression} if expression else None
        super().__init__(message=message, error_code="zero_denominator", exit_code=EXIT_INVALID, details=details)


class InvalidTower(RationalityError):
    """Tower relations are not triangular or names collide."""

    def __init__(self, message: str = "Invalid radical tower"):
        super().__init__(message=message, error_code="invalid_tower", exit_code=EXIT_INVALID)


class InconsistentSubstitution(RationalityError):
    """A substitution sends a tower generator somewhere its relation forbids."""

    def __init__(self, generator: str, message: Optional[str] = None):
        super().__init__(
            message=message or f"Image of '{generator}' does not satisfy its defining relation",
            error_code="inconsistent_substitution",
            exit_code=EXIT_INVALID,
            details={"generator": generator}
        )


# Group errors
class NotUnimodular(RationalityError):
    """Matrix determinant is not +1 or -1."""

    def __init__(self, entries: tuple, determinant: int):
        super().__init__(
            message=f"Matrix {list(entries)} has determinant {determinant}, expected +1 or -1",
            error_code="not_unimodular",
            exit_code=EXIT_INVALID,
            details={"entries": list(entries), "determinant": determinant}
        )


class InfiniteGroup(RationalityError):
    """Generated group exceeds the order bound of finite subgroups of GL2(Z)."""

    def __init__(self, bound: int):
        super().__init__(
            message=f"Generated group has more than {bound} elements, so it is infinite",
            error_code="infinite_group",
            exit_code=EXIT_INVALID,
            details={"bound": bound}
        )


class ClassificationFailed(RationalityError):
    """No conjugator found inside the search box."""

    def __init__(self, message: str = "No conjugator found within the search bound", details: Optional[Dict[str, Any]] = None):
        super().__init__(message=message, error_code="classification_failed", exit_code=EXIT_SOFTWARE, details=details)


# Action errors
class RelationViolation(RationalityError):
    """Composed substitutions disagree with the group multiplication table."""

    def __init__(self, message: str = "Action does not respect the group law", details: Optional[Dict[str, Any]] = None):
        super().__init__(message=message, error_code="relation_violation", exit_code=EXIT_INVALID, details=details)


class ZeroCoefficient(RationalityError):
    """A quasi-monomial coefficient is zero."""

    def __init__(self, generator: str, variable: str):
        super().__init__(
            message=f"Coefficient of '{variable}' under '{generator}' is zero",
            error_code="zero_coefficient",
            exit_code=EXIT_INVALID,
            details={"generator": generator, "variable": variable}
        )


class CoefficientOutsideBaseField(RationalityError):
    """A coefficient is not a constant of the required field."""

    def __init__(self, generator: str, variable: str, coefficient: str):
        super().__init__(
            message=f"Coefficient {coefficient} of '{variable}' under '{generator}' is not in the base field",
            error_code="coefficient_outside_base_field",
            exit_code=EXIT_INVALID,
            details={"generator": generator, "variable": variable, "coefficient": coefficient}
        )


class DegenerateParameters(RationalityError):
    """Parameters make a construction degenerate."""

    def __init__(self, message: str = "Degenerate parameters"):
        super().__init__(message=message, error_code="degenerate_parameters", exit_code=EXIT_INVALID)


class MissingRootOfUnity(RationalityError):
    """A construction needs a primitive cube root of unity in the tower."""

    def __init__(self, message: str = "Tower does not contain a primitive cube root of unity"):
        super().__init__(message=message, error_code="missing_root_of_unity", exit_code=EXIT_INVALID)


# Verification and decision errors
class VerificationFailure(RationalityError):
    """A change-of-variables identity did not hold."""

    def __init__(self, case_tag: str, identity: str, details: Optional[Dict[str, Any]] = None):
        payload = {"case": case_tag, "identity": identity}
        payload.update(details or {})
        self.case_tag = case_tag
        self.identity = identity
        super().__init__(
            message=f"Identity failed in case '{case_tag}': {identity}",
            error_code="verification_failure",
            exit_code=EXIT_NOT_RATIONAL,
            details=payload
        )


class ProductFormulaViolation(RationalityError):
    """Local Hilbert symbols do not multiply to +1; indicates a bug."""

    def __init__(self, a: Any, b: Any, places: Dict[str, int]):
        super().__init__(
            message=f"Product formula violated for ({a}, {b})",
            error_code="product_formula_violation",
            exit_code=EXIT_SOFTWARE,
            details={"a": str(a), "b": str(b), "places": places}
        )


class InvalidInstance(RationalityError):
    """An instance does not satisfy the hypotheses of the criteria."""

    def __init__(self, message: str = "Invalid instance", field_errors: Optional[Dict[str, str]] = None):
        details = {"field_errors": field_errors} if field_errors else None
        self.field_errors = field_errors or {}
        super().__init__(message=message, error_code="invalid_instance", exit_code=EXIT_INVALID, details=details)

    @classmethod
    def from_validation(cls, exc: Any, source: Optional[str] = None) -> "InvalidInstance":
        """
        Convert a pydantic ValidationError into an InvalidInstance.

        Args:
            exc: The ValidationError
            source: File or argument the data came from
        """
        field_errors = {
            ".".join(str(part) for part in error["loc"]) or "instance": error["msg"]
            for error in exc.errors()
        }
        where = f" in {source}" if source else ""
        return cls(f"Invalid instance{where}: {len(field_errors)} field error(s)", field_errors=field_errors)


class UnsupportedSymbolBase(RationalityError):
    """A symbol would have to be evaluated over a field outside the supported menu."""

    def __init__(self, message: str, query: Optional[Dict[str, Any]] = None):
        self.query = query or {}
        super().__init__(message=message, error_code="unsupported_symbol_base", exit_code=EXIT_UNDECIDED, details=self.query)


class CertificateUnavailable(RationalityError):
    """No explicit generators are implemented for a rational verdict."""

    def __init__(self, clause: str):
        super().__init__(
            message=f"No explicit generator construction for clause '{clause}'",
            error_code="certificate_unavailable",
            exit_code=EXIT_SOFTWARE,
            details={"clause": clause}
        )


def log_exception(exc: RationalityError) -> None:
    """
    Log a toolkit exception at a severity matching its exit code.

    Args:
        exc: The exception to record
    """
    if exc.exit_code >= EXIT_SOFTWARE:
        logger.error(f"Error {exc.exit_code} ({exc.error_code}): {exc.message}", exc_info=True)
    else:
        logger.warning(f"Error {exc.exit_code} ({exc.error_code}): {exc.message}")
