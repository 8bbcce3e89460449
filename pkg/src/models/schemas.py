"""
Pydantic models shared by the symbol service, the decider and the CLI.
Rationals are exact sympy Rationals and serialize as strings like "-3/5".
"""

import json
from enum import Enum
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, PlainValidator, field_validator, model_validator
from sympy import Rational

from src.models.glz import ConjugacyLabel
from src.utils.expression_parser import parse_rational

Rat = Annotated[Any, PlainValidator(parse_rational), PlainSerializer(lambda v: str(v), return_type=str)]

PARAMETER_NAMES = ("a", "b", "c", "d", "e")


class Tri(str, Enum):
    """Three-valued result of a norm-residue symbol computation."""
    ZERO = "zero"
    NONZERO = "nonzero"
    UNDECIDED = "undecided"

    def as_bit(self) -> int:
        """Zero -> 0, NonZero -> 1 (addition in F2 is multiplication of symbols)."""
        if self is Tri.UNDECIDED:
            raise ValueError("Undecided symbol has no value")
        return 0 if self is Tri.ZERO else 1


class BaseField(BaseModel):
    """Q, a quadratic extension Q(sqrt m), or Q(omega)."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["Q", "quad", "Q(omega)"] = "Q"
    m: Optional[Rat] = None

    @model_validator(mode="after")
    def _check_m(self) -> "BaseField":
        if self.kind == "quad" and (self.m is None or self.m == 0):
            raise ValueError("quadratic base field needs a nonzero m")
        return self

    @classmethod
    def rationals(cls) -> "BaseField":
        return cls(kind="Q")

    @classmethod
    def quad(cls, m) -> "BaseField":
        return cls(kind="quad", m=parse_rational(m))

    @classmethod
    def q_omega(cls) -> "BaseField":
        return cls(kind="Q(omega)")

    def __str__(self) -> str:
        if self.kind == "quad":
            return f"Q(sqrt({self.m}))"
        return self.kind


class SymbolQuery(BaseModel):
    """A norm-residue symbol (a, b) of degree 2 or 3 over a base field."""
    model_config = ConfigDict(frozen=True)

    degree: Literal[2, 3] = 2
    a: Rat
    b: Rat
    base: BaseField = Field(default_factory=BaseField.rationals)

    @model_validator(mode="after")
    def _nonzero(self) -> "SymbolQuery":
        if self.a == 0 or self.b == 0:
            raise ValueError("symbol arguments must be nonzero")
        return self

    def describe(self) -> str:
        return f"({self.a},{self.b})_{{{self.degree},{self.base}}}"


class ConicPoint(BaseModel):
    """Integer zero of X^2 - a Y^2 - b Z^2, not all coordinates zero."""
    model_config = ConfigDict(frozen=True)

    x: int
    y: int
    z: int

    def as_list(self) -> List[int]:
        return [self.x, self.y, self.z]


class SymbolResult(BaseModel):
    query: SymbolQuery
    value: Tri
    witness: Dict[str, Any] = Field(default_factory=dict)
    reason: Optional[str] = None

    def describe(self) -> str:
        return self.query.describe()


class PendingSymbol(BaseModel):
    """A symbol the criterion needs but that lies outside the supported bases."""
    symbol: str
    degree: Literal[2, 3]
    base: str
    argument: Optional[Rat] = None
    reason: str = ""

    def describe(self) -> str:
        return self.symbol


class FieldData(BaseModel):
    """
    Description of K when the clause needs more than the coefficients.

    kind selects the shape of K for C3 and S3 instances:
        pure_cubic: K = k(cbrt a) over k = Q(omega)
        cyclic_cubic: a cyclic cubic field over Q (no further data used)
        omega_cubic: K = Q(omega, cbrt a)
        s3_cubic: Galois closure of a non-pure cubic field, omega not in K
    For C4 and D4 with H = {1}, a and b are the invariants built from the
    generators alpha, beta of K.
    """
    kind: Optional[Literal["pure_cubic", "cyclic_cubic", "omega_cubic", "s3_cubic"]] = None
    a: Optional[Rat] = None
    b: Optional[Rat] = None


class Instance(BaseModel):
    """A concrete quasi-monomial action over Q to decide."""
    group: ConjugacyLabel
    H: str = "1"
    params: Dict[str, Rat] = Field(default_factory=dict)
    epsilon: Optional[int] = None
    epsilon1: Optional[int] = None
    epsilon2: Optional[int] = None
    base: Literal["Q", "Q(omega)"] = "Q"
    field: Optional[FieldData] = None
    normalization: List[str] = Field(default_factory=list, description="Coefficient absorptions already applied")

    @field_validator("params")
    @classmethod
    def _known_nonzero(cls, params: Dict[str, Any]) -> Dict[str, Any]:
        for name, value in params.items():
            if name not in PARAMETER_NAMES:
                raise ValueError(f"unknown parameter '{name}'")
            if value == 0:
                raise ValueError(f"parameter '{name}' must be nonzero")
        return params

    @field_validator("epsilon", "epsilon1", "epsilon2")
    @classmethod
    def _sign(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        return value

    def param(self, name: str, default: Any = None) -> Any:
        value = self.params.get(name)
        if value is None:
            return Rational(default) if default is not None else None
        return value


class VerdictStatus(str, Enum):
    RATIONAL = "rational"
    NOT_RATIONAL = "not_rational"
    UNDECIDED = "undecided"

    @property
    def exit_code(self) -> int:
        return {"rational": 0, "not_rational": 1, "undecided": 2}[self.value]


class Certificate(BaseModel):
    """Either explicit invariant generators or the theorem a verdict rests on."""
    kind: Literal["explicit_generators", "cited_theorem"]
    anchor: str
    u: Optional[str] = None
    v: Optional[str] = None
    invariance_checked: bool = False
    independence_checked: bool = False

    @classmethod
    def cited(cls, anchor: str) -> "Certificate":
        return cls(kind="cited_theorem", anchor=anchor)


class Verdict(BaseModel):
    status: VerdictStatus
    clause: str
    symbols: List[SymbolResult] = Field(default_factory=list)
    unsupported: List[PendingSymbol] = Field(default_factory=list)
    certificate: Optional[Certificate] = None
    notes: List[str] = Field(default_factory=list)
    normalized: Dict[str, Any] = Field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return self.status.exit_code

    @property
    def obstructions(self) -> List[SymbolResult]:
        return [s for s in self.symbols if s.value is Tri.NONZERO]

    @property
    def pending(self) -> List[Union[SymbolResult, PendingSymbol]]:
        return [s for s in self.symbols if s.value is Tri.UNDECIDED] + list(self.unsupported)

    @model_validator(mode="after")
    def _obstruction_present(self) -> "Verdict":
        if self.status is VerdictStatus.NOT_RATIONAL and not self.obstructions:
            raise ValueError("a NotRational verdict needs an obstruction")
        return self


class Report(BaseModel):
    """What the CLI prints to stdout."""
    subcommand: str
    inputs: Dict[str, Any] = Field(default_factory=dict)
    result: Any = None
    timing: float = 0.0
    version: str

    def to_json(self, include_timing: bool = True) -> str:
        payload = self.model_dump(mode="json")
        if not include_timing:
            payload.pop("timing", None)
        return json.dumps(payload, sort_keys=True, indent=2)
