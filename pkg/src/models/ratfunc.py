"""
Exact arithmetic in K(x, y) where K is a formal radical tower over Q.

The tower is a sequence of generators, each either free (transcendental) or
bound by a triangular relation: g^2 = expr, g^3 = expr or g^2 = -1 - g.
Polynomials live in a sympy sparse ring over QQ whose generators are the
tower symbols followed by the function-field variables; the relations have
pairwise coprime leading monomials under lex order, so remainder modulo the
relation list is a unique normal form.
"""

import logging
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple, Union

from pydantic import BaseModel, ConfigDict
from sympy import Rational, integer_nthroot
from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyElement, ring

from src.utils.error_handling import (
    DegenerateParameters,
    InconsistentSubstitution,
    InvalidTower,
    ParseError,
    UnknownSymbol,
    ZeroDenominator,
)
from src.utils.expression_parser import fold_expr, parse_to_expr
from src.utils.symbol_service import squarefree_core

logger = logging.getLogger(__name__)

Scalar = Union[int, Rational]


class RelationKind(str, Enum):
    FREE = "free"
    SQRT = "sqrt"
    CBRT = "cbrt"
    OMEGA = "omega"


RELATION_DEGREE = {RelationKind.SQRT: 2, RelationKind.CBRT: 3, RelationKind.OMEGA: 2}


class TowerGenerator(BaseModel):
    """One generator of the coefficient tower."""
    model_config = ConfigDict(frozen=True)

    name: str
    kind: RelationKind = RelationKind.FREE
    expr: Optional[str] = None

    @classmethod
    def free(cls, name: str) -> "TowerGenerator":
        return cls(name=name)

    @classmethod
    def sqrt(cls, name: str, expr: str) -> "TowerGenerator":
        return cls(name=name, kind=RelationKind.SQRT, expr=expr)

    @classmethod
    def cbrt(cls, name: str, expr: str) -> "TowerGenerator":
        return cls(name=name, kind=RelationKind.CBRT, expr=expr)

    @classmethod
    def omega(cls, name: str = "omega") -> "TowerGenerator":
        return cls(name=name, kind=RelationKind.OMEGA)


class TowerSpec(BaseModel):
    """Ordered tower generators plus the names of the function-field variables."""
    model_config = ConfigDict(frozen=True)

    generators: Tuple[TowerGenerator, ...] = ()
    variables: Tuple[str, ...] = ("x", "y")

    @classmethod
    def of(cls, *generators: TowerGenerator, variables: Iterable[str] = ("x", "y")) -> "TowerSpec":
        return cls(generators=tuple(generators), variables=tuple(variables))

    @property
    def names(self) -> List[str]:
        return [g.name for g in self.generators]

    def generator(self, name: str) -> TowerGenerator:
        for g in self.generators:
            if g.name == name:
                return g
        raise UnknownSymbol(name, self.names)


class FunctionField:
    """
    K(v1, ..., vn) for a formal radical tower K.

    Args:
        tower: Generators and variable names
        aliases: Named shorthands, parsed in this field (e.g. "d5": "1/(d0*d1)")
        constants: Numeric values substituted for names that are not
            generators (used to specialize formal parameters)
    """

    def __init__(
        self,
        tower: TowerSpec,
        aliases: Optional[Mapping[str, str]] = None,
        constants: Optional[Mapping[str, Scalar]] = None,
    ):
        self.tower = tower
        self.constants: Dict[str, Rational] = {k: Rational(v) for k, v in (constants or {}).items()}
        self._validate()

        names = [g.name for g in reversed(tower.generators)] + list(tower.variables)
        self.ring, *gens = ring(names, QQ, lex)
        self.gens: Dict[str, PolyElement] = dict(zip(names, gens))
        self.index: Dict[str, int] = {name: i for i, name in enumerate(names)}
        self.variable_indices = [self.index[v] for v in tower.variables]
        self.relations: List[PolyElement] = []
        self.relation_of: Dict[str, PolyElement] = {}
        self.radicands: Dict[str, "RatFunc"] = {}
        self.omega: Optional[str] = None
        # square classes generated by sqrt(-3) and the ground square roots so far
        self.square_span: Set[int] = {1}
        self.aliases: Dict[str, RatFunc] = {}

        for generator in tower.generators:
            if generator.kind == RelationKind.FREE:
                continue
            symbol = self.gens[generator.name]
            if generator.kind == RelationKind.OMEGA:
                self._adjoin_square_class(generator, -3)
                relation = symbol ** 2 + symbol + 1
                self.omega = generator.name
            else:
                radicand = self._parse_radicand(generator)
                self.radicands[generator.name] = radicand
                relation = symbol ** RELATION_DEGREE[generator.kind] - radicand.num
            self.relations.append(relation)
            self.relation_of[generator.name] = relation

        for name, text in (aliases or {}).items():
            if name in self.gens or name in self.constants:
                raise InvalidTower(f"Alias '{name}' collides with an existing symbol")
            self.aliases[name] = self.parse(text)

        logger.debug(f"FunctionField over {names} with {len(self.relations)} relations")

    def _validate(self) -> None:
        seen = set()
        omegas = 0
        for generator in self.tower.generators:
            if not generator.name.isidentifier():
                raise InvalidTower(f"Generator name '{generator.name}' is not an identifier")
            if generator.name in seen:
                raise InvalidTower(f"Duplicate generator name '{generator.name}'")
            if generator.name in self.tower.variables:
                raise InvalidTower(f"Generator '{generator.name}' collides with a variable")
            if generator.name in self.constants:
                raise InvalidTower(f"Generator '{generator.name}' is also given a numeric value")
            if generator.kind in (RelationKind.SQRT, RelationKind.CBRT) and not generator.expr:
                raise InvalidTower(f"Generator '{generator.name}' needs a radicand")
            if generator.kind == RelationKind.OMEGA:
                omegas += 1
            seen.add(generator.name)
        if omegas > 1:
            raise InvalidTower("At most one omega generator is allowed")
        if len(set(self.tower.variables)) != len(self.tower.variables):
            raise InvalidTower("Duplicate variable names")
        if not self.tower.variables and not self.tower.generators:
            raise InvalidTower("Field has no symbols")

    def _parse_radicand(self, generator: TowerGenerator) -> "RatFunc":
        earlier = self.tower.names[: self.tower.names.index(generator.name)]

        def symbol(name: str) -> RatFunc:
            if name in earlier:
                return RatFunc(self, self.gens[name])
            if name in self.constants:
                return self.constant(self.constants[name])
            raise InvalidTower(f"Radicand of '{generator.name}' references '{name}', which is not an earlier generator")

        expr = parse_to_expr(generator.expr, earlier + list(self.constants))
        radicand = fold_expr(expr, symbol, self.constant, source=generator.expr)
        if not radicand.den.is_ground:
            raise InvalidTower(f"Radicand of '{generator.name}' must be a polynomial")
        if radicand.is_zero():
            raise DegenerateParameters(f"Radicand of '{generator.name}' is zero")
        if radicand.num.is_ground:
            value = Rational(radicand.num.LC) / Rational(radicand.den.LC)
            self._check_not_power(generator, value)
            if generator.kind == RelationKind.SQRT:
                self._adjoin_square_class(generator, value)
        return radicand

    def _adjoin_square_class(self, generator: TowerGenerator, value: Rational) -> None:
        """
        A ground square root (or omega, as sqrt(-3)) must not lie in the field
        generated by the earlier ones.

        Raises:
            DegenerateParameters: the square class of value is a product of
                earlier ground radicands
        """
        core = squarefree_core(value)
        if core in self.square_span:
            raise DegenerateParameters(
                f"Radicand {value} of '{generator.name}' is a square in the tower below it; "
                f"the tower would not be a domain"
            )
        self.square_span |= {squarefree_core(core * s) for s in self.square_span}

    @staticmethod
    def _check_not_power(generator: TowerGenerator, value: Rational) -> None:
        degree = RELATION_DEGREE[generator.kind]
        p, q = int(value.p), int(value.q)
        sign_ok = degree % 2 == 1 or p > 0
        root_p, exact_p = integer_nthroot(abs(p), degree)
        root_q, exact_q = integer_nthroot(q, degree)
        if sign_ok and exact_p and exact_q:
            raise DegenerateParameters(
                f"Radicand {value} of '{generator.name}' is a perfect power; the tower would not be a domain"
            )

    # Construction helpers

    @property
    def variables(self) -> Tuple[str, ...]:
        return self.tower.variables

    @property
    def symbol_names(self) -> List[str]:
        return list(self.gens)

    def symbol(self, name: str) -> "RatFunc":
        if name in self.gens:
            return RatFunc(self, self.gens[name])
        if name in self.aliases:
            return self.aliases[name]
        if name in self.constants:
            return self.constant(self.constants[name])
        raise UnknownSymbol(name, list(self.gens) + list(self.aliases))

    def constant(self, value: Scalar) -> "RatFunc":
        value = Rational(value)
        return RatFunc(self, self.ring(QQ(int(value.p), int(value.q))))

    def one(self) -> "RatFunc":
        return self.constant(1)

    def zero(self) -> "RatFunc":
        return self.constant(0)

    def parse(self, text: Union[str, Scalar, "RatFunc"]) -> "RatFunc":
        """
        Parse text (or lift a number) into this field.

        Raises:
            UnknownSymbol: for names that are neither generators, variables,
                aliases nor numeric constants
            ParseError: for malformed text
        """
        if isinstance(text, RatFunc):
            if text.field is not self:
                raise ParseError("Rational function belongs to a different field")
            return text
        if isinstance(text, (int, Rational)) and not isinstance(text, bool):
            return self.constant(text)
        known = list(self.gens) + list(self.aliases) + list(self.constants)
        expr = parse_to_expr(str(text), known)
        return fold_expr(expr, self.symbol, self.constant, source=str(text)).tidy()

    def normal_form(self, p: PolyElement) -> PolyElement:
        if not self.relations or not p:
            return p
        return p.rem(self.relations)

    def is_variable(self, name: str) -> bool:
        return name in self.tower.variables

    def __repr__(self) -> str:
        return f"FunctionField({self.tower.names} ; {list(self.tower.variables)})"


class RatFunc:
    """
    A quotient num/den of normal-form polynomials. Values are immutable;
    equality is decided by cross-multiplication.
    """

    __slots__ = ("field", "num", "den")

    def __init__(self, field: FunctionField, num: PolyElement, den: Optional[PolyElement] = None):
        ring_ = field.ring
        num = field.normal_form(num)
        den = field.normal_form(den) if den is not None else ring_.one
        if not den:
            raise ZeroDenominator(expression=str(num.as_expr()))
        if not num:
            den = ring_.one
        else:
            num, den = _strip_monomial(ring_, num, den)
            lc = den.LC
            if lc != 1:
                num = num.quo_ground(lc)
                den = den.quo_ground(lc)
        self.field = field
        self.num = num
        self.den = den

    # Arithmetic

    def _coerce(self, other) -> "RatFunc":
        if isinstance(other, RatFunc):
            if other.field is not self.field:
                raise TypeError("Cannot combine rational functions from different fields")
            return other
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return self.field.constant(other)
        return NotImplemented

    def __add__(self, other) -> "RatFunc":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RatFunc(self.field, self.num + other.num, self.den)
        return RatFunc(self.field, self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        return RatFunc(self.field, -self.num, self.den)

    def __sub__(self, other) -> "RatFunc":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "RatFunc":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other) -> "RatFunc":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RatFunc(self.field, self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.is_zero():
            raise ZeroDenominator("Division by a rational function equal to zero", expression=str(self))
        return RatFunc(self.field, self.den, self.num)

    def __truediv__(self, other) -> "RatFunc":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other) -> "RatFunc":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, exponent: int) -> "RatFunc":
        if not isinstance(exponent, int):
            raise TypeError("Only integer powers are supported")
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return RatFunc(self.field, self.num ** exponent, self.den ** exponent)

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return rf_equal(self, other)

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    __hash__ = None

    # Inspection

    def is_zero(self) -> bool:
        return not self.num

    def is_constant(self) -> bool:
        """True when neither numerator nor denominator involves a variable."""
        for poly in (self.num, self.den):
            for monom in poly.itermonoms():
                if any(monom[i] for i in self.field.variable_indices):
                    return False
        return True

    def is_rational_constant(self) -> bool:
        return self.num.is_ground and self.den.is_ground

    def to_rational(self) -> Rational:
        if not self.is_rational_constant():
            raise ValueError(f"{self} is not a rational constant")
        num = QQ.to_sympy(self.num.LC) if self.num else Rational(0)
        return Rational(num) / Rational(QQ.to_sympy(self.den.LC))

    def symbols(self) -> set:
        names = list(self.field.gens)
        used = set()
        for poly in (self.num, self.den):
            for monom in poly.itermonoms():
                used.update(names[i] for i, e in enumerate(monom) if e)
        return used

    def tidy(self) -> "RatFunc":
        """Cancel the polynomial gcd of numerator and denominator."""
        if self.is_zero() or self.den.is_ground:
            return self
        num, den = self.num.cancel(self.den)
        return RatFunc(self.field, num, den)

    def as_expr(self):
        return self.num.as_expr() / self.den.as_expr()

    def __str__(self) -> str:
        return str(self.as_expr())

    def __repr__(self) -> str:
        return f"RatFunc({self})"


def _strip_monomial(ring_, num: PolyElement, den: PolyElement):
    """Divide numerator and denominator by their common monomial factor."""
    monoms = list(num.itermonoms()) + list(den.itermonoms())
    common = tuple(min(exps) for exps in zip(*monoms))
    if not any(common):
        return num, den

    def shift(poly: PolyElement) -> PolyElement:
        return ring_.from_dict({
            tuple(e - c for e, c in zip(monom, common)): coeff for monom, coeff in poly.iterterms()
        })

    return shift(num), shift(den)


def normal_form(p: PolyElement, field: FunctionField) -> PolyElement:
    """Reduce p modulo the tower relations of field."""
    if p.ring == field.ring:
        return field.normal_form(p)
    unknown = sorted(str(s) for s in p.as_expr().free_symbols if str(s) not in field.gens)
    if unknown:
        raise UnknownSymbol(unknown[0], field.symbol_names)
    return field.normal_form(field.ring.from_expr(p.as_expr()))


def rf_equal(f: RatFunc, g: RatFunc) -> bool:
    """f == g in K(x, y), decided by cross-multiplication."""
    if f.field is not g.field:
        raise TypeError("Cannot compare rational functions from different fields")
    if f.den == g.den:
        return not f.field.normal_form(f.num - g.num)
    return not f.field.normal_form(f.num * g.den - g.num * f.den)


class Substitution:
    """
    A ring map from source(K)(vars) to target(K')(vars') given by images of
    every source symbol. Symbols without an explicit image map to the
    same-named symbol of the target. Images of bound tower generators are
    checked against their relations.
    """

    def __init__(
        self,
        source: FunctionField,
        target: FunctionField,
        images: Mapping[str, Union[str, Scalar, RatFunc]],
        check: bool = True,
    ):
        self.source = source
        self.target = target
        for name in images:
            if name not in source.gens:
                raise UnknownSymbol(name, source.symbol_names)
        self.images: Dict[str, RatFunc] = {}
        for name in source.gens:
            if name in images:
                self.images[name] = target.parse(images[name])
            else:
                self.images[name] = target.symbol(name)
        self._names = list(source.gens)
        self._powers: Dict[Tuple[int, int, bool], PolyElement] = {}
        if check:
            self.check_relations()

    @classmethod
    def identity(cls, field: FunctionField) -> "Substitution":
        return cls(field, field, {}, check=False)

    def check_relations(self) -> None:
        for generator in self.source.tower.generators:
            if generator.kind == RelationKind.FREE:
                continue
            image = self.images[generator.name]
            if generator.kind == RelationKind.OMEGA:
                ok = (image * image + image + 1).is_zero()
            else:
                expected = self(self.source.radicands[generator.name])
                ok = image ** RELATION_DEGREE[generator.kind] == expected
            if not ok:
                raise InconsistentSubstitution(generator.name)

    def image(self, name: str) -> RatFunc:
        if name not in self.images:
            raise UnknownSymbol(name, self._names)
        return self.images[name]

    def _power(self, index: int, exponent: int, numerator: bool) -> PolyElement:
        key = (index, exponent, numerator)
        cached = self._powers.get(key)
        if cached is None:
            image = self.images[self._names[index]]
            base = image.num if numerator else image.den
            cached = base ** exponent
            self._powers[key] = cached
        return cached

    def _evaluate(self, poly: PolyElement, top: Tuple[int, ...]) -> PolyElement:
        ring_ = self.target.ring
        total = ring_.zero
        for monom, coeff in poly.iterterms():
            term = ring_(coeff)
            for index, e in enumerate(monom):
                if top[index] == 0:
                    continue
                if e:
                    term *= self._power(index, e, True)
                if top[index] - e:
                    term *= self._power(index, top[index] - e, False)
            total += term
        return total

    def __call__(self, f: RatFunc) -> RatFunc:
        if f.field is not self.source:
            raise TypeError("Substitution applied to a rational function from another field")
        monoms = list(f.num.itermonoms()) + list(f.den.itermonoms())
        top = tuple(max(exps) for exps in zip(*monoms))
        num = self._evaluate(f.num, top)
        den = self._evaluate(f.den, top)
        den = self.target.normal_form(den)
        if not den:
            raise ZeroDenominator("Substitution sends the denominator to zero", expression=str(f))
        return RatFunc(self.target, num, den).tidy()

    def is_identity(self) -> bool:
        if self.source is not self.target:
            return False
        return all(self.images[name] == self.source.symbol(name) for name in self._names)

    def __repr__(self) -> str:
        moved = {k: str(v) for k, v in self.images.items() if str(v) != k}
        return f"Substitution({moved})"


def substitute(f: RatFunc, s: Substitution) -> RatFunc:
    return s(f)


def compose(s: Substitution, r: Substitution) -> Substitution:
    """
    The substitution s o r, i.e. substitute(f, compose(s, r)) equals
    substitute(substitute(f, r), s).
    """
    if r.target is not s.source:
        raise TypeError("Substitutions are not composable")
    return Substitution(r.source, s.target, {name: s(image) for name, image in r.images.items()}, check=False)


def derivative(f: RatFunc, variable: str) -> RatFunc:
    """Formal partial derivative; tower generators are constants."""
    field = f.field
    if not field.is_variable(variable):
        raise UnknownSymbol(variable, list(field.variables))
    gen = field.gens[variable]
    num = f.num.diff(gen) * f.den - f.num * f.den.diff(gen)
    return RatFunc(field, num, f.den * f.den)


def jacobian(u: RatFunc, v: RatFunc, variables: Optional[Tuple[str, str]] = None) -> RatFunc:
    first, second = variables or u.field.variables[:2]
    return derivative(u, first) * derivative(v, second) - derivative(u, second) * derivative(v, first)


def jacobian_independent(u: RatFunc, v: RatFunc) -> bool:
    """True iff the Jacobian determinant of (u, v) in (x, y) is nonzero."""
    return not jacobian(u, v).is_zero()
