"""
Quasi-monomial actions of finite subgroups of GL2(Z) on K(x, y).

An element acts on the tower K by a field substitution and on the variables
by x_j -> c_j * x^a_1j * y^a_2j with c_j in K. The action is given on
generators and extended to the whole group by composition.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field, model_validator

from src.models.glz import (
    IDENTITY,
    MAX_FINITE_ORDER,
    FiniteMatrixGroup,
    IntMatrix2,
    parse_word,
)
from src.models.ratfunc import FunctionField, RatFunc, Substitution, TowerSpec, compose
from src.utils.error_handling import (
    CoefficientOutsideBaseField,
    InfiniteGroup,
    RelationViolation,
    ZeroCoefficient,
)
from src.utils.expression_parser import parse_rational

logger = logging.getLogger(__name__)


class GeneratorSpec(BaseModel):
    """Action of one group generator."""
    name: str
    word: Optional[str] = Field(None, description="Matrix as a word in lambda, tau, sigma, rho, -I")
    matrix: Optional[List[int]] = Field(None, description="Matrix entries a11, a12, a21, a22")
    coefficients: Tuple[str, str] = ("1", "1")
    field_images: Dict[str, str] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _matrix_given(self) -> "GeneratorSpec":
        if self.matrix is None and self.word is None:
            self.word = self.name
        return self

    def to_matrix(self) -> IntMatrix2:
        if self.matrix is not None:
            return IntMatrix2.from_entries(self.matrix)
        return parse_word(self.word)


class ActionSpec(BaseModel):
    """Everything needed to build a quasi-monomial action."""
    tower: TowerSpec = Field(default_factory=TowerSpec)
    generators: List[GeneratorSpec]
    aliases: Dict[str, str] = Field(default_factory=dict)
    constants: Dict[str, str] = Field(default_factory=dict)


@dataclass(frozen=True)
class KernelReport:
    """H = elements acting trivially on K."""
    H: FiniteMatrixGroup
    quotient_order: int

    def to_dict(self) -> Dict:
        return {"H": self.H.to_dict(), "quotient_order": self.quotient_order}


def monomial_images(field: FunctionField, matrix: IntMatrix2, coefficients: Tuple[RatFunc, RatFunc]) -> Dict[str, RatFunc]:
    """Images x_j -> c_j * prod x_i^a_ij of the two variables."""
    variables = [field.symbol(v) for v in field.variables[:2]]
    images = {}
    for j, name in enumerate(field.variables[:2]):
        first, second = matrix.column(j)
        images[name] = coefficients[j] * variables[0] ** first * variables[1] ** second
    return images


class QuasiMonomialAction:
    """
    A validated action: one Substitution per group element, closed under
    composition and compatible with the matrix multiplication table.
    """

    def __init__(
        self,
        field: FunctionField,
        group: FiniteMatrixGroup,
        substitutions: Dict[IntMatrix2, Substitution],
        generator_names: Dict[str, IntMatrix2],
        coefficients: Dict[IntMatrix2, Tuple[RatFunc, RatFunc]],
    ):
        self.field = field
        self.group = group
        self.substitutions = substitutions
        self.generator_names = generator_names
        self.coefficients = coefficients

    @property
    def order(self) -> int:
        return self.group.order

    def substitution(self, element: Union[str, IntMatrix2]) -> Substitution:
        if isinstance(element, str):
            element = self.generator_names.get(element) or parse_word(element)
        if element not in self.substitutions:
            raise RelationViolation(f"{element} is not an element of the acting group")
        return self.substitutions[element]

    def apply(self, element: Union[str, IntMatrix2], f: RatFunc) -> RatFunc:
        return self.substitution(element)(f)

    def fixes_tower(self, element: IntMatrix2) -> bool:
        sub = self.substitutions[element]
        return all(sub.image(name) == self.field.symbol(name) for name in self.field.tower.names)

    def __repr__(self) -> str:
        return f"QuasiMonomialAction(order={self.order}, generators={list(self.generator_names)})"


def _coefficient(field: FunctionField, generator: str, variable: str, text: str) -> RatFunc:
    value = field.parse(text)
    if value.is_zero():
        raise ZeroCoefficient(generator, variable)
    if not value.is_constant():
        raise CoefficientOutsideBaseField(generator, variable, str(value))
    return value


def _same(s: Substitution, r: Substitution) -> bool:
    return all(s.images[name] == r.images[name] for name in s.images)


def build_action(spec: ActionSpec, coefficients_in_k: bool = False, field: Optional[FunctionField] = None) -> QuasiMonomialAction:
    """
    Build and validate a quasi-monomial action.

    Args:
        spec: Tower and per-generator data
        coefficients_in_k: Require every coefficient to lie in the ground field k
        field: Reuse an existing field instead of building one from spec

    Raises:
        ZeroCoefficient: a coefficient is zero
        CoefficientOutsideBaseField: a coefficient involves x, y or (with
            coefficients_in_k) is not fixed by the group
        RelationViolation: composed substitutions disagree with the group law
        InfiniteGroup: the matrix part generates an infinite group
    """
    if field is None:
        constants = {k: parse_rational(v) for k, v in spec.constants.items()}
        field = FunctionField(spec.tower, spec.aliases, constants)

    generator_subs: Dict[IntMatrix2, Substitution] = {}
    generator_names: Dict[str, IntMatrix2] = {}
    coefficients: Dict[IntMatrix2, Tuple[RatFunc, RatFunc]] = {}

    for gen in spec.generators:
        matrix = gen.to_matrix()
        coeffs = tuple(
            _coefficient(field, gen.name, var, text)
            for var, text in zip(field.variables, gen.coefficients)
        )
        images: Dict[str, RatFunc] = {}
        for name, text in gen.field_images.items():
            image = field.parse(text)
            if not image.is_constant():
                raise CoefficientOutsideBaseField(gen.name, name, str(image))
            images[name] = image
        images.update(monomial_images(field, matrix, coeffs))
        sub = Substitution(field, field, images)
        if matrix in generator_subs and not _same(generator_subs[matrix], sub):
            raise RelationViolation(f"Generators with matrix {matrix} act differently",
                                    {"generator": gen.name})
        generator_subs[matrix] = sub
        generator_names[gen.name] = matrix
        coefficients[matrix] = coeffs

    substitutions: Dict[IntMatrix2, Substitution] = {IDENTITY: Substitution.identity(field)}
    frontier = [IDENTITY]
    while frontier:
        next_frontier = []
        for element in frontier:
            for matrix, sub in generator_subs.items():
                product = matrix @ element
                composed = compose(sub, substitutions[element])
                if product in substitutions:
                    if not _same(substitutions[product], composed):
                        raise RelationViolation(
                            f"Composed action for {product} is inconsistent",
                            {"element": product.to_list()},
                        )
                    continue
                substitutions[product] = composed
                next_frontier.append(product)
                if len(substitutions) > MAX_FINITE_ORDER:
                    raise InfiniteGroup(MAX_FINITE_ORDER)
        frontier = next_frontier

    # Full multiplication table.
    for g, s in substitutions.items():
        for h, r in substitutions.items():
            if not _same(compose(s, r), substitutions[g @ h]):
                raise RelationViolation(
                    f"Action of {g} * {h} differs from action of the product",
                    {"left": g.to_list(), "right": h.to_list()},
                )

    group = FiniteMatrixGroup(elements=tuple(sorted(substitutions)), generators=tuple(generator_subs))
    if coefficients_in_k:
        for matrix, coeffs in coefficients.items():
            name = next(n for n, m in generator_names.items() if m == matrix)
            for var, c in zip(field.variables, coeffs):
                if any(s(c) != c for s in substitutions.values()):
                    raise CoefficientOutsideBaseField(name, var, str(c))

    all_coefficients = {}
    for element, sub in substitutions.items():
        monomials = monomial_images(field, element, (field.one(), field.one()))
        all_coefficients[element] = tuple(
            (sub.images[v] / monomials[v]).tidy() for v in field.variables[:2]
        )

    logger.debug(f"Built action of order {group.order} with generators {list(generator_names)}")
    return QuasiMonomialAction(field, group, substitutions, generator_names, all_coefficients)


def kernel_H(action: QuasiMonomialAction) -> KernelReport:
    """Elements of G acting trivially on the tower."""
    elements = tuple(sorted(g for g in action.group.elements if action.fixes_tower(g)))
    H = FiniteMatrixGroup(elements=elements)
    if not H.is_normal_in(action.group):
        raise RelationViolation("Kernel of the action on K is not normal")
    return KernelReport(H=H, quotient_order=action.order // H.order)


def is_invariant(f: RatFunc, action: QuasiMonomialAction) -> bool:
    """True iff every group element fixes f."""
    return all(sub(f) == f for sub in action.substitutions.values())
