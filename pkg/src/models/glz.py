"""
Finite subgroups of GL2(Z): closure, invariant forms, classification into
the thirteen conjugacy classes and their normal-subgroup tables.

Matrices act on exponent vectors by columns: the matrix [a_ij] sends x_j to
a coefficient times x_1^a_1j * x_2^a_2j, so the matrix of a product of
automorphisms is the product of their matrices.
"""

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.utils.error_handling import ClassificationFailed, InfiniteGroup, InvalidInstance, NotUnimodular

logger = logging.getLogger(__name__)

MAX_FINITE_ORDER = 12


@dataclass(frozen=True, order=True)
class IntMatrix2:
    """2x2 integer matrix with determinant +1 or -1."""
    a11: int
    a12: int
    a21: int
    a22: int

    def __post_init__(self):
        det = self.a11 * self.a22 - self.a12 * self.a21
        if det not in (1, -1):
            raise NotUnimodular(self.entries, det)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "IntMatrix2":
        (a11, a12), (a21, a22) = rows
        return cls(int(a11), int(a12), int(a21), int(a22))

    @classmethod
    def from_entries(cls, entries: Sequence[int]) -> "IntMatrix2":
        if len(entries) != 4:
            raise ValueError(f"Expected 4 integer entries, got {len(entries)}")
        if any(isinstance(e, bool) or int(e) != e for e in entries):
            raise ValueError(f"Matrix entries must be integers: {list(entries)}")
        return cls(*(int(e) for e in entries))

    @property
    def entries(self) -> Tuple[int, int, int, int]:
        return (self.a11, self.a12, self.a21, self.a22)

    @property
    def det(self) -> int:
        return self.a11 * self.a22 - self.a12 * self.a21

    def column(self, j: int) -> Tuple[int, int]:
        return (self.a11, self.a21) if j == 0 else (self.a12, self.a22)

    def __matmul__(self, other: "IntMatrix2") -> "IntMatrix2":
        return IntMatrix2(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
        )

    def __neg__(self) -> "IntMatrix2":
        return IntMatrix2(-self.a11, -self.a12, -self.a21, -self.a22)

    def inverse(self) -> "IntMatrix2":
        d = self.det
        return IntMatrix2(d * self.a22, -d * self.a12, -d * self.a21, d * self.a11)

    def transpose(self) -> "IntMatrix2":
        return IntMatrix2(self.a11, self.a21, self.a12, self.a22)

    def conjugate(self, p: "IntMatrix2") -> "IntMatrix2":
        """p * self * p^-1"""
        return p @ self @ p.inverse()

    def is_identity(self) -> bool:
        return self.entries == (1, 0, 0, 1)

    def is_identity_mod2(self) -> bool:
        return self.a12 % 2 == 0 and self.a21 % 2 == 0

    def as_array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]], dtype=np.int64)

    def to_list(self) -> List[List[int]]:
        return [[self.a11, self.a12], [self.a21, self.a22]]

    def __str__(self) -> str:
        return f"[[{self.a11},{self.a12}],[{self.a21},{self.a22}]]"


IDENTITY = IntMatrix2(1, 0, 0, 1)
MINUS_I = IntMatrix2(-1, 0, 0, -1)
LAMBDA = IntMatrix2(1, 0, 0, -1)
TAU = IntMatrix2(0, 1, 1, 0)
SIGMA = IntMatrix2(0, -1, 1, 0)
RHO = IntMatrix2(1, -1, 1, 0)

NAMED_MATRICES: Dict[str, IntMatrix2] = {
    "I": IDENTITY,
    "1": IDENTITY,
    "lambda": LAMBDA,
    "tau": TAU,
    "sigma": SIGMA,
    "rho": RHO,
}

_UNICODE = {"λ": "lambda", "τ": "tau", "σ": "sigma", "ρ": "rho", "−": "-", "·": "*"}


class ConjugacyLabel(str, Enum):
    C1 = "C1"
    C2_1 = "C2_1"
    C2_2 = "C2_2"
    C2_3 = "C2_3"
    C3 = "C3"
    C4 = "C4"
    C6 = "C6"
    V4_1 = "V4_1"
    V4_2 = "V4_2"
    S3_1 = "S3_1"
    S3_2 = "S3_2"
    D4 = "D4"
    D6 = "D6"


REPRESENTATIVE_GENERATORS: Dict[ConjugacyLabel, Tuple[str, ...]] = {
    ConjugacyLabel.C1: (),
    ConjugacyLabel.C2_1: ("-I",),
    ConjugacyLabel.C2_2: ("lambda",),
    ConjugacyLabel.C2_3: ("tau",),
    ConjugacyLabel.C3: ("rho^2",),
    ConjugacyLabel.C4: ("sigma",),
    ConjugacyLabel.C6: ("rho",),
    ConjugacyLabel.V4_1: ("lambda", "-I"),
    ConjugacyLabel.V4_2: ("tau", "-I"),
    ConjugacyLabel.S3_1: ("rho^2", "tau"),
    ConjugacyLabel.S3_2: ("rho^2", "-tau"),
    ConjugacyLabel.D4: ("sigma", "tau"),
    ConjugacyLabel.D6: ("rho", "tau"),
}

NORMAL_SUBGROUP_TABLE: Dict[ConjugacyLabel, Tuple[str, ...]] = {
    ConjugacyLabel.C1: ("1",),
    ConjugacyLabel.C2_1: ("1", "-I"),
    ConjugacyLabel.C2_2: ("1", "lambda"),
    ConjugacyLabel.C2_3: ("1", "tau"),
    ConjugacyLabel.C3: ("1", "rho^2"),
    ConjugacyLabel.C4: ("1", "sigma^2", "sigma"),
    ConjugacyLabel.C6: ("1", "rho^3", "rho^2", "rho"),
    ConjugacyLabel.V4_1: ("1", "-I", "lambda", "-lambda", "lambda,-I"),
    ConjugacyLabel.V4_2: ("1", "-I", "tau", "-tau", "tau,-I"),
    ConjugacyLabel.S3_1: ("1", "rho^2", "rho^2,tau"),
    ConjugacyLabel.S3_2: ("1", "rho^2", "rho^2,-tau"),
    ConjugacyLabel.D4: ("1", "-I", "-I,tau*sigma", "-I,tau", "sigma", "sigma,tau"),
    ConjugacyLabel.D6: ("1", "-I", "rho^2", "rho", "rho^2,tau", "rho^2,-tau", "rho,tau"),
}


def parse_word(word: str) -> IntMatrix2:
    """
    Evaluate a word such as "-tau", "rho^2" or "tau*sigma" in the named matrices.
    """
    text = word.strip()
    for symbol, ascii_name in _UNICODE.items():
        text = text.replace(symbol, ascii_name)
    text = text.replace(" ", "")
    sign = 1
    while text.startswith("-"):
        sign = -sign
        text = text[1:]
    if not text:
        raise InvalidInstance(f"Empty group word '{word}'")
    result = IDENTITY
    for factor in text.split("*"):
        match = re.fullmatch(r"([A-Za-z]+|1)(?:\^(\d+))?", factor)
        if not match or match.group(1) not in NAMED_MATRICES:
            raise InvalidInstance(f"Unknown group word '{word}'")
        base = NAMED_MATRICES[match.group(1)]
        for _ in range(int(match.group(2) or 1)):
            result = result @ base
    return -result if sign < 0 else result


def canonical_selector(selector: str) -> str:
    """Normalize an H selector such as "<-I, tau>" or "{1}" for table lookup."""
    text = selector.strip()
    for symbol, ascii_name in _UNICODE.items():
        text = text.replace(symbol, ascii_name)
    text = text.strip("<>⟨⟩{}() ").replace(" ", "")
    if text in ("", "1", "I", "trivial"):
        return "1"
    return text


@dataclass(frozen=True)
class FiniteMatrixGroup:
    """A closed finite subgroup of GL2(Z)."""
    elements: Tuple[IntMatrix2, ...]
    generators: Tuple[IntMatrix2, ...] = ()
    label: Optional[ConjugacyLabel] = None
    selector: Optional[str] = None

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, g: IntMatrix2) -> bool:
        return g in self.elements

    def element_set(self) -> frozenset:
        return frozenset(self.elements)

    def same_elements(self, other: "FiniteMatrixGroup") -> bool:
        return self.element_set() == other.element_set()

    def is_cyclic(self) -> bool:
        return any(element_order(g) == self.order for g in self.elements)

    def conjugate(self, p: IntMatrix2) -> "FiniteMatrixGroup":
        return FiniteMatrixGroup(
            elements=tuple(sorted(g.conjugate(p) for g in self.elements)),
            generators=tuple(g.conjugate(p) for g in self.generators),
            selector=self.selector,
        )

    def is_subgroup_of(self, other: "FiniteMatrixGroup") -> bool:
        return self.element_set() <= other.element_set()

    def is_normal_in(self, other: "FiniteMatrixGroup") -> bool:
        mine = self.element_set()
        return all(frozenset(h.conjugate(g) for h in mine) == mine for g in other.elements)

    def to_dict(self) -> Dict:
        return {
            "order": self.order,
            "label": self.label.value if self.label else None,
            "selector": self.selector,
            "generators": [g.to_list() for g in self.generators],
            "elements": [g.to_list() for g in self.elements],
        }


def element_order(g: IntMatrix2, bound: int = MAX_FINITE_ORDER) -> int:
    power = g
    for n in range(1, bound + 1):
        if power.is_identity():
            return n
        power = power @ g
    raise InfiniteGroup(bound)


def close_group(gens: Iterable[IntMatrix2], selector: Optional[str] = None) -> FiniteMatrixGroup:
    """
    Saturate a generator list under multiplication.

    Raises:
        InfiniteGroup: as soon as more than twelve elements appear
        NotUnimodular: when a generator is given as entries with bad determinant
    """
    generators = tuple(g if isinstance(g, IntMatrix2) else IntMatrix2.from_entries(g) for g in gens)
    elements = {IDENTITY}
    frontier = [IDENTITY]
    while frontier:
        next_frontier = []
        for h in frontier:
            for g in generators:
                product = g @ h
                if product not in elements:
                    elements.add(product)
                    next_frontier.append(product)
                    if len(elements) > MAX_FINITE_ORDER:
                        raise InfiniteGroup(MAX_FINITE_ORDER)
        frontier = next_frontier
    return FiniteMatrixGroup(elements=tuple(sorted(elements)), generators=generators, selector=selector)


def invariant_form(group: FiniteMatrixGroup) -> np.ndarray:
    """Sum of g^T g over the group; a positive definite G-invariant form."""
    total = np.zeros((2, 2), dtype=np.int64)
    for g in group.elements:
        a = g.as_array()
        total += a.T @ a
    return total


def reduce_form(form: np.ndarray) -> Tuple[np.ndarray, IntMatrix2]:
    """
    Lagrange-Gauss reduction. Returns (F', U) with F' = U^T F U and
    |2 F'01| <= F'00 <= F'11.
    """
    a, b, c = int(form[0, 0]), int(form[0, 1]), int(form[1, 1])
    u = IDENTITY
    while True:
        m = (2 * b + a) // (2 * a)
        if m:
            # e2 <- e2 - m e1
            c = c - 2 * m * b + m * m * a
            b = b - m * a
            u = u @ IntMatrix2(1, -m, 0, 1)
        if a > c:
            a, c = c, a
            b = -b
            u = u @ IntMatrix2(0, -1, 1, 0)
            continue
        break
    return np.array([[a, b], [b, c]], dtype=np.int64), u


@lru_cache(maxsize=None)
def unimodular_box(bound: int) -> Tuple[IntMatrix2, ...]:
    """All of GL2(Z) with entries in [-bound, bound], identity first."""
    values = range(-bound, bound + 1)
    found = []
    for a11 in values:
        for a12 in values:
            for a21 in values:
                for a22 in values:
                    if a11 * a22 - a12 * a21 in (1, -1):
                        found.append(IntMatrix2(a11, a12, a21, a22))

    def key(m: IntMatrix2):
        entries = m.entries
        return (max(map(abs, entries)), sum(map(abs, entries)), not m.is_identity(), entries)

    return tuple(sorted(found, key=key))


@lru_cache(maxsize=None)
def representative(label: ConjugacyLabel) -> FiniteMatrixGroup:
    label = ConjugacyLabel(label)
    group = close_group([parse_word(w) for w in REPRESENTATIVE_GENERATORS[label]])
    return FiniteMatrixGroup(elements=group.elements, generators=group.generators, label=label,
                             selector=",".join(REPRESENTATIVE_GENERATORS[label]) or "1")


def candidate_labels(group: FiniteMatrixGroup) -> List[ConjugacyLabel]:
    order = group.order
    cyclic = group.is_cyclic()
    if order == 1:
        return [ConjugacyLabel.C1]
    if order == 2:
        g = next(e for e in group.elements if not e.is_identity())
        if g == MINUS_I:
            return [ConjugacyLabel.C2_1]
        return [ConjugacyLabel.C2_2] if g.is_identity_mod2() else [ConjugacyLabel.C2_3]
    if order == 3:
        return [ConjugacyLabel.C3]
    if order == 4:
        if cyclic:
            return [ConjugacyLabel.C4]
        if all(g.is_identity_mod2() for g in group.elements):
            return [ConjugacyLabel.V4_1]
        return [ConjugacyLabel.V4_2]
    if order == 6:
        return [ConjugacyLabel.C6] if cyclic else [ConjugacyLabel.S3_1, ConjugacyLabel.S3_2]
    if order == 8:
        return [ConjugacyLabel.D4]
    if order == 12:
        return [ConjugacyLabel.D6]
    raise ClassificationFailed(f"No finite subgroup of GL2(Z) has order {order}", {"order": order})


def _search_conjugator(group: FiniteMatrixGroup, target: FiniteMatrixGroup, bound: int) -> Optional[IntMatrix2]:
    wanted = target.element_set()
    for q in unimodular_box(bound):
        q_inv = q.inverse()
        if all((q @ g @ q_inv) in wanted for g in group.elements):
            return q
    return None


def classify(group: FiniteMatrixGroup, bound: int = 3) -> Tuple[ConjugacyLabel, IntMatrix2]:
    """
    Find the conjugacy label of a finite group and P with P G P^-1 equal to
    the label's representative group.

    Raises:
        ClassificationFailed: when no conjugator lies in the search box
    """
    _, u = reduce_form(invariant_form(group))
    u_inv = u.inverse()
    reduced = FiniteMatrixGroup(elements=tuple(sorted(u_inv @ g @ u for g in group.elements)))

    for label in candidate_labels(group):
        target = representative(label)
        if group.element_set() == target.element_set():
            return label, IDENTITY
        q = _search_conjugator(reduced, target, bound)
        if q is not None:
            p = q @ u_inv
        else:
            p = _search_conjugator(group, target, bound)
        if p is None:
            continue
        if group.conjugate(p).element_set() != target.element_set():
            raise ClassificationFailed("Conjugator failed set-equality verification", {"label": label.value})
        logger.debug(f"Classified group of order {group.order} as {label.value} via {p}")
        return label, p

    raise ClassificationFailed(details={
        "order": group.order,
        "elements": [g.to_list() for g in group.elements],
        "bound": bound,
    })


def subgroup_from_selector(label: ConjugacyLabel, selector: str) -> FiniteMatrixGroup:
    """Subgroup of the representative of label generated by the selector's words."""
    label = ConjugacyLabel(label)
    key = canonical_selector(selector)
    if key == "1":
        return FiniteMatrixGroup(elements=(IDENTITY,), selector="1")
    group = close_group([parse_word(w) for w in key.split(",")], selector=key)
    if not group.is_subgroup_of(representative(label)):
        raise InvalidInstance(f"'{selector}' is not a subgroup of {label.value}")
    return group


def normal_subgroups(label: ConjugacyLabel) -> List[FiniteMatrixGroup]:
    """The normal subgroups H of the representative, as tabulated per label."""
    label = ConjugacyLabel(label)
    return [subgroup_from_selector(label, s) for s in NORMAL_SUBGROUP_TABLE[label]]


def find_normal_subgroup(label: ConjugacyLabel, selector: str) -> FiniteMatrixGroup:
    """
    Resolve a selector to an entry of the normal-subgroup table; selectors
    naming the same subgroup with different words are accepted.
    """
    label = ConjugacyLabel(label)
    wanted = subgroup_from_selector(label, selector)
    for candidate in normal_subgroups(label):
        if candidate.same_elements(wanted):
            return candidate
    raise InvalidInstance(
        f"H = {selector} is not a normal subgroup of {label.value}",
        field_errors={"H": f"expected one of {list(NORMAL_SUBGROUP_TABLE[label])}"},
    )
