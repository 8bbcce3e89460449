"""
Norm-residue symbols over Q, Q(sqrt m) and Q(omega), and the conic oracle.

Degree 2 symbols over Q are computed from local Hilbert symbols at 2, the
odd primes dividing the arguments and the real place; the product formula
is checked on every evaluation. Over a quadratic field a quaternion class
with rational arguments dies iff no ramified place splits. Degree 3 symbols
over Q(omega) use the tame symbol at primes p = 1 mod 3 and otherwise look
for an explicit norm.
"""

import logging
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import Rational, factorint, igcd, integer_nthroot
from sympy.ntheory import jacobi_symbol, legendre_symbol

from src.models.schemas import BaseField, ConicPoint, SymbolQuery, SymbolResult, Tri
from src.utils.enhanced_cache import cached
from src.utils.error_handling import ProductFormulaViolation, UnsupportedSymbolBase
from src.utils.expression_parser import parse_rational

logger = logging.getLogger(__name__)

INFINITY = "inf"
Place = Union[int, str]


# Square and cube classes

def square_class(q) -> int:
    """Integer n*d in the same square class as q = n/d."""
    q = parse_rational(q)
    return int(q.p) * int(q.q)


def squarefree_part(n: int) -> Tuple[int, int]:
    """Write n = core * root^2 with core squarefree (sign kept in core)."""
    if n == 0:
        raise ValueError("zero has no squarefree part")
    core, root = (1 if n > 0 else -1), 1
    for p, e in factorint(abs(n)).items():
        if e % 2:
            core *= p
        root *= p ** (e // 2)
    return core, root


def squarefree_core(q) -> int:
    return squarefree_part(square_class(q))[0]


def is_rational_square(q) -> bool:
    q = parse_rational(q)
    if q <= 0:
        return False
    return integer_nthroot(int(q.p), 2)[1] and integer_nthroot(int(q.q), 2)[1]


def rational_sqrt(q) -> Optional[Rational]:
    q = parse_rational(q)
    if not is_rational_square(q):
        return None
    return Rational(integer_nthroot(int(q.p), 2)[0], integer_nthroot(int(q.q), 2)[0])


def cubefree_core(q) -> int:
    """Cube-free integer in the cube class of q (n/d ~ n*d^2)."""
    q = parse_rational(q)
    n = int(q.p) * int(q.q) ** 2
    core = 1 if n > 0 else -1
    for p, e in factorint(abs(n)).items():
        core *= p ** (e % 3)
    return core


def is_rational_cube(q) -> bool:
    q = parse_rational(q)
    return bool(integer_nthroot(abs(int(q.p)), 3)[1] and integer_nthroot(int(q.q), 3)[1])


def _valuation(n: int, p: int) -> Tuple[int, int]:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


# Local and global Hilbert symbols

def hilbert_local(a, b, place: Place) -> int:
    """
    Local Hilbert symbol (a, b)_v in {+1, -1}.

    Args:
        a, b: Nonzero rationals
        place: A prime number or "inf"
    """
    a_int, b_int = square_class(a), square_class(b)
    if place == INFINITY or place is None:
        return -1 if a_int < 0 and b_int < 0 else 1
    p = int(place)
    alpha, u = _valuation(a_int, p)
    beta, v = _valuation(b_int, p)
    if p == 2:
        def eps(n):
            return ((n - 1) // 2) % 2

        def omega(n):
            return ((n * n - 1) // 8) % 2

        exponent = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if exponent % 2 else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    return sign * legendre_symbol(u % p, p) ** beta * legendre_symbol(v % p, p) ** alpha


def relevant_places(a, b) -> List[Place]:
    primes = {2}
    for n in (square_class(a), square_class(b)):
        primes.update(factorint(abs(n)))
    return sorted(primes) + [INFINITY]


@cached("hilbert_local_table")
def _local_table(a: Rational, b: Rational) -> Tuple[Tuple[Place, int], ...]:
    table = tuple((place, hilbert_local(a, b, place)) for place in relevant_places(a, b))
    product_value = 1
    for _, value in table:
        product_value *= value
    if product_value != 1:
        raise ProductFormulaViolation(a, b, {str(p): s for p, s in table})
    return table


def ramified_places(a, b) -> List[Place]:
    """Places where the quaternion algebra (a, b) over Q ramifies."""
    a, b = parse_rational(a), parse_rational(b)
    return [place for place, value in _local_table(a, b) if value == -1]


def hilbert_Q(a, b) -> Tri:
    """(a, b)_{2,Q}: Zero iff every local symbol is +1."""
    return Tri.NONZERO if ramified_places(a, b) else Tri.ZERO


def product_formula_holds(a, b) -> bool:
    value = 1
    for place in relevant_places(a, b):
        value *= hilbert_local(a, b, place)
    return value == 1


# Conic oracle

def _holzer_search(g: int, a1: int, b1: int, x_bound: int, y_bound: int,
                   seed: Optional[int]) -> Optional[Tuple[int, int, int]]:
    """Zero of g X^2 - a1 Y^2 - b1 Z^2 with |X| <= x_bound, |Y| <= y_bound."""
    xs = np.arange(0, x_bound + 1)
    ys = np.arange(y_bound, -1, -1)
    if seed is not None:
        rng = np.random.default_rng(seed)
        xs = rng.permutation(xs)
        ys = rng.permutation(ys)
    for x in xs.tolist():
        for y in ys.tolist():
            rhs = g * x * x - a1 * y * y
            if rhs % b1:
                continue
            square = rhs // b1
            if square < 0:
                continue
            z, exact = integer_nthroot(square, 2)
            if exact and (x, y, int(z)) != (0, 0, 0):
                return x, y, int(z)
    return None


@cached("conic_point")
def _conic_point(a: Rational, b: Rational, honor_holzer: bool, bound: Optional[int],
                 seed: Optional[int]) -> Optional[ConicPoint]:
    an, ad, bn, bd = int(a.p), int(a.q), int(b.p), int(b.q)
    A, B = an * ad, bn * bd
    A0, s = squarefree_part(A)
    B0, t = squarefree_part(B)
    g = int(igcd(A0, B0))
    a1, b1 = A0 // g, B0 // g
    if honor_holzer:
        x_bound = integer_nthroot(abs(a1 * b1), 2)[0]
        y_bound = integer_nthroot(abs(g * b1), 2)[0]
    else:
        x_bound = y_bound = int(bound or 0)
    found = _holzer_search(g, a1, b1, x_bound, y_bound, seed)
    if found is None:
        return None
    x1, y1, z1 = found
    # undo the gcd split, the squarefree reduction and the integerization
    x = g * x1 * s * t
    y = y1 * t * ad
    z = z1 * s * bd
    return ConicPoint(x=x, y=y, z=z)


def conic_point(a, b, honor_holzer: bool = True, bound: Optional[int] = None,
                seed: Optional[int] = None) -> Optional[ConicPoint]:
    """
    Nontrivial integer zero of X^2 - a Y^2 - b Z^2, or None.

    With honor_holzer the search box is Holzer's bound for the reduced form,
    so None proves that the conic has no rational point. Otherwise the box
    side is bound and None proves nothing.
    """
    return _conic_point(parse_rational(a), parse_rational(b), honor_holzer, bound, seed)


def point_on_conic(a, b, point: ConicPoint) -> bool:
    a, b = parse_rational(a), parse_rational(b)
    if (point.x, point.y, point.z) == (0, 0, 0):
        return False
    return point.x ** 2 - a * point.y ** 2 - b * point.z ** 2 == 0


def norm_solution(c, B, seed: Optional[int] = None) -> Optional[Tuple[Rational, Rational]]:
    """
    Rational (a1, a2) with a1^2 - c a2^2 = B, or None when there is none.
    """
    c, B = parse_rational(c), parse_rational(B)
    root = rational_sqrt(c)
    if root is not None:
        return (1 + B) / 2, (B - 1) / (2 * root)
    point = conic_point(c, B, seed=seed)
    if point is None:
        return None
    # z != 0 because c is not a square
    return Rational(point.x, point.z), Rational(point.y, point.z)


def other_norm_solution(c, B, solution: Tuple[Rational, Rational], slope) -> Optional[Tuple[Rational, Rational]]:
    """Second intersection of the line of the given slope through a known solution."""
    c, B, slope = parse_rational(c), parse_rational(B), parse_rational(slope)
    p1, p2 = solution
    denominator = 1 - c * slope ** 2
    if denominator == 0:
        return None
    t = (2 * c * p2 * slope - 2 * p1) / denominator
    return p1 + t, p2 + slope * t


# Quadratic extensions

def place_splits(place: Place, m) -> bool:
    """Whether the place splits in Q(sqrt m) for nonsquare m."""
    m0 = squarefree_core(m)
    if place == INFINITY:
        return m0 > 0
    p = int(place)
    if p == 2:
        return m0 % 8 == 1
    return jacobi_symbol(m0 % p, p) == 1


def hilbert_quadext(a, b, m) -> Tri:
    """(a, b)_{2,Q(sqrt m)} for rational a, b."""
    if is_rational_square(m):
        return hilbert_Q(a, b)
    return Tri.NONZERO if split_ramified_places(a, b, m) else Tri.ZERO


def split_ramified_places(a, b, m) -> List[Place]:
    return [place for place in ramified_places(a, b) if place_splits(place, m)]


# Cubic symbol over Q(omega)

def cubic_norm(a: int, x: int, y: int, z: int) -> int:
    """Norm from Q(cbrt a) of x + y cbrt(a) + z cbrt(a)^2."""
    return x ** 3 + a * y ** 3 + a * a * z ** 3 - 3 * a * x * y * z


def tame_cubic_obstruction(a, c) -> Optional[int]:
    """A prime p = 1 mod 3 where the tame cubic symbol of (a, c) is nontrivial."""
    A, C = cubefree_core(a), cubefree_core(c)
    primes = set(factorint(abs(A))) | set(factorint(abs(C)))
    for p in sorted(primes):
        if p % 3 != 1:
            continue
        va, ua = _valuation(A, p)
        vc, uc = _valuation(C, p)
        t = (pow(ua % p, vc, p) * pow(uc % p, -va, p)) % p
        if pow(t, (p - 1) // 3, p) != 1:
            return p
    return None


@cached("cubic_search_box")
def _search_box(bound: int) -> List[Tuple[int, int, int]]:
    span = range(-bound, bound + 1)
    triples = [t for t in product(span, span, span) if t != (0, 0, 0)]
    triples.sort(key=lambda t: (max(map(abs, t)), sum(map(abs, t)), t))
    return triples


def find_cubic_norm(a: int, c: Rational, bound: int) -> Optional[Tuple[int, int, int]]:
    """x, y, z with N(x + y cbrt a + z cbrt a^2) / c a nonzero rational cube."""
    for x, y, z in _search_box(bound):
        n = cubic_norm(a, x, y, z)
        if n and is_rational_cube(Rational(n) / c):
            return x, y, z
    return None


@cached("cubic_symbol")
def _cubic_symbol(a: Rational, c: Rational, search_bound: int) -> Tuple[Tri, Dict]:
    A, C = cubefree_core(a), cubefree_core(c)
    if A in (1, -1):
        return Tri.ZERO, {"reason": "a is a cube"}
    if C in (1, -1):
        return Tri.ZERO, {"reason": "c is a cube", "norm_element": [C, 0, 0], "radicand": A}
    p = tame_cubic_obstruction(A, C)
    if p is not None:
        return Tri.NONZERO, {"tame_prime": p}
    found = find_cubic_norm(A, Rational(C), search_bound)
    if found is not None:
        return Tri.ZERO, {"norm_element": list(found), "radicand": A}
    found = find_cubic_norm(C, Rational(A), search_bound)
    if found is not None:
        return Tri.ZERO, {"norm_element": list(found), "radicand": C}
    return Tri.UNDECIDED, {"reason": "tame symbols trivial; no norm found within the search bound"}


def cubic_symbol(a, c, search_bound: int = 20) -> Tri:
    """(a, c)_{3,Q(omega)}."""
    return cubic_symbol_detail(a, c, search_bound)[0]


def cubic_symbol_detail(a, c, search_bound: int = 20) -> Tuple[Tri, Dict]:
    return _cubic_symbol(parse_rational(a), parse_rational(c), int(search_bound))


# Dispatch

def evaluate(query: SymbolQuery, search_bound: int = 20, seed: Optional[int] = None) -> SymbolResult:
    """
    Evaluate a symbol query.

    Raises:
        UnsupportedSymbolBase: degree 3 outside Q(omega)
    """
    a, b = query.a, query.b
    if query.degree == 3:
        if query.base.kind != "Q(omega)":
            raise UnsupportedSymbolBase(f"Cubic symbol over {query.base} is not supported",
                                        query.model_dump(mode="json"))
        value, witness = cubic_symbol_detail(a, b, search_bound)
        reason = witness.pop("reason", None) if value is Tri.UNDECIDED else None
        return SymbolResult(query=query, value=value, witness=witness, reason=reason)

    if query.base.kind == "Q":
        places = ramified_places(a, b)
        witness: Dict = {"ramified_places": [str(p) for p in places]}
        if not places:
            point = conic_point(a, b, seed=seed)
            if point is not None:
                witness["conic_point"] = point.as_list()
        return SymbolResult(query=query, value=Tri.NONZERO if places else Tri.ZERO, witness=witness)

    m = Rational(-3) if query.base.kind == "Q(omega)" else query.base.m
    value = hilbert_quadext(a, b, m)
    witness = {
        "ramified_places": [str(p) for p in ramified_places(a, b)],
        "split_ramified_places": [str(p) for p in split_ramified_places(a, b, m)] if not is_rational_square(m) else [],
    }
    return SymbolResult(query=query, value=value, witness=witness)


def symbol(a, b, degree: int = 2, base: Optional[BaseField] = None, search_bound: int = 20,
           seed: Optional[int] = None) -> SymbolResult:
    query = SymbolQuery(degree=degree, a=a, b=b, base=base or (BaseField.q_omega() if degree == 3 else BaseField.rationals()))
    return evaluate(query, search_bound=search_bound, seed=seed)


def describe_places(places: Sequence[Place]) -> str:
    return ", ".join(str(p) for p in places) or "none"
