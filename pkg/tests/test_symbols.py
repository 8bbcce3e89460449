import random

import pytest
from sympy import Rational

from src.models.schemas import BaseField, SymbolQuery, Tri
from src.utils.error_handling import UnsupportedSymbolBase
from src.utils.symbol_service import (
    INFINITY,
    conic_point,
    cubefree_core,
    cubic_symbol,
    cubic_symbol_detail,
    evaluate,
    hilbert_local,
    hilbert_Q,
    hilbert_quadext,
    is_rational_cube,
    is_rational_square,
    norm_solution,
    point_on_conic,
    product_formula_holds,
    ramified_places,
    rational_sqrt,
    square_class,
    squarefree_core,
    symbol,
)


def test_square_classes():
    assert square_class("3/4") == 12
    assert squarefree_core("3/4") == 3
    assert squarefree_core(-8) == -2
    assert is_rational_square("9/4")
    assert not is_rational_square(-4)
    assert not is_rational_square(2)
    assert rational_sqrt("9/4") == Rational(3, 2)
    assert rational_sqrt(3) is None


def test_cube_classes():
    assert cubefree_core(16) == 2
    assert cubefree_core("1/2") == 4
    assert is_rational_cube("-27/8")
    assert not is_rational_cube(9)


def test_conic_point_for_two_and_seven():
    point = conic_point(2, 7)
    assert point.as_list() == [3, 1, 1]
    assert point_on_conic(2, 7, point)


@pytest.mark.parametrize("a, b, expected", [
    (-1, -1, Tri.NONZERO),
    (2, -1, Tri.ZERO),
    (2, 7, Tri.ZERO),
    (-1, 3, Tri.NONZERO),
    ("1/4", -5, Tri.ZERO),
    (3, 5, Tri.NONZERO),
])
def test_hilbert_over_Q(a, b, expected):
    assert hilbert_Q(a, b) is expected


def test_hamilton_quaternions_ramify_at_two_and_infinity():
    assert ramified_places(-1, -1) == [2, INFINITY]
    assert hilbert_local(-1, -1, INFINITY) == -1
    assert hilbert_local(-1, -1, 2) == -1
    assert hilbert_local(-1, 3, 3) == -1


def test_product_formula_on_random_pairs():
    rng = random.Random(7)
    values = [n for n in range(-10 ** 4, 10 ** 4 + 1) if n]
    for _ in range(1000):
        a, b = rng.choice(values), rng.choice(values)
        assert product_formula_holds(a, b)


@pytest.mark.parametrize("a", [n for n in range(-50, 51) if n not in (0, 1)] + ["2/3", "-7/4"])
def test_steinberg_relations(a):
    a = Rational(a)
    assert hilbert_Q(a, 1 - a) is Tri.ZERO
    assert hilbert_Q(a, -a) is Tri.ZERO


def _oracle_agrees(bound):
    values = [n for n in range(-bound, bound + 1) if n]
    for a in values:
        for b in values:
            point = conic_point(a, b)
            if hilbert_Q(a, b) is Tri.ZERO:
                assert point is not None, (a, b)
                assert point_on_conic(a, b, point)
            else:
                assert point is None, (a, b)


def test_oracle_agrees_with_local_symbols():
    _oracle_agrees(15)


@pytest.mark.slow
def test_oracle_agrees_on_the_full_box():
    _oracle_agrees(30)


def test_norm_solution():
    a1, a2 = norm_solution(2, 7)
    assert a1 ** 2 - 2 * a2 ** 2 == 7
    a1, a2 = norm_solution(4, 5)
    assert a1 ** 2 - 4 * a2 ** 2 == 5
    assert norm_solution(-1, 3) is None


def test_quadratic_extension():
    # Q(i) splits the Hamilton quaternions, Q(sqrt 2) does not
    assert hilbert_quadext(-1, -1, -1) is Tri.ZERO
    assert hilbert_quadext(-1, -1, 2) is Tri.NONZERO
    assert hilbert_quadext(-1, -1, -7) is Tri.NONZERO
    assert hilbert_quadext(-1, -1, 4) is Tri.NONZERO
    assert hilbert_quadext(2, 7, 3) is Tri.ZERO


def test_degree_two_over_q_omega():
    result = symbol(-1, -1, degree=2, base=BaseField.q_omega())
    assert result.value is Tri.ZERO


@pytest.mark.parametrize("a", [2, 3, 5, 7])
def test_cubic_symbol_of_a_and_minus_a(a):
    assert cubic_symbol(a, -a) is Tri.ZERO


def test_cubic_symbol_values():
    assert cubic_symbol(2, 3) is Tri.ZERO
    assert cubic_symbol(8, 5) is Tri.ZERO
    value, witness = cubic_symbol_detail(2, 7)
    assert value is Tri.NONZERO
    assert witness["tame_prime"] == 7


def test_cubic_symbol_needs_q_omega():
    with pytest.raises(UnsupportedSymbolBase):
        symbol(2, 3, degree=3, base=BaseField.rationals())
    with pytest.raises(UnsupportedSymbolBase):
        evaluate(SymbolQuery(degree=3, a=2, b=3, base=BaseField.quad(5)))


def test_evaluate_reports_a_conic_point():
    result = symbol(2, 7)
    assert result.value is Tri.ZERO
    assert result.witness["ramified_places"] == []
    assert result.witness["conic_point"] == [3, 1, 1]

    result = symbol(-1, -1)
    assert result.value is Tri.NONZERO
    assert result.witness["ramified_places"] == ["2", "inf"]


def test_local_tables_are_cached(fresh_caches):
    hilbert_Q(-1, 7)
    hilbert_Q(-1, 7)
    stats = fresh_caches.get_all_stats()["hilbert_local_table"]
    assert stats["hits"] >= 1
    assert stats["size"] >= 1


def test_cubic_symbol_never_flips_when_the_bound_grows():
    rng = random.Random(11)
    for _ in range(100):
        a, c = rng.randint(2, 30), rng.choice([n for n in range(-30, 31) if n])
        coarse = cubic_symbol(a, c, search_bound=1)
        fine = cubic_symbol(a, c, search_bound=3)
        if coarse is not Tri.UNDECIDED:
            assert fine is coarse, (a, c)


PLACES = [INFINITY, 2, 3, 5, 7, 11, 13]


def test_local_symbols_are_bimultiplicative():
    rng = random.Random(19)
    values = [n for n in range(-60, 61) if n]
    for _ in range(300):
        a, a2, b = rng.choice(values), rng.choice(values), rng.choice(values)
        for place in PLACES:
            assert hilbert_local(a * a2, b, place) == hilbert_local(a, b, place) * hilbert_local(a2, b, place)
            assert hilbert_local(b, a * a2, place) == hilbert_local(b, a, place) * hilbert_local(b, a2, place)
            assert hilbert_local(a, b, place) == hilbert_local(b, a, place)


def test_symbols_only_see_square_classes():
    rng = random.Random(23)
    values = [n for n in range(-40, 41) if n]
    for _ in range(100):
        a, b = rng.choice(values), rng.choice(values)
        s, t = Rational(rng.randint(1, 9), rng.randint(1, 9)), Rational(rng.randint(1, 9), rng.randint(1, 9))
        scaled_a, scaled_b = a * s ** 2, b * t ** 2
        assert hilbert_Q(scaled_a, scaled_b) is hilbert_Q(a, b)
        assert ramified_places(scaled_a, scaled_b) == ramified_places(a, b)
        for place in PLACES:
            assert hilbert_local(scaled_a, scaled_b, place) == hilbert_local(a, b, place)
