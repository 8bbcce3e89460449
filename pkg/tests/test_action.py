import random

import pytest

from src.models.action import ActionSpec, GeneratorSpec, build_action, is_invariant, kernel_H
from src.models.glz import MINUS_I, ConjugacyLabel, IntMatrix2, classify
from src.models.ratfunc import TowerGenerator, TowerSpec
from src.utils.error_handling import CoefficientOutsideBaseField, RelationViolation, ZeroCoefficient

SQRT_A = TowerGenerator.sqrt("sqrt_a", "a")


def c4_spec(a="2", c="3") -> ActionSpec:
    return ActionSpec(
        tower=TowerSpec.of(SQRT_A),
        generators=[GeneratorSpec(name="sigma", coefficients=("1", "c"), field_images={"sqrt_a": "-sqrt_a"})],
        constants={"a": a, "c": c},
    )


def test_c4_action_closes_to_order_four():
    action = build_action(c4_spec(), coefficients_in_k=True)
    assert action.order == 4
    label, _ = classify(action.group)
    assert label is ConjugacyLabel.C4
    F = action.field
    assert action.apply("sigma", F.parse("x")) == F.parse("y")
    assert action.apply("sigma", F.parse("y")) == F.parse("c/x")
    assert action.apply(MINUS_I, F.parse("x")) == F.parse("3/x")


def test_kernel_of_c4_action_is_sigma_squared():
    report = kernel_H(build_action(c4_spec()))
    assert report.H.order == 2
    assert MINUS_I in report.H
    assert report.quotient_order == 2


def test_invariants_of_inversion():
    spec = ActionSpec(
        tower=TowerSpec.of(SQRT_A),
        generators=[GeneratorSpec(name="-I", coefficients=("b", "c"), field_images={"sqrt_a": "-sqrt_a"})],
        constants={"a": "5", "b": "2", "c": "-7"},
    )
    action = build_action(spec, coefficients_in_k=True)
    F = action.field
    assert is_invariant(F.parse("x + b/x"), action)
    assert is_invariant(F.parse("(x - b/x)/sqrt_a"), action)
    assert not is_invariant(F.parse("x - b/x"), action)
    assert kernel_H(action).H.order == 1


def test_coefficient_breaking_the_group_law():
    spec = ActionSpec(generators=[GeneratorSpec(name="lambda", coefficients=("2", "1"))])
    with pytest.raises(RelationViolation):
        build_action(spec)


def test_zero_coefficient():
    spec = ActionSpec(generators=[GeneratorSpec(name="tau", coefficients=("0", "1"))])
    with pytest.raises(ZeroCoefficient):
        build_action(spec)


def test_coefficients_outside_k_rejected_only_on_request():
    spec = ActionSpec(
        tower=TowerSpec.of(SQRT_A),
        generators=[GeneratorSpec(name="tau", coefficients=("sqrt_a", "-1/sqrt_a"),
                                  field_images={"sqrt_a": "-sqrt_a"})],
        constants={"a": "3"},
    )
    action = build_action(spec)
    assert action.order == 2
    with pytest.raises(CoefficientOutsideBaseField):
        build_action(spec, coefficients_in_k=True)


def test_generator_given_by_entries():
    spec = ActionSpec(generators=[GeneratorSpec(name="g", matrix=[0, 1, 1, 0], coefficients=("2", "1/2"))])
    action = build_action(spec)
    F = action.field
    assert action.apply("g", F.parse("x")) == F.parse("2*y")
    assert action.apply("g", F.parse("y")) == F.parse("x/2")


def random_function(rng, field):
    coefficients = ["-2", "-1", "1", "2", "1/3"]
    monomials = ["1", "x", "y", "sqrt_a", "x*y", "sqrt_a*y", "x^2"]

    def poly():
        return " + ".join(f"({rng.choice(coefficients)})*{rng.choice(monomials)}" for _ in range(rng.randint(1, 3)))

    return field.parse(f"({poly()})/(y^3 + {poly()})")


def test_action_law_on_random_functions():
    rng = random.Random(3)
    spec = ActionSpec(
        tower=TowerSpec.of(SQRT_A),
        generators=[
            GeneratorSpec(name="sigma", coefficients=("1", "c"), field_images={"sqrt_a": "-sqrt_a"}),
            GeneratorSpec(name="tau", coefficients=("1", "1")),
        ],
        constants={"a": "2", "c": "3"},
    )
    action = build_action(spec, coefficients_in_k=True)
    assert action.order == 8
    elements = list(action.substitutions)
    for _ in range(50):
        f = random_function(rng, action.field)
        g, h = rng.choice(elements), rng.choice(elements)
        assert action.apply(g @ h, f) == action.apply(g, action.apply(h, f))
        assert action.apply(IntMatrix2(1, 0, 0, 1), f) == f
