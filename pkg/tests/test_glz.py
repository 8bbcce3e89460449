import random

import numpy as np
import pytest

from src.models.glz import (
    IDENTITY,
    LAMBDA,
    MINUS_I,
    NORMAL_SUBGROUP_TABLE,
    RHO,
    SIGMA,
    TAU,
    ConjugacyLabel,
    IntMatrix2,
    canonical_selector,
    classify,
    close_group,
    find_normal_subgroup,
    invariant_form,
    normal_subgroups,
    parse_word,
    representative,
    unimodular_box,
)
from src.utils.error_handling import InfiniteGroup, InvalidInstance, NotUnimodular

EXPECTED_ORDERS = {
    "C1": 1, "C2_1": 2, "C2_2": 2, "C2_3": 2, "C3": 3, "C4": 4, "C6": 6,
    "V4_1": 4, "V4_2": 4, "S3_1": 6, "S3_2": 6, "D4": 8, "D6": 12,
}


def test_named_matrices():
    assert SIGMA @ SIGMA == MINUS_I
    assert RHO @ RHO @ RHO == MINUS_I
    assert TAU @ TAU == IDENTITY
    assert LAMBDA.det == -1
    # sigma: x -> y, y -> 1/x
    assert SIGMA.column(0) == (0, 1)
    assert SIGMA.column(1) == (-1, 0)


def test_parse_word():
    assert parse_word("-I") == MINUS_I
    assert parse_word("rho^2") == RHO @ RHO
    assert parse_word("tau*sigma") == TAU @ SIGMA
    assert parse_word("-lambda") == -LAMBDA
    assert parse_word("−τ") == -TAU
    with pytest.raises(InvalidInstance):
        parse_word("kappa")


def test_canonical_selector():
    assert canonical_selector("{1}") == "1"
    assert canonical_selector("<-I, tau>") == "-I,tau"
    assert canonical_selector("⟨σ⟩") == "sigma"


def test_not_unimodular():
    with pytest.raises(NotUnimodular):
        IntMatrix2(2, 0, 0, 1)


def test_infinite_group_detected():
    with pytest.raises(InfiniteGroup):
        close_group([IntMatrix2(1, 1, 0, 1)])


@pytest.mark.parametrize("label", list(ConjugacyLabel))
def test_representative_orders(label):
    assert representative(label).order == EXPECTED_ORDERS[label.value]


@pytest.mark.parametrize("label", list(ConjugacyLabel))
def test_representatives_classify_to_themselves(label):
    group = representative(label)
    found, p = classify(group)
    assert found is label
    assert p == IDENTITY


def _check_random_conjugates(count):
    rng = random.Random(2024)
    box = [m for m in unimodular_box(3)]
    for _ in range(count):
        label = rng.choice(list(ConjugacyLabel))
        q = rng.choice(box)
        conjugated = representative(label).conjugate(q)
        found, p = classify(conjugated)
        assert found is label
        assert conjugated.conjugate(p).element_set() == representative(label).element_set()


def test_random_conjugates_are_recognized():
    _check_random_conjugates(100)


@pytest.mark.slow
def test_many_random_conjugates_are_recognized():
    _check_random_conjugates(500)


def test_normal_subgroup_table_counts():
    counts = {label.value: len(entries) for label, entries in NORMAL_SUBGROUP_TABLE.items()}
    assert counts["C4"] == 3
    assert counts["C6"] == 4
    assert counts["V4_1"] == counts["V4_2"] == 5
    assert counts["D4"] == 6
    assert counts["D6"] == 7
    assert counts["S3_1"] == counts["S3_2"] == 3


@pytest.mark.parametrize("label", list(ConjugacyLabel))
def test_normal_subgroups_are_normal(label):
    group = representative(label)
    for H in normal_subgroups(label):
        assert H.is_subgroup_of(group)
        assert H.is_normal_in(group)


def test_find_normal_subgroup_accepts_other_words():
    H = find_normal_subgroup(ConjugacyLabel.D4, "<-I, sigma*tau>")
    assert H.selector == "-I,tau*sigma"
    assert find_normal_subgroup(ConjugacyLabel.C4, "-I").selector == "sigma^2"


def test_find_normal_subgroup_rejects_non_normal():
    # <tau> is a subgroup of D4 but not normal
    with pytest.raises(InvalidInstance):
        find_normal_subgroup(ConjugacyLabel.D4, "tau")
    with pytest.raises(InvalidInstance):
        find_normal_subgroup(ConjugacyLabel.C3, "sigma")


@pytest.mark.parametrize("label", list(ConjugacyLabel))
def test_invariant_form(label):
    group = representative(label)
    form = invariant_form(group)
    assert form[0, 0] > 0 and round(np.linalg.det(form)) > 0
    for g in group.elements:
        a = g.as_array()
        assert np.array_equal(a.T @ form @ a, form)
