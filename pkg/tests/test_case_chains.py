import pytest

from src.models.case_chains import (
    CASES,
    UNSCALED_VARIANTS,
    case_chain,
    chain_definition,
    list_cases,
    verify_all,
    verify_case,
)
from src.models.glz import NORMAL_SUBGROUP_TABLE, ConjugacyLabel, find_normal_subgroup
from src.utils.error_handling import UnknownCase, VerificationFailure


def test_registry_is_not_empty_and_tags_are_unique():
    tags = list_cases()
    assert len(tags) == len(set(tags)) > 40
    assert not set(tags) & set(UNSCALED_VARIANTS)


def test_every_chain_names_a_normal_subgroup_of_its_group():
    for entry in CASES.values():
        label = ConjugacyLabel(entry.group)
        H = find_normal_subgroup(label, entry.H)
        assert H.selector in NORMAL_SUBGROUP_TABLE[label]


def test_groups_with_a_nontrivial_criterion_have_chains():
    groups = {entry.group for entry in CASES.values()}
    assert {"C2_1", "C2_2", "C3", "C4", "V4_1", "V4_2", "S3_1", "D4"} <= groups


def test_filter_by_group():
    d4 = list_cases("D4")
    assert d4 and all(tag.startswith("D4/") for tag in d4)
    assert len([t for t in d4 if t.startswith("D4/trivial-kernel/")]) == 10


def test_unknown_tag():
    with pytest.raises(UnknownCase):
        chain_definition("C5/nowhere")


@pytest.mark.parametrize("tag", ["C2_1/trivial-kernel", "C2_2/epsilon=-1", "C4/kernel-sigma^2",
                                 "V4_1/trivial-kernel", "V4_2/kernel-tau"])
def test_small_chains(tag):
    chain = verify_case(tag)
    assert chain.passed, [f.identity for f in chain.failures]
    assert chain.identity_count > 0


def test_specialized_parameters():
    chain = case_chain("C2_1/trivial-kernel", {"a": 2, "b": 3, "c": -5})
    assert chain.passed


@pytest.mark.parametrize("tag", sorted(UNSCALED_VARIANTS))
def test_unscaled_formulas_fail(tag):
    chain = case_chain(tag, strict=False)
    assert not chain.passed
    with pytest.raises(VerificationFailure):
        case_chain(tag, strict=True)


@pytest.mark.slow
def test_all_registered_chains_verify():
    chains = verify_all()
    failed = {c.tag: [f.identity for f in c.failures] for c in chains if not c.passed}
    assert not failed
    assert len(chains) == len(list_cases())
    assert sum(c.identity_count for c in chains) >= len(chains)
