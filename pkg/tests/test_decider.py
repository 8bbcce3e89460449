import random

import pytest
from sympy import Rational

from src.models.glz import NORMAL_SUBGROUP_TABLE, ConjugacyLabel, find_normal_subgroup, representative
from src.models.schemas import FieldData, Instance, VerdictStatus
from src.utils.decision_service import (
    HAJJA,
    NOT_UNIRATIONAL,
    PURELY_MONOMIAL,
    certificate_for,
    decide,
    decide_batch,
    decide_dim1,
    dispatch_row,
    normalize,
    sign_options,
)
from src.utils.env_setup import Settings
from src.utils.error_handling import CertificateUnavailable, InvalidInstance
from src.utils.symbol_service import squarefree_core

RATIONAL = VerdictStatus.RATIONAL
NOT_RATIONAL = VerdictStatus.NOT_RATIONAL
UNDECIDED = VerdictStatus.UNDECIDED


def instance(group, H="1", **fields) -> Instance:
    return Instance(group=group, H=H, **fields)


# Spot suite

def test_obstructed_c2_2(settings):
    verdict = decide(instance("C2_2", epsilon=1, params={"a": -1, "b": -1}), settings)
    assert verdict.status is NOT_RATIONAL
    assert verdict.clause == "C2_2/trivial-kernel"
    assert [s.query.describe() for s in verdict.obstructions] == ["(-1,-1)_{2,Q}"]
    assert NOT_UNIRATIONAL in verdict.notes
    assert verdict.exit_code == 1


@pytest.mark.parametrize("b", [None, 1, 5, "-2/3"])
def test_c2_3_is_always_rational(settings, b):
    params = {"b": b} if b is not None else {}
    verdict = decide(instance("C2_3", params=params), settings)
    assert verdict.status is RATIONAL
    assert PURELY_MONOMIAL in verdict.certificate.anchor
    assert verdict.normalized["params"].get("b", "1") == "1"


def test_c4_sigma_squared(settings):
    verdict = decide(instance("C4", "sigma^2", params={"a": 2, "c": 1}), settings)
    assert verdict.status is RATIONAL
    assert verdict.clause == "C4/kernel-sigma^2"
    assert verdict.certificate.kind == "explicit_generators"
    assert verdict.certificate.invariance_checked
    assert verdict.certificate.independence_checked


@pytest.mark.parametrize("H", ["1", "rho^3", "rho^2", "rho"])
def test_c6_is_always_rational(settings, H):
    verdict = decide(instance("C6", H, params={"b": 3, "c": 5}), settings)
    assert verdict.status is RATIONAL
    assert verdict.certificate is not None


@pytest.mark.parametrize("H", list(NORMAL_SUBGROUP_TABLE[ConjugacyLabel.D6]))
def test_d6_is_always_rational(settings, H):
    verdict = decide(instance("D6", H), settings)
    assert verdict.status is RATIONAL


def test_dim1(settings):
    verdict = decide_dim1(2, -1, settings)
    assert verdict.status is RATIONAL
    assert verdict.clause == "dim1/conic"
    assert "[1, 1, 1]" in verdict.certificate.anchor

    verdict = decide_dim1(-1, -1, settings)
    assert verdict.status is NOT_RATIONAL

    assert decide_dim1(4, 3, settings).clause == "dim1/square-a"
    with pytest.raises(InvalidInstance):
        decide_dim1(2, 0, settings)


# Further clauses

def test_h_equals_g_is_rational_by_hajja(settings):
    verdict = decide(instance("C4", "sigma", params={"c": 3}), settings)
    assert verdict.status is RATIONAL
    assert verdict.clause == "C4/H-equals-G"
    assert verdict.certificate.anchor == HAJJA


def test_c2_1(settings):
    assert decide(instance("C2_1", params={"a": -1, "b": 2, "c": 5}), settings).status is RATIONAL
    verdict = decide(instance("C2_1", params={"a": -1, "b": 2, "c": 3}), settings)
    assert verdict.status is NOT_RATIONAL
    assert [s.query.describe() for s in verdict.obstructions] == ["(-1,3)_{2,Q}"]


def test_explicit_certificate_for_c2_2(settings):
    verdict = decide(instance("C2_2", epsilon=1, params={"a": 2, "b": 7}), settings)
    assert verdict.status is RATIONAL
    certificate = verdict.certificate
    assert certificate.kind == "explicit_generators"
    assert certificate.u == "x"
    assert certificate.invariance_checked and certificate.independence_checked


def test_certificate_only_for_rational_verdicts(settings):
    obstructed = instance("C2_2", epsilon=1, params={"a": -1, "b": -1})
    verdict = decide(obstructed, settings)
    with pytest.raises(ValueError):
        certificate_for(obstructed, verdict, settings)


def test_c3_with_omega_in_k(settings):
    c3 = instance("C3", base="Q(omega)", params={"c": 7}, field=FieldData(kind="pure_cubic", a=2))
    verdict = decide(c3, settings)
    assert verdict.clause == "C3/omega-in-k"
    assert verdict.status is NOT_RATIONAL


def test_c3_outside_supported_bases_is_undecided(settings):
    verdict = decide(instance("C3", params={"c": 2}), settings)
    assert verdict.status is UNDECIDED
    assert verdict.clause == "C3/omega-outside-k/cube-root-of-c-outside-K"
    assert verdict.exit_code == 2
    assert decide(instance("C3", params={"c": 8}), settings).status is RATIONAL


def test_s3_1_with_cube_c(settings):
    verdict = decide(instance("S3_1", params={"c": 8}), settings)
    assert verdict.status is RATIONAL
    assert verdict.clause == "S3_1/trivial-kernel/cube-root-of-c-in-k"


def test_v4_1_lambda_uses_epsilon1(settings):
    obstructed = instance("V4_1", "lambda", epsilon1=1, params={"a": 3, "c": -1, "d": 2})
    verdict = decide(obstructed, settings)
    assert verdict.clause == "V4_1/kernel-lambda/epsilon1=1"
    assert verdict.status is NOT_RATIONAL


def test_d4_minus_I_tau(settings):
    verdict = decide(instance("D4", "-I,tau", epsilon=1, params={"a": 2, "c": 7}), settings)
    assert verdict.clause == "D4/kernel-minus-I-tau/epsilon=1"
    assert verdict.status is RATIONAL
    assert verdict.certificate is not None


# Table and normalization

def test_every_proper_normal_subgroup_has_a_row():
    for label, selectors in NORMAL_SUBGROUP_TABLE.items():
        order = representative(label).order
        for selector in selectors:
            if find_normal_subgroup(label, selector).order == order:
                continue
            for sign in sign_options(label, selector):
                row = dispatch_row(label, selector, sign)
                assert row.clause.startswith(label.value + "/")


def test_normalization_is_idempotent():
    samples = [
        instance("C4", "sigma^2", params={"a": 2, "b": 3, "c": 5}),
        instance("C3", params={"b": 2, "c": 3}),
        instance("V4_1", "-I", epsilon1=-1, epsilon2=-1, params={"a": 3, "c": 2, "d": 5}),
        instance("V4_2", params={"a": 2, "b": 3, "c": 20, "d": 5, "e": 2}),
        instance("D6", params={"b": 2, "c": "1/4", "d": 3}),
    ]
    for sample in samples:
        once = normalize(sample)
        twice = normalize(once)
        assert twice.params == once.params
        assert twice.normalization == once.normalization
        assert (twice.epsilon1, twice.epsilon2) == (once.epsilon1, once.epsilon2)


def test_scaling_does_not_change_the_verdict(settings):
    scaled = decide(instance("C4", "sigma^2", params={"a": 2, "b": 2, "c": 3}), settings)
    plain = decide(instance("C4", "sigma^2", params={"a": 2, "c": 6}), settings)
    assert (scaled.status, scaled.clause) == (plain.status, plain.clause)
    assert scaled.normalized["params"]["c"] == "6"


def test_verdict_does_not_depend_on_the_seed():
    sample = instance("C2_2", epsilon=1, params={"a": 2, "b": 7})
    verdicts = [decide(sample, Settings(seed=seed)) for seed in (0, 1, 99)]
    assert {(v.status, v.clause) for v in verdicts} == {(RATIONAL, "C2_2/trivial-kernel")}


def test_norm_equation_criterion_ignores_which_solution_is_found():
    checked = 0
    for b in (1, 2, 3, 5):
        for c in [n for n in range(-12, 13) if n]:
            sample = instance("C4", params={"c": c}, field=FieldData(a=1, b=b))
            verdicts = [decide(sample, Settings(seed=seed)) for seed in (0, 1, 2, 3)]
            if not verdicts[0].clause.endswith("sqrt-c-outside-K"):
                continue
            checked += 1
            assert len({v.status for v in verdicts}) == 1, (b, c)
    assert checked >= 20


# Invalid instances

def test_missing_sign(settings):
    with pytest.raises(InvalidInstance) as info:
        decide(instance("D4", "-I", params={"a": 2, "b": 3, "c": 5}), settings)
    assert "epsilon" in info.value.field_errors


def test_non_normal_subgroup(settings):
    with pytest.raises(InvalidInstance):
        decide(instance("D4", "tau"), settings)


def test_missing_parameter(settings):
    with pytest.raises(InvalidInstance) as info:
        decide(instance("C2_1", params={"a": 2, "b": 3}), settings)
    assert info.value.field_errors == {"c": "required"}


def test_square_radicand(settings):
    with pytest.raises(InvalidInstance):
        decide(instance("C2_2", epsilon=1, params={"a": 4, "b": 3}), settings)


def test_batch_keeps_order_and_returns_errors(settings):
    batch = [
        instance("C2_2", epsilon=1, params={"a": -1, "b": -1}),
        instance("C2_3"),
        instance("D4", "tau"),
        instance("S3_1", params={"c": 8}),
    ]
    results = decide_batch(batch, settings)
    assert results[0].status is NOT_RATIONAL
    assert results[1].status is RATIONAL
    assert isinstance(results[2], InvalidInstance)
    assert results[3].status is RATIONAL


# Explicit certificates

@pytest.mark.parametrize("sample", [
    instance("V4_1", "-I", params={"a": 2, "c": 1, "d": 1}),
    instance("V4_2", params={"a": 2, "b": 3, "c": 1}),
    instance("V4_2", params={"a": -2, "b": -1, "c": -1}),
    instance("D4", "-I", epsilon=1, params={"a": 2, "b": -1, "c": 1}),
    instance("D4", "-I", epsilon=-1, params={"a": 2, "b": -1, "c": -1}),
    instance("D4", "-I,tau", epsilon=1, params={"a": 2, "c": 7}),
    instance("D4", "-I,tau", epsilon=-1, params={"a": 2, "c": -7}),
])
def test_conic_bundle_clauses_get_explicit_generators(settings, sample):
    verdict = decide(sample, settings)
    assert verdict.status is RATIONAL
    certificate = verdict.certificate
    assert certificate.kind == "explicit_generators"
    assert certificate.invariance_checked and certificate.independence_checked
    assert certificate_for(sample, verdict, settings) == certificate


def test_missing_construction_is_an_internal_error(settings):
    verdict = decide(instance("C3", params={"c": 8}), settings)
    assert verdict.certificate.kind == "cited_theorem"
    verdict.clause = "C3/no-such-clause"
    verdict.certificate = None
    with pytest.raises(CertificateUnavailable) as info:
        certificate_for(instance("C3", params={"c": 8}), verdict, settings)
    assert info.value.exit_code == 70


# V4_2 and D4 with H = {1}

def test_v4_2_trivial_kernel(settings):
    verdict = decide(instance("V4_2", params={"a": 2, "b": -1, "c": -1}), settings)
    assert verdict.status is NOT_RATIONAL
    assert verdict.clause == "V4_2/trivial-kernel"
    assert [s.describe() for s in verdict.obstructions] == ["(-1,-1)_{2,Q(sqrt(2))}"]

    scaled = decide(instance("V4_2", params={"a": -2, "b": -1, "c": -4, "d": -1, "e": 2}), settings)
    assert scaled.status is RATIONAL
    assert scaled.normalized["params"]["d"] == "-4"

    with pytest.raises(InvalidInstance):
        decide(instance("V4_2", params={"a": 2, "b": 3, "c": 1, "d": 5}), settings)


D4_FIELD = FieldData(a=1, b=2)


@pytest.mark.parametrize("c, location, eps, expected", [
    (1, "sqrt-c-in-k", 1, RATIONAL),
    (1, "sqrt-c-in-k", -1, NOT_RATIONAL),
    (2, "sqrt-c-in-sigma^2-sigma*tau-field", 1, RATIONAL),
    (2, "sqrt-c-in-sigma^2-sigma*tau-field", -1, NOT_RATIONAL),
    (-2, "sqrt-c-in-sigma-field", 1, NOT_RATIONAL),
    (-2, "sqrt-c-in-sigma-field", -1, RATIONAL),
    (-1, "sqrt-c-in-sigma^2-tau-field", 1, NOT_RATIONAL),
    (-1, "sqrt-c-in-sigma^2-tau-field", -1, RATIONAL),
    (3, "sqrt-c-outside-K", 1, NOT_RATIONAL),
    (3, "sqrt-c-outside-K", -1, NOT_RATIONAL),
    (5, "sqrt-c-outside-K", 1, RATIONAL),
])
def test_d4_trivial_kernel(settings, c, location, eps, expected):
    verdict = decide(instance("D4", epsilon=eps, params={"c": c}, field=D4_FIELD), settings)
    assert verdict.clause == f"D4/trivial-kernel/{location}/epsilon={eps}"
    assert verdict.status is expected


def test_d4_norm_criterion_ignores_which_solution_is_found():
    checked = 0
    for a, b in ((1, 2), (1, 3), (1, 5), (3, 2)):
        for eps in (1, -1):
            for c in [n for n in range(-12, 13) if n]:
                sample = instance("D4", epsilon=eps, params={"c": c}, field=FieldData(a=a, b=b))
                verdicts = [decide(sample, Settings(seed=seed)) for seed in (0, 1, 2, 3)]
                if "sqrt-c-outside-K" not in verdicts[0].clause:
                    continue
                checked += 1
                assert len({v.status for v in verdicts}) == 1, (a, b, eps, c)
    assert checked >= 20


# Undecided verdicts

def test_unsupported_symbol_is_reported_as_pending(settings):
    verdict = decide(instance("C3", params={"c": 2}, field=FieldData(kind="cyclic_cubic")), settings)
    assert verdict.status is UNDECIDED
    assert verdict.symbols == []
    [pending] = verdict.pending
    assert pending.symbol == "(alpha, c)_{3,Q(omega)}"
    assert pending.degree == 3
    assert pending.argument == 2
    assert verdict.model_dump(mode="json")["unsupported"][0]["argument"] == "2"


# Normalization on random instances

NONSQUARES = [-7, -6, -5, -3, -2, -1, 2, 3, 5, 6, 7, 10]
SCALARS = [-3, -2, -1, 2, 3, "1/2", "-2/3", "5/4"]


def random_instance(rng, family):
    if family == "C4":
        return instance("C4", "sigma^2", params={"a": rng.choice(NONSQUARES), "b": rng.choice(SCALARS),
                                                 "c": rng.choice(SCALARS)})
    if family == "C3":
        return instance("C3", params={"b": rng.choice(SCALARS), "c": rng.choice(SCALARS)})
    if family == "V4_1":
        a = rng.choice(NONSQUARES)
        b = rng.choice([n for n in NONSQUARES if squarefree_core(a * n) != 1])
        return instance("V4_1", rng.choice(["1", "-I", "lambda", "-lambda"]),
                        epsilon1=rng.choice([1, -1]), epsilon2=rng.choice([1, -1]),
                        params={"a": a, "b": b, "c": rng.choice(SCALARS), "d": rng.choice(SCALARS)})
    a = rng.choice(NONSQUARES)
    b = rng.choice([n for n in NONSQUARES if squarefree_core(a * n) != 1])
    d, e = Rational(rng.choice(SCALARS)), Rational(rng.choice(SCALARS))
    return instance("V4_2", params={"a": a, "b": b, "c": e * e * d, "d": d, "e": e})


def _outcome(inst, settings):
    try:
        verdict = decide(inst, settings)
    except InvalidInstance as e:
        return e.error_code
    return verdict.status, verdict.clause


def _check_normalization(family, count, settings, compare_verdicts):
    rng = random.Random(31)
    for _ in range(count):
        raw = random_instance(rng, family)
        once = normalize(raw)
        assert normalize(once).params == once.params
        params = {k: Rational(v) for k, v in raw.params.items()}
        if family == "C4":
            assert once.params["b"] == 1 and once.params["c"] == params["b"] * params["c"]
        elif family == "C3":
            assert once.params["b"] == 1 and once.params["c"] == params["b"] ** 2 * params["c"]
        elif family == "V4_1":
            assert once.params["c"] in (params["c"], params["a"] * params["c"])
            assert once.params["d"] in (params["d"], params["a"] * params["d"])
        else:
            assert once.params["e"] == 1 and once.params["d"] == once.params["c"]
        if compare_verdicts:
            assert _outcome(raw, settings) == _outcome(once, settings)


@pytest.mark.parametrize("family", ["C4", "C3", "V4_1", "V4_2"])
def test_normalization_keeps_the_invariant_quantities(settings, family):
    _check_normalization(family, 40, settings, compare_verdicts=False)


@pytest.mark.parametrize("family", ["C4", "C3", "V4_1", "V4_2"])
def test_normalization_keeps_the_verdict(settings, family):
    _check_normalization(family, 15, settings, compare_verdicts=True)


@pytest.mark.slow
@pytest.mark.parametrize("family", ["C4", "C3", "V4_1", "V4_2"])
def test_normalization_is_sound_on_200_instances(settings, family):
    _check_normalization(family, 200, settings, compare_verdicts=True)
