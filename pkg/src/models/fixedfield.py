"""
Explicit fixed-field generators and the change-of-variables chain verifier.

A chain starts from a level (a function field together with the action of
each group generator) and moves to new levels by

* change steps: new symbols defined in terms of the old ones, with the
  claimed action of every generator on the new symbols;
* rebase steps: a new coefficient tower, with the old tower generators
  lifted into it;
* check steps: an equality, or the image of an expression under a word in
  the generators.

Every claimed image is verified exactly: for a change step the identity
g_old(def(w)) == def(g_new(w)) is checked for every new symbol w.
"""

import logging
from dataclasses import dataclass, field as dataclass_field
from typing import Dict, List, Literal, Mapping, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, Field

from src.models.ratfunc import (
    FunctionField,
    RatFunc,
    RelationKind,
    Substitution,
    TowerGenerator,
    TowerSpec,
    compose,
    jacobian_independent,
)
from src.utils.error_handling import (
    DegenerateParameters,
    MissingRootOfUnity,
    RationalityError,
    VerificationFailure,
)
from src.utils.expression_parser import parse_rational

logger = logging.getLogger(__name__)

ImageText = Union[str, List[str]]


# Generator pairs

@dataclass
class GeneratorPair:
    """Two invariants (or eigenvectors) together with the checks they passed."""
    u: RatFunc
    v: RatFunc
    verified_invariant_under: str
    independent: bool
    field: FunctionField
    checks: Dict[str, bool] = dataclass_field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.independent and all(self.checks.values())

    def to_dict(self) -> Dict:
        return {
            "u": str(self.u),
            "v": str(self.v),
            "invariant_under": self.verified_invariant_under,
            "independent": self.independent,
            "checks": self.checks,
        }


def _parameter_field(names: Sequence[str], values: Mapping[str, object],
                     extra: Sequence[TowerGenerator] = ()) -> FunctionField:
    """k(x, y) with symbolic parameters, or numeric ones when given."""
    constants = {n: parse_rational(values[n]) for n in names if values.get(n) is not None}
    free = [TowerGenerator.free(n) for n in names if n not in constants]
    return FunctionField(TowerSpec.of(*free, *extra), constants=constants)


def inversion_pair_basis(a=None) -> GeneratorPair:
    """
    s = (xy+a)/(x+y), t = (xy-a)/(x-y) generate the invariants of
    x -> a/x, y -> a/y.
    """
    if a is not None and parse_rational(a) == 0:
        raise DegenerateParameters("a must be nonzero")
    F = _parameter_field(["a"], {"a": a})
    sigma = Substitution(F, F, {"x": "a/x", "y": "a/y"})
    s = F.parse("(x*y + a)/(x + y)")
    t = F.parse("(x*y - a)/(x - y)")
    checks = {"s invariant": sigma(s) == s, "t invariant": sigma(t) == t}
    return GeneratorPair(s, t, "-I: x -> a/x, y -> a/y", jacobian_independent(s, t), F, checks)


def twisted_inversion_basis(a=None, c=None, d=None) -> GeneratorPair:
    """
    Invariants of x -> a/x, y -> b/y with b = c(x + a/x) + d.
    """
    values = {"a": a, "c": c, "d": d}
    if a is not None and parse_rational(a) == 0:
        raise DegenerateParameters("a must be nonzero")
    if c is not None and d is not None and parse_rational(c) == 0 and parse_rational(d) == 0:
        raise DegenerateParameters("(c, d) must not both vanish")
    F = _parameter_field(["a", "c", "d"], values)
    b = F.parse("c*(x + a/x) + d")
    x, y = F.symbol("x"), F.symbol("y")
    sigma = Substitution(F, F, {"x": F.parse("a/x"), "y": b / y})
    denominator = x * y - F.symbol("a") * b / (x * y)
    u = ((x - F.symbol("a") / x) / denominator).tidy()
    v = ((y - b / y) / denominator).tidy()
    checks = {
        "involution": sigma(sigma(x)) == x and sigma(sigma(y)) == y,
        "u invariant": sigma(u) == u,
        "v invariant": sigma(v) == v,
    }
    return GeneratorPair(u, v, "-I: x -> a/x, y -> b/y, b = c(x + a/x) + d", jacobian_independent(u, v), F, checks)


THREE_CYCLE_U = "y*(y^3*x^3 + b*x^3 - 3*b*y*x^2 + b^2)/(y^2*x^4 - y^3*x^3 + y^4*x^2 - b*y*x^2 - b*y^2*x + b^2)"
THREE_CYCLE_V = "x*(x^3*y^3 + b*y^3 - 3*b*x*y^2 + b^2)/(y^2*x^4 - y^3*x^3 + y^4*x^2 - b*y*x^2 - b*y^2*x + b^2)"


def three_cycle_basis(b=None) -> GeneratorPair:
    """Invariants of the 3-cycle x -> y -> b/(xy) -> x."""
    if b is not None and parse_rational(b) == 0:
        raise DegenerateParameters("b must be nonzero")
    F = _parameter_field(["b"], {"b": b})
    sigma = Substitution(F, F, {"x": "y", "y": "b/(x*y)"})
    u, v = F.parse(THREE_CYCLE_U), F.parse(THREE_CYCLE_V)
    sigma2 = compose(sigma, sigma)
    checks = {
        "order 3": compose(sigma, sigma2).is_identity(),
        "u invariant": sigma(u) == u,
        "v invariant": sigma(v) == v,
        "u invariant under square": sigma2(u) == u,
    }
    return GeneratorPair(u, v, "rho^2: x -> y -> b/(xy)", jacobian_independent(u, v), F, checks)


OMEGA_EIGEN_U = "(1 + omega^2*x + omega*x*y)/(1 + x + x*y)"
OMEGA_EIGEN_V = "(1 + omega*x + omega^2*x*y)/(1 + x + x*y)"


def omega_eigenbasis(field: Optional[FunctionField] = None) -> GeneratorPair:
    """
    u, v with sigma(u) = omega u and sigma(v) = omega^-1 v for
    sigma: x -> y -> 1/(xy). Needs omega in the tower.
    """
    F = field or FunctionField(TowerSpec.of(TowerGenerator.omega()))
    if F.omega is None:
        raise MissingRootOfUnity()
    text_u = OMEGA_EIGEN_U.replace("omega", F.omega)
    text_v = OMEGA_EIGEN_V.replace("omega", F.omega)
    sigma = Substitution(F, F, {"x": "y", "y": "1/(x*y)"})
    u, v = F.parse(text_u), F.parse(text_v)
    w = F.symbol(F.omega)
    checks = {
        "u eigenvalue omega": sigma(u) == w * u,
        "v eigenvalue omega^-1": sigma(v) == w * w * v,
        "uv invariant": sigma(u * v) == u * v,
        "u^3 invariant": sigma(u ** 3) == u ** 3,
    }
    return GeneratorPair(u, v, "rho^2: x -> y -> 1/(xy) (eigenvectors)", jacobian_independent(u, v), F, checks)


def conic_bundle_coordinates(f: str = "b", a=None) -> GeneratorPair:
    """
    For sqrt(a) -> -sqrt(a), x -> x, y -> f(x)/y the invariants
    z1 = (y + f/y)/2 and z2 = (y - f/y)/(2 sqrt a) satisfy z1^2 - a z2^2 = f.
    """
    constants = {"a": parse_rational(a)} if a is not None else {}
    gens = [] if constants else [TowerGenerator.free("a")]
    tower = TowerSpec.of(*gens, TowerGenerator.free("b"), TowerGenerator.free("c"),
                         TowerGenerator.sqrt("sqrt_a", "a"))
    F = FunctionField(tower, constants=constants)
    fx = F.parse(f)
    y, r = F.symbol("y"), F.symbol("sqrt_a")
    sigma = Substitution(F, F, {"sqrt_a": "-sqrt_a", "y": fx / y})
    z1 = (y + fx / y) / 2
    z2 = (y - fx / y) / (2 * r)
    checks = {
        "z1 invariant": sigma(z1) == z1,
        "z2 invariant": sigma(z2) == z2,
        "norm relation": z1 * z1 - F.symbol("a") * z2 * z2 == fx,
    }
    return GeneratorPair(z1, z2, "sqrt(a) -> -sqrt(a), y -> f(x)/y", jacobian_independent(z1, F.symbol("x")), F, checks)


# Chain description

class ChainStart(BaseModel):
    """Initial level: tower, variables and the action of each generator.

    products name composite generators; a word [g, h] acts as g(h(f)).
    """
    tower: List[TowerGenerator] = Field(default_factory=list)
    variables: Tuple[str, ...] = ("x", "y")
    aliases: Dict[str, str] = Field(default_factory=dict)
    actions: Dict[str, Dict[str, str]]
    products: Dict[str, List[str]] = Field(default_factory=dict)


class ChangeStep(BaseModel):
    """New symbols in terms of the old level and their claimed images."""
    kind: Literal["change"] = "change"
    label: str
    define: Dict[str, str]
    variables: Tuple[str, ...]
    keep: Optional[List[str]] = None
    tower: List[TowerGenerator] = Field(default_factory=list)
    aliases: Dict[str, str] = Field(default_factory=dict)
    images: Dict[str, Dict[str, ImageText]] = Field(default_factory=dict)
    generators: Optional[List[str]] = None


class RebaseStep(BaseModel):
    """Replace the tower; old generators are expressed in the new one."""
    kind: Literal["rebase"] = "rebase"
    label: str
    tower: List[TowerGenerator]
    lift: Dict[str, str]
    images: Dict[str, Dict[str, ImageText]] = Field(default_factory=dict)
    aliases: Dict[str, str] = Field(default_factory=dict)
    generators: Optional[List[str]] = None


class CheckStep(BaseModel):
    """lhs == rhs at the current level, or word(expression) == expected."""
    kind: Literal["check"] = "check"
    label: str
    lhs: str
    rhs: ImageText
    word: Optional[List[str]] = None


Step = Union[ChangeStep, RebaseStep, CheckStep]


class ChainDefinition(BaseModel):
    tag: str
    title: str
    group: str
    H: str
    start: ChainStart
    steps: List[Step] = Field(default_factory=list)


# Verification

@dataclass
class IdentityResult:
    step: str
    identity: str
    passed: bool
    convention: Optional[str] = None

    def to_dict(self) -> Dict:
        payload = {"step": self.step, "identity": self.identity, "passed": self.passed}
        if self.convention:
            payload["convention"] = self.convention
        return payload


@dataclass
class Level:
    field: FunctionField
    actions: Dict[str, Substitution]


@dataclass
class TransformChain:
    """A verified chain: every identity with its outcome."""
    tag: str
    title: str
    identities: List[IdentityResult]
    final_level: Optional[Level] = None

    @property
    def passed(self) -> bool:
        return all(i.passed for i in self.identities)

    @property
    def identity_count(self) -> int:
        return len(self.identities)

    @property
    def failures(self) -> List[IdentityResult]:
        return [i for i in self.identities if not i.passed]

    def to_dict(self) -> Dict:
        return {
            "tag": self.tag,
            "title": self.title,
            "passed": self.passed,
            "identity_count": self.identity_count,
            "identities": [i.to_dict() for i in self.identities],
        }


def _build_field(tower: Sequence[TowerGenerator], variables: Sequence[str], aliases: Mapping[str, str],
                 params: Mapping[str, object], inherited: Optional[Mapping[str, object]] = None) -> FunctionField:
    """Free generators named in params become numeric constants."""
    constants = dict(inherited or {})
    kept = []
    for gen in tower:
        if gen.kind == RelationKind.FREE and gen.name in params:
            constants[gen.name] = parse_rational(params[gen.name])
        else:
            kept.append(gen)
    return FunctionField(TowerSpec(generators=tuple(kept), variables=tuple(variables)), aliases, constants)


def _candidates(text: ImageText) -> List[str]:
    return [text] if isinstance(text, str) else list(text)


def _carry(field: FunctionField, value: RatFunc) -> RatFunc:
    """Re-read a function of kept symbols in another field."""
    return field.parse(str(value.as_expr()))


class ChainVerifier:
    """
    Runs a chain definition, recording every identity.

    Args:
        params: numeric values for free parameters of the starting level
        strict: raise VerificationFailure on the first failing identity
    """

    def __init__(self, params: Optional[Mapping[str, object]] = None, strict: bool = True):
        self.params = dict(params or {})
        self.strict = strict

    def run(self, chain: ChainDefinition) -> TransformChain:
        logger.info(f"Verifying chain {chain.tag}")
        results: List[IdentityResult] = []
        start = chain.start
        field = _build_field(start.tower, start.variables, start.aliases, self.params)
        actions = {name: Substitution(field, field, images) for name, images in start.actions.items()}
        for name, word in start.products.items():
            action = actions[word[-1]]
            for gen in reversed(word[:-1]):
                action = compose(actions[gen], action)
            actions[name] = action
        level = Level(field, actions)

        for step in chain.steps:
            if isinstance(step, ChangeStep):
                level = self._change(chain.tag, level, step, results)
            elif isinstance(step, RebaseStep):
                level = self._rebase(chain.tag, level, step, results)
            else:
                self._check(chain.tag, level, step, results)

        outcome = TransformChain(chain.tag, chain.title, results, level)
        logger.info(f"Chain {chain.tag}: {sum(r.passed for r in results)}/{len(results)} identities hold")
        return outcome

    # steps

    def _record(self, tag: str, results: List[IdentityResult], result: IdentityResult) -> None:
        results.append(result)
        if not result.passed:
            logger.warning(f"[{tag}] {result.step}: identity failed: {result.identity}")
            if self.strict:
                raise VerificationFailure(tag, result.identity, {"step": result.step})

    def _pick_image(self, field: FunctionField, candidates: List[str], test) -> Tuple[Optional[RatFunc], Optional[str], str]:
        """First candidate image passing test; records which one when not the first."""
        first_error = None
        for index, text in enumerate(candidates):
            try:
                image = field.parse(text)
                if test(image):
                    return image, (text if index else None), text
            except RationalityError as exc:
                first_error = first_error or exc
        if first_error is not None and len(candidates) == 1:
            raise first_error
        return None, None, candidates[0]

    def _change(self, tag: str, old: Level, step: ChangeStep, results: List[IdentityResult]) -> Level:
        keep = step.keep if step.keep is not None else old.field.tower.names
        old_gens = {g.name: g for g in old.field.tower.generators}
        explicit = {g.name: g for g in step.tower}
        new_tower: List[TowerGenerator] = [old_gens[name] for name in keep if name in old_gens]
        for name in step.define:
            if name in step.variables:
                continue
            new_tower.append(explicit.get(name, TowerGenerator.free(name)))
        params = {k: v for k, v in self.params.items() if k in keep}
        new_field = _build_field(new_tower, step.variables, step.aliases, params, old.field.constants)

        definition = Substitution(new_field, old.field, dict(step.define))
        generators = step.generators if step.generators is not None else list(old.actions)
        new_actions: Dict[str, Substitution] = {}
        for gen in generators:
            g_old = old.actions[gen]
            claimed = step.images.get(gen, {})
            images: Dict[str, RatFunc] = {}
            conventions: Dict[str, str] = {}
            symbols = list(step.define) + [n for n in keep if n in new_field.gens and n not in step.define]
            for w in symbols:
                target = g_old(definition(new_field.symbol(w)))
                if w in claimed:
                    image, convention, _ = self._pick_image(
                        new_field, _candidates(claimed[w]), lambda im: definition(im) == target)
                    if image is None:
                        image = new_field.parse(_candidates(claimed[w])[0])
                    if convention:
                        conventions[w] = convention
                elif w in step.define:
                    image = new_field.symbol(w)
                else:
                    image = _carry(new_field, g_old.image(w))
                images[w] = image
            g_new = Substitution(new_field, new_field, images, check=False)
            try:
                g_new.check_relations()
                relations_ok = True
            except RationalityError:
                relations_ok = False
            self._record(tag, results, IdentityResult(step.label, f"{gen} respects the tower relations", relations_ok))
            for w in symbols:
                shown = _candidates(claimed[w])[0] if w in claimed else ("fixed" if w in step.define else "inherited")
                text = f"{gen}: {w} -> {conventions.get(w, shown)}"
                passed = g_old(definition(new_field.symbol(w))) == definition(images[w])
                self._record(tag, results, IdentityResult(step.label, text, passed, conventions.get(w)))
            for alias in step.aliases:
                if alias in claimed:
                    expected = new_field.parse(_candidates(claimed[alias])[0])
                    passed = g_new(new_field.aliases[alias]) == expected
                    self._record(tag, results, IdentityResult(step.label, f"{gen}: {alias} -> {claimed[alias]}", passed))
            new_actions[gen] = g_new
        return Level(new_field, new_actions)

    def _rebase(self, tag: str, old: Level, step: RebaseStep, results: List[IdentityResult]) -> Level:
        new_field = _build_field(step.tower, old.field.variables, step.aliases, self.params, old.field.constants)
        try:
            lift = Substitution(old.field, new_field, dict(step.lift))
            lifted = True
        except RationalityError:
            lift = Substitution(old.field, new_field, dict(step.lift), check=False)
            lifted = False
        self._record(tag, results, IdentityResult(step.label, "lift respects the tower relations", lifted))
        generators = step.generators if step.generators is not None else list(old.actions)
        new_actions: Dict[str, Substitution] = {}
        for gen in generators:
            g_old = old.actions[gen]
            images: Dict[str, RatFunc] = {}
            for name in new_field.tower.names:
                claimed = step.images.get(gen, {})
                images[name] = new_field.parse(_candidates(claimed[name])[0]) if name in claimed else new_field.symbol(name)
            for var in old.field.variables:
                images[var] = lift(g_old.image(var))
            try:
                g_new = Substitution(new_field, new_field, images)
                relations_ok = True
            except RationalityError:
                g_new = Substitution(new_field, new_field, images, check=False)
                relations_ok = False
            self._record(tag, results, IdentityResult(step.label, f"{gen} respects the new tower relations", relations_ok))
            for name in old.field.tower.names:
                passed = g_new(lift(old.field.symbol(name))) == lift(g_old.image(name))
                self._record(tag, results, IdentityResult(step.label, f"{gen} agrees on {name} after lifting", passed))
            for alias, value in new_field.aliases.items():
                claimed = step.images.get(gen, {})
                if alias in claimed:
                    passed = g_new(value) == new_field.parse(_candidates(claimed[alias])[0])
                    self._record(tag, results, IdentityResult(step.label, f"{gen}: {alias} -> {claimed[alias]}", passed))
            new_actions[gen] = g_new
        return Level(new_field, new_actions)

    def _check(self, tag: str, level: Level, step: CheckStep, results: List[IdentityResult]) -> None:
        lhs = level.field.parse(step.lhs)
        if step.word:
            for gen in reversed(step.word):
                lhs = level.actions[gen](lhs)
        candidates = _candidates(step.rhs)
        passed, convention = False, None
        for index, text in enumerate(candidates):
            if lhs == level.field.parse(text):
                passed, convention = True, (text if index else None)
                break
        word = "".join(f"{g}." for g in step.word or [])
        self._record(tag, results, IdentityResult(step.label, f"{word}{step.lhs} == {convention or candidates[0]}", passed, convention))


def verify_chain(chain: ChainDefinition, params: Optional[Mapping[str, object]] = None,
                 strict: bool = True) -> TransformChain:
    return ChainVerifier(params, strict).run(chain)
