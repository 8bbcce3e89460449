"""
Rationality decisions for two-dimensional quasi-monomial actions over Q.

normalize() absorbs the coefficients each group allows, decide() looks the
instance up in a table keyed by (group, H, sign) and evaluates the matching
criterion, and certificate_for() builds invariant generators from a conic
parametrization where the fixed field is a product of conic bundles.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from sympy import Rational, igcd

from src.models.action import ActionSpec, GeneratorSpec, build_action, is_invariant
from src.models.case_chains import INVERSION_X, INVERSION_Y, list_cases
from src.models.glz import (
    NORMAL_SUBGROUP_TABLE,
    ConjugacyLabel,
    canonical_selector,
    find_normal_subgroup,
    representative,
)
from src.models.ratfunc import TowerGenerator, TowerSpec, jacobian_independent
from src.models.schemas import (
    BaseField,
    Certificate,
    FieldData,
    Instance,
    PendingSymbol,
    SymbolQuery,
    SymbolResult,
    Tri,
    Verdict,
    VerdictStatus,
)
from src.utils.env_setup import Settings, load_settings
from src.utils.error_handling import (
    CertificateUnavailable,
    InvalidInstance,
    RationalityError,
    UnsupportedSymbolBase,
)
from src.utils.expression_parser import parse_rational
from src.utils.symbol_service import (
    evaluate,
    hilbert_Q,
    is_rational_cube,
    is_rational_square,
    norm_solution,
    squarefree_core,
)

logger = logging.getLogger(__name__)

L = ConjugacyLabel

PURELY_MONOMIAL = "reduced to the purely quasi-monomial case"
HAJJA = "Hajja: H = G, i.e. K = k, so K(x,y)^G is k-rational"
CONIC_BUNDLE = "conic bundle z1^2 - a*z2^2 = f(x) with a rational point, parametrized through that point"
NOT_UNIRATIONAL = "K(x,y)^G is not k-unirational"


@dataclass(frozen=True)
class DispatchRow:
    """One row of the decision table."""
    group: ConjugacyLabel
    H: str
    sign: Optional[int]
    clause: str
    handler: Callable[[Instance, Settings, "DispatchRow"], Verdict]
    anchor: Optional[str] = None


DISPATCH: Dict[Tuple[ConjugacyLabel, str, Optional[int]], DispatchRow] = {}


# Small helpers

def _kernel_name(selector: str) -> str:
    """Case-tag spelling of H: "-I,tau*sigma" -> "kernel-minus-I-tau-sigma"."""
    if selector == "1":
        return "trivial-kernel"
    parts = ["minus-" + p[1:] if p.startswith("-") else p for p in selector.split(",")]
    return "kernel-" + "-".join(parts).replace("*", "-")


def sign_field(group: ConjugacyLabel, selector: str) -> Optional[str]:
    """The instance field whose sign selects a separate row, if any."""
    if group is L.V4_1 and selector == "lambda":
        return "epsilon1"
    if group is L.V4_1 and selector == "-lambda":
        return "epsilon2"
    if group is L.D4:
        return "epsilon"
    return None


def sign_options(group: ConjugacyLabel, selector: str) -> Tuple[Optional[int], ...]:
    return (1, -1) if sign_field(group, selector) else (None,)


def _require(inst: Instance, clause: str, *names: str) -> Tuple[Rational, ...]:
    missing = [n for n in names if inst.params.get(n) is None]
    if missing:
        raise InvalidInstance(
            f"{clause} needs parameter(s) {', '.join(missing)}",
            field_errors={n: "required" for n in missing},
        )
    return tuple(inst.params[n] for n in names)


def _nonsquare(clause: str, **values: Rational) -> None:
    """K must be a genuine extension: every listed radicand is a nonsquare."""
    for name, value in values.items():
        if is_rational_square(value):
            raise InvalidInstance(
                f"{clause}: {name} = {value} is a square, so K is not a field of the required degree",
                field_errors={name: "must be a nonsquare in Q"},
            )


def _field(inst: Instance, clause: str, *names: str) -> FieldData:
    field = inst.field
    if field is None or any(getattr(field, n) is None for n in names):
        raise InvalidInstance(
            f"{clause} needs field data {', '.join(names)}",
            field_errors={f"field.{n}": "required" for n in names},
        )
    return field


def _same_square_class(p: Rational, q: Rational) -> bool:
    return squarefree_core(p) == squarefree_core(q)


def _symbol(a, b, settings: Settings, base: Optional[BaseField] = None, degree: int = 2) -> SymbolResult:
    query = SymbolQuery(degree=degree, a=a, b=b, base=base or BaseField.rationals())
    return evaluate(query, search_bound=settings.search_bound, seed=settings.seed)


def _verdict(status: VerdictStatus, clause: str, symbols: Sequence[SymbolResult] = (),
             notes: Sequence[str] = (), certificate: Optional[Certificate] = None) -> Verdict:
    notes = list(notes)
    if status is VerdictStatus.NOT_RATIONAL:
        notes.append(NOT_UNIRATIONAL)
    return Verdict(status=status, clause=clause, symbols=list(symbols), notes=notes, certificate=certificate)


def _rational(clause: str, anchor: Optional[str] = None, notes: Sequence[str] = ()) -> Verdict:
    certificate = Certificate.cited(anchor) if anchor else None
    return _verdict(VerdictStatus.RATIONAL, clause, notes=notes, certificate=certificate)


def _from_symbols(clause: str, symbols: Sequence[SymbolResult], notes: Sequence[str] = ()) -> Verdict:
    values = [s.value for s in symbols]
    if Tri.NONZERO in values:
        status = VerdictStatus.NOT_RATIONAL
    elif Tri.UNDECIDED in values:
        status = VerdictStatus.UNDECIDED
    else:
        status = VerdictStatus.RATIONAL
    return _verdict(status, clause, symbols, notes)


def _pending(clause: str, symbol: str, base: str, argument: Rational, detail: str) -> UnsupportedSymbolBase:
    return UnsupportedSymbolBase(
        f"{clause}: the criterion {symbol} with {detail} lies outside the supported symbol bases",
        {"clause": clause, "symbol": symbol, "degree": 3, "base": base, "argument": str(argument), "reason": detail},
    )


def _norm_criterion(clause: str, c: Rational, B: Rational, secondary: Callable[[Rational], Rational],
                    m: Rational, settings: Settings, notes: Optional[List[str]] = None) -> Verdict:
    """
    Criterion of the form: there are a1, a2 in k with a1^2 - c*a2^2 = B, and
    either secondary(a1) = 0 or (c, secondary(a1)) vanishes over k(sqrt m).

    Any solution decides the second condition, so the first one found is used.
    """
    notes = list(notes or [])
    solvable = _symbol(c, B, settings)
    if solvable.value is Tri.NONZERO:
        notes.append(f"a1^2 - ({c})*a2^2 = {B} has no rational solution")
        return _verdict(VerdictStatus.NOT_RATIONAL, clause, [solvable], notes)
    solution = norm_solution(c, B, seed=settings.seed)
    if solution is None:
        logger.error(f"{clause}: ({c}, {B}) vanishes but no norm solution was found")
        notes.append("norm equation solvable but no solution found")
        return _verdict(VerdictStatus.UNDECIDED, clause, [solvable], notes)
    a1, a2 = solution
    value = secondary(a1)
    notes.append(f"a1 = {a1}, a2 = {a2} solves a1^2 - ({c})*a2^2 = {B}")
    if value == 0:
        notes.append("secondary expression vanishes")
        return _verdict(VerdictStatus.RATIONAL, clause, [solvable], notes)
    second = _symbol(c, value, settings, BaseField.quad(m))
    return _from_symbols(clause, [solvable, second], notes)


# Normalization

def normalize(instance: Instance) -> Instance:
    """
    Absorb coefficients into the variables the way each group allows.

    The steps applied are appended to instance.normalization; normalizing
    twice changes nothing.
    """
    label = ConjugacyLabel(instance.group)
    params: Dict[str, Rational] = dict(instance.params)
    steps = list(instance.normalization)
    updates: Dict[str, object] = {}

    def get(name: str) -> Optional[Rational]:
        return params.get(name)

    def absorb(description: str, **changes: Optional[Rational]) -> None:
        params.update({k: v for k, v in changes.items() if v is not None})
        steps.append(description)

    b = get("b")
    if label is L.C2_3 and b is not None and b != 1:
        absorb(f"replace {b}*y by y", b=Rational(1))
    elif label is L.C3 and b is not None and b != 1:
        c = get("c")
        absorb("replace b*y by y and b^2*c by c", b=Rational(1), c=b * b * c if c is not None else None)
    elif label is L.C4 and b is not None and b != 1:
        c = get("c")
        absorb("replace b*y by y and b*c by c", b=Rational(1), c=b * c if c is not None else None)
    elif label is L.C6 and (get("b") not in (None, 1) or get("c") not in (None, 1)):
        absorb("replace x/(b*c) by x and b*y by y", b=Rational(1), c=Rational(1))
    elif label is L.V4_1:
        selector = find_normal_subgroup(label, instance.H).selector
        a, c, d = get("a"), get("c"), get("d")
        eps1, eps2 = instance.epsilon1, instance.epsilon2
        absorb_x = eps1 == -1 and selector in ("1", "-I", "-lambda")
        absorb_y = eps2 == -1 and selector in ("1", "-I", "lambda")
        if absorb_x:
            absorb("replace sqrt(a)*x by x", c=a * c if a is not None and c is not None else None)
            updates["epsilon1"] = 1
        if absorb_y:
            absorb("replace sqrt(a)*y by y", d=a * d if a is not None and d is not None else None)
            updates["epsilon2"] = 1
    elif label is L.V4_2 and get("e") not in (None, 1):
        e, d = get("e"), get("d")
        absorb("replace e*y by y and e^2*d by d", e=Rational(1), d=e * e * d if d is not None else None)
    elif label in (L.S3_1, L.S3_2) and b is not None and b != 1:
        c, d, e = get("c"), get("d"), get("e")
        d_scale = 1 / b if label is L.S3_1 else b
        absorb(
            "replace b*y by y and b^2*c by c",
            b=Rational(1),
            c=b * b * c if c is not None else None,
            d=d * d_scale if d is not None else None,
            e=b * e if e is not None else None,
        )
    elif label is L.D6 and get("d") not in (None, 1):
        d = get("d")
        b, c, e = get("b"), get("c"), get("e")
        absorb(
            "replace d*y by y",
            d=Rational(1),
            b=b / d if b is not None else None,
            c=c * d if c is not None else None,
            e=e * d if e is not None else None,
        )

    if len(steps) > len(instance.normalization):
        logger.debug(f"Normalized {label.value}: {steps[len(instance.normalization):]}")
    return instance.model_copy(update={"params": params, "normalization": steps, **updates})


# Criteria, one handler per row

def _unconditional(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
    return _rational(row.clause, row.anchor)


def _decide_c2_1(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
    a, b, c = _require(inst, row.clause, "a", "b", "c")
    _nonsquare(row.clause, a=a)
    return _from_symbols(row.clause, [_symbol(a, b, settings), _symbol(a, c, settings)])


def _decide_c2_2(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
    a, b = _require(inst, row.clause, "a", "b")
    _nonsquare(row.clause, a=a)
    notes = ["x -> -x absorbed by replacing sqrt(a)*x by x"] if inst.epsilon == -1 else []
    return _from_symbols(row.clause, [_symbol(a, b, settings)], notes)


def _decide_c3(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
    (c,) = _require(inst, row.clause, "c")
    field = inst.field
    if inst.base == "Q(omega)":
        clause = "C3/omega-in-k"
        field = _field(inst, clause, "a")
        if field.kind not in (None, "pure_cubic"):
            raise InvalidInstance(f"{clause}: K must be k(cbrt a) when omega is in k",
                                  field_errors={"field.kind": "expected pure_cubic"})
        if is_rational_cube(field.a):
            raise InvalidInstance(f"{clause}: a = {field.a} is a cube", field_errors={"field.a": "must not be a cube"})
        return _from_symbols(clause, [_symbol(field.a, c, settings, BaseField.q_omega(), degree=3)])
    if field is not None and field.kind not in (None, "cyclic_cubic"):
        raise InvalidInstance("C3 over Q needs a cyclic cubic field K",
                              field_errors={"field.kind": "expected cyclic_cubic"})
    if is_rational_cube(c):
        return _rational("C3/omega-outside-k/cube-root-of-c-in-k", PURELY_MONOMIAL,
                         notes=["scaling x, y by the cube root of c gives the monomial action"])
    raise _pending("C3/omega-outside-k/cube-root-of-c-outside-K", "(alpha, c)_{3,Q(omega)}", "Q(omega)", c,
                   "alpha = (alpha0 + omega^-1*alpha1 + omega*alpha2)^3 not in Q")


def _decide_c4_trivial(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
    field = _field(inst, row.clause, "a", "b")
    a, b = field.a, field.b
    (c,) = _require(inst, row.clause, "c")
    m = b * b + 4
    _nonsquare(row.clause, **{"b^2 + 4": m})
    if is_rational_square(c):
        return _rational(f"{row.clause}/sqrt-c-in-k", notes=["sqrt(c) is in k"])
    if _same_square_class(c, m):
        return _rational(f"{row.clause}/sqrt-c-in-quadratic-subfield", notes=["sqrt(c) is in k(sqrt(b^2 + 4))"])
    # sign kept exactly as the criterion is stated
    return _norm_criterion(f"{row.clause}/sqrt-c-outside-K", c, m, lambda a1: 2 * a * a1 + a * m, m, settings)


def _decide_c4_sigma2(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
    a, c = _require(inst, row.clause, "a", "c")
    _nonsquare(row.clause, a=a)
    return _from_symbols(row.clause, [_symbol(a, c, settings), _symbol(a, -c, settings)])


def _decide_v4_1_trivial(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
    a, b, c, d = _require(inst, row.clause, "a", "b", "c", "d")
    _nonsquare(row.clause, a=a, b=b, ab=a * b)
    return _from_symbols(row.clause, [_symbol(a * b, d, settings), _symbol(b, c, settings)])


def _decide_v4_1_minus_I(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
    a, c, d = _require(inst, row.clause, "a", "c", "d")
    _nonsquare(row.clause, a=a)
    notes = [
        "lambda sends V to -(d/a)*(U^2 - a*c/d)/V, so the conic criterion is (a, d) over k(sqrt(c*d))",
        f"the printed form (a, -d) over k(sqrt(a*c*d)) evaluates to "
        f"{_symbol(a, -d, settings, BaseField.quad(a * c * d)).value.value}",
    ]
    return _from_symbols(row.clause, [_symbol(a, d, settings, BaseField.quad(c * d))], notes)


def _decide_v4_1_lambda(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
    a, c, d = _require(inst, row.clause, "a", "c", "d")
    _nonsquare(row.clause, a=a)
    if row.sign == 1:
        return _from_symbols(row.clause, [_symbol(a, c, settings)])
    return _from_symbols(row.clause, [_symbol(a, -c, settings, BaseField.quad(a * d))])


def _decide_v4_1_minus_lambda(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
    a, c, d = _require(inst, row.clause, "a", "c", "d")
    _nonsquare(row.clause, a=a)
    if row.sign == 1:
        return _from_symbols(row.clause, [_symbol(a, d, settings)])
    return _from_symbols(row.clause, [_symbol(a, -d, settings, BaseField.quad(a * c))])


def _decide_v4_2_trivial(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
    a, b, c = _require(inst, row.clause, "a", "b", "c")
    _nonsquare(row.clause, a=a, b=b, ab=a * b)
    d = inst.params.get("d")
    if d is not None and d != c:
        raise InvalidInstance(f"{row.clause}: tau and -I commute only when c = e^2*d",
                              field_errors={"d": f"normalized value {d} differs from c = {c}"})
    notes = [
        "-I sends V to -(c/b)*(U^2 - b/a)/V, so the conic criterion is (b, c) over k(sqrt(a))",
        f"the printed form (b, -c) over k(sqrt(a*b)) evaluates to "
        f"{_symbol(b, -c, settings, BaseField.quad(a * b)).value.value}",
    ]
    return _from_symbols(row.clause, [_symbol(b, c, settings, BaseField.quad(a))], notes)


def _decide_s3_1_trivial(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
    (c,) = _require(inst, row.clause, "c")
    for name in ("d", "e"):
        value = inst.params.get(name)
        if value is not None and value != 1:
            raise InvalidInstance(f"{row.clause}: the relations of S3 force {name} = 1 after normalization",
                                  field_errors={name: f"normalized value {value}"})
    if is_rational_cube(c):
        return _rational(f"{row.clause}/cube-root-of-c-in-k", PURELY_MONOMIAL,
                         notes=["scaling x, y by the cube root of c gives the monomial action"])
    field = inst.field
    if inst.base == "Q" and field is not None and field.kind == "omega_cubic" and field.a is not None:
        a = field.a
        if is_rational_cube(a):
            raise InvalidInstance(f"{row.clause}: a = {a} is a cube", field_errors={"field.a": "must not be a cube"})
        if is_rational_cube(c / a) or is_rational_cube(c / (a * a)):
            return _rational(f"{row.clause}/cube-root-of-c-in-K", PURELY_MONOMIAL,
                             notes=["cbrt(c) lies in K = Q(omega, cbrt a)"])
        return _from_symbols(f"{row.clause}/omega-in-K",
                             [_symbol(a, c, settings, BaseField.q_omega(), degree=3)])
    if inst.base == "Q(omega)":
        raise _pending(f"{row.clause}/omega-in-k", "(alpha, c)_{3,k(alpha)}", "k(alpha)", c,
                       "alpha in the cubic resolvent")
    if field is not None and field.kind == "s3_cubic":
        raise _pending(f"{row.clause}/omega-outside-K", "(alpha, c)_{3,k(alpha)}", "k(alpha)", c,
                       "alpha not in Q(omega)")
    raise InvalidInstance(f"{row.clause} needs field data describing K",
                          field_errors={"field.kind": "expected omega_cubic or s3_cubic"})


def _d4_location(c: Rational, b: Rational, P: Rational) -> str:
    if is_rational_square(c):
        return "sqrt-c-in-k"
    if _same_square_class(c, b):
        return "sqrt-c-in-sigma^2-sigma*tau-field"
    if _same_square_class(c, P * b):
        return "sqrt-c-in-sigma-field"
    if _same_square_class(c, P):
        return "sqrt-c-in-sigma^2-tau-field"
    return "sqrt-c-outside-K"


def _decide_d4_trivial(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
    field = _field(inst, row.clause, "a", "b")
    a, b = field.a, field.b
    (c,) = _require(inst, row.clause, "c")
    eps = row.sign
    if a == 0 or a * a == b:
        raise InvalidInstance(f"{row.clause}: need a != 0 and a^2 != b", field_errors={"field": "degenerate"})
    P = (a * a - b) / 4
    _nonsquare(row.clause, b=b, P=P, Pb=P * b)
    location = _d4_location(c, b, P)
    clause = f"{row.clause}/{location}/epsilon={eps}"
    notes = [f"alpha^2*beta^2 = (a^2 - b)/4 = {P}"]

    in_b_field = location in ("sqrt-c-in-k", "sqrt-c-in-sigma^2-sigma*tau-field")
    if location == "sqrt-c-outside-K":
        r = c if eps == 1 else b * c * (a * a - b)
        return _norm_criterion(clause, r, a * a - b, lambda a1: a1 + a, b, settings, notes)
    if in_b_field == (eps == 1):
        return _rational(clause, notes=notes)
    b_prime = b / P
    return _norm_criterion(clause, b_prime, b_prime + 4, lambda a1: 2 * a * a1 - a * (b_prime + 4),
                           b_prime + 4, settings, notes)


def _decide_d4_minus_I(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
    a, b, c = _require(inst, row.clause, "a", "b", "c")
    _nonsquare(row.clause, a=a, b=b, ab=a * b)
    eps = row.sign
    return _from_symbols(row.clause, [_symbol(a, eps * c, settings), _symbol(a, -eps * b * c, settings)])


def _decide_d4_minus_I_tau(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
    a, c = _require(inst, row.clause, "a", "c")
    _nonsquare(row.clause, a=a)
    return _from_symbols(row.clause, [_symbol(a, row.sign * c, settings)])


def _check_relations(label: ConjugacyLabel) -> Callable[[Instance, Settings, DispatchRow], Verdict]:
    """Unconditional rows whose normalized coefficients are tied by the group relations."""
    def handler(inst: Instance, settings: Settings, row: DispatchRow) -> Verdict:
        p = inst.params
        if label is L.S3_2:
            c, d, e = p.get("c"), p.get("d"), p.get("e")
            if d is not None and e is not None and d != e:
                raise InvalidInstance(f"{row.clause}: the relations force d = e", field_errors={"e": "must equal d"})
            if c is not None and d is not None and c * c != d ** 3:
                raise InvalidInstance(f"{row.clause}: the relations force c^2 = d^3", field_errors={"c": "c^2 != d^3"})
        if label is L.D6:
            b, c, e = p.get("b"), p.get("c"), p.get("e")
            if e is not None and e != 1:
                raise InvalidInstance(f"{row.clause}: tau^2 = 1 forces d*e = 1", field_errors={"e": "d*e != 1"})
            if b is not None and c is not None and c * b * b != 1:
                raise InvalidInstance(f"{row.clause}: the relations force c = 1/b^2", field_errors={"c": "c*b^2 != 1"})
        return _rational(row.clause, row.anchor)
    return handler


# Decision table

def _chain_anchor(tag: str) -> str:
    return f"fixed field made rational by the change of variables in case chain {tag}"


def _monomial(tag: str) -> str:
    return f"{PURELY_MONOMIAL}, see case chain {tag}"


def _register(group: ConjugacyLabel, selector: str, handler, anchor: Optional[str] = None) -> None:
    field = sign_field(group, selector)
    for sign in sign_options(group, selector):
        clause = f"{group.value}/{_kernel_name(selector)}"
        if field and selector != "1":
            clause += f"/{field}={sign}"
        DISPATCH[(group, selector, sign)] = DispatchRow(group, selector, sign, clause, handler, anchor)


_register(L.C2_1, "1", _decide_c2_1)
_register(L.C2_2, "1", _decide_c2_2)
_register(L.C2_3, "1", _unconditional, _monomial("C2_3/normalize-b"))
_register(L.C3, "1", _decide_c3)
_register(L.C4, "1", _decide_c4_trivial)
_register(L.C4, "sigma^2", _decide_c4_sigma2)
for _selector in ("1", "rho^3", "rho^2"):
    _register(L.C6, _selector, _unconditional, _monomial("C6/normalize"))
_register(L.V4_1, "1", _decide_v4_1_trivial)
_register(L.V4_1, "-I", _decide_v4_1_minus_I)
_register(L.V4_1, "lambda", _decide_v4_1_lambda)
_register(L.V4_1, "-lambda", _decide_v4_1_minus_lambda)
_register(L.V4_2, "1", _decide_v4_2_trivial)
_register(L.V4_2, "-I", _unconditional)
_register(L.V4_2, "tau", _unconditional)
_register(L.V4_2, "-tau", _unconditional)
_register(L.S3_1, "1", _decide_s3_1_trivial)
_register(L.S3_1, "rho^2", _unconditional)
for _selector in ("1", "rho^2"):
    _register(L.S3_2, _selector, _check_relations(L.S3_2), _monomial("S3_2/normalize"))
_register(L.D4, "1", _decide_d4_trivial)
_register(L.D4, "-I", _decide_d4_minus_I)
_register(L.D4, "-I,tau", _decide_d4_minus_I_tau)
_register(L.D4, "-I,tau*sigma", _unconditional)
_register(L.D4, "sigma", _unconditional)
for _selector in ("1", "-I", "rho^2", "rho", "rho^2,tau", "rho^2,-tau"):
    _register(L.D6, _selector, _check_relations(L.D6), _monomial("D6/normalize"))


def dispatch_row(group: ConjugacyLabel, selector: str, sign: Optional[int] = None) -> DispatchRow:
    """
    Row for (G, H, sign). H must be a proper normal subgroup in table spelling.

    Raises:
        InvalidInstance: no row matches, e.g. a required sign is missing
    """
    group = ConjugacyLabel(group)
    selector = canonical_selector(selector)
    row = DISPATCH.get((group, selector, sign))
    if row is None:
        field = sign_field(group, selector)
        if field and sign is None:
            raise InvalidInstance(f"{group.value} with H = {selector} needs {field}",
                                  field_errors={field: "required, +1 or -1"})
        raise InvalidInstance(f"No criterion for {group.value} with H = {selector}",
                              field_errors={"H": f"expected one of {list(NORMAL_SUBGROUP_TABLE[group])}"})
    return row


# Certificates

def _conic_parameter(w: str, f: str, root: str, point: Tuple[Rational, Rational]) -> str:
    """
    Slope through a rational point of z1^2 - a*z2^2 = f, where
    z1 = (w + f/w)/2 and z2 = (w - f/w)/(2*root) with root^2 = a.
    """
    p1, p2 = point
    z1 = f"(({w}) + ({f})/({w}))/2"
    z2 = f"(({w}) - ({f})/({w}))/(2*{root})"
    return f"(({z2}) - ({p2}))/(({z1}) - ({p1}))"


def _point(clause: str, a: Rational, f: Rational, settings: Settings) -> Tuple[Rational, Rational]:
    point = norm_solution(a, f, seed=settings.seed)
    if point is None:
        raise CertificateUnavailable(clause)
    return point


def _explicit(clause: str, tower: Sequence[TowerGenerator], generators: List[GeneratorSpec],
              constants: Dict[str, Rational], u_text: str, v_text: str) -> Certificate:
    spec = ActionSpec(
        tower=TowerSpec.of(*tower),
        generators=generators,
        constants={name: str(value) for name, value in constants.items()},
    )
    try:
        action = build_action(spec, coefficients_in_k=True)
        u, v = action.field.parse(u_text), action.field.parse(v_text)
    except RationalityError as exc:
        logger.warning(f"{clause}: could not build the action for a certificate: {exc.message}")
        raise CertificateUnavailable(clause) from exc
    invariant = is_invariant(u, action) and is_invariant(v, action)
    independent = jacobian_independent(u, v)
    if not (invariant and independent):
        logger.warning(f"{clause}: candidate generators failed (invariant={invariant}, independent={independent})")
        raise CertificateUnavailable(clause)
    return Certificate(kind="explicit_generators", anchor=CONIC_BUNDLE, u=str(u), v=str(v),
                       invariance_checked=True, independence_checked=True)


SQRT_A = TowerGenerator.sqrt("sqrt_a", "a")
SQRT_B = TowerGenerator.sqrt("sqrt_b", "b")


def _minus_I(coefficients: Tuple[str, str], **field_images: str) -> GeneratorSpec:
    return GeneratorSpec(name="-I", word="-I", coefficients=coefficients, field_images=field_images)


def _certificate_c2_1(inst: Instance, settings: Settings, clause: str) -> Certificate:
    a, b, c = (inst.params[n] for n in ("a", "b", "c"))
    u = _conic_parameter("x", "b", "sqrt_a", _point(clause, a, b, settings))
    v = _conic_parameter("y", "c", "sqrt_a", _point(clause, a, c, settings))
    gens = [_minus_I(("b", "c"), sqrt_a="-sqrt_a")]
    return _explicit(clause, [SQRT_A], gens, {"a": a, "b": b, "c": c}, u, v)


def _certificate_c2_2(inst: Instance, settings: Settings, clause: str) -> Certificate:
    a, b = inst.params["a"], inst.params["b"]
    eps = inst.epsilon or 1
    gens = [GeneratorSpec(name="lambda", coefficients=(str(eps), "b"), field_images={"sqrt_a": "-sqrt_a"})]
    u = "x" if eps == 1 else "sqrt_a*x"
    v = _conic_parameter("y", "b", "sqrt_a", _point(clause, a, b, settings))
    return _explicit(clause, [SQRT_A], gens, {"a": a, "b": b}, u, v)


def _certificate_c4_sigma2(inst: Instance, settings: Settings, clause: str) -> Certificate:
    a, c = inst.params["a"], inst.params["c"]
    gens = [GeneratorSpec(name="sigma", coefficients=("1", "c"), field_images={"sqrt_a": "-sqrt_a"})]
    # sigma inverts these up to c and -c
    u = _conic_parameter("(x*y + c)/(x + y)", "c", "sqrt_a", _point(clause, a, c, settings))
    v = _conic_parameter("(x*y - c)/(x - y)", "-c", "sqrt_a", _point(clause, a, -c, settings))
    return _explicit(clause, [SQRT_A], gens, {"a": a, "c": c}, u, v)


def _certificate_v4_1_trivial(inst: Instance, settings: Settings, clause: str) -> Certificate:
    a, b, c, d = (inst.params[n] for n in ("a", "b", "c", "d"))
    gens = [
        GeneratorSpec(name="lambda", coefficients=("1", "d"), field_images={"sqrt_a": "-sqrt_a"}),
        _minus_I(("c", "d"), sqrt_b="-sqrt_b"),
    ]
    u = _conic_parameter("x", "c", "sqrt_b", _point(clause, b, c, settings))
    v = _conic_parameter("y", "d", "(sqrt_a*sqrt_b)", _point(clause, a * b, d, settings))
    return _explicit(clause, [SQRT_A, SQRT_B], gens, {"a": a, "b": b, "c": c, "d": d}, u, v)


def _certificate_v4_1_lambda(inst: Instance, settings: Settings, clause: str) -> Certificate:
    a, c, d = (inst.params[n] for n in ("a", "c", "d"))
    gens = [GeneratorSpec(name="lambda", coefficients=("1", "d")), _minus_I(("c", "d"), sqrt_a="-sqrt_a")]
    u = _conic_parameter("x", "c", "sqrt_a", _point(clause, a, c, settings))
    return _explicit(clause, [SQRT_A], gens, {"a": a, "c": c, "d": d}, u, "y + d/y")


def _certificate_v4_1_minus_lambda(inst: Instance, settings: Settings, clause: str) -> Certificate:
    a, c, d = (inst.params[n] for n in ("a", "c", "d"))
    gens = [
        GeneratorSpec(name="-lambda", word="-lambda", coefficients=("c", "1")),
        _minus_I(("c", "d"), sqrt_a="-sqrt_a"),
    ]
    v = _conic_parameter("y", "d", "sqrt_a", _point(clause, a, d, settings))
    return _explicit(clause, [SQRT_A], gens, {"a": a, "c": c, "d": d}, "x + c/x", v)


QUADRIC_HEIGHT = 6


def _small_rationals(height: int) -> List[Rational]:
    """0 and then +-p/q in lowest terms, by increasing max(|p|, q)."""
    values = [Rational(0)]
    for h in range(1, height + 1):
        for p in range(1, h + 1):
            for q in range(1, h + 1):
                if max(p, q) == h and igcd(p, q) == 1:
                    values.extend([Rational(p, q), Rational(-p, q)])
    return values


def _quadric_point(clause: str, a: Rational, alpha: Rational, beta: Rational,
                   settings: Settings) -> Tuple[Rational, Rational, Rational]:
    """
    (p1, p2, t0) with p1^2 - a*p2^2 = alpha + beta*t0^2, searching t0 by height.
    """
    for t0 in _small_rationals(QUADRIC_HEIGHT):
        f = alpha + beta * t0 ** 2
        if f == 0 or hilbert_Q(a, f) is not Tri.ZERO:
            continue
        solution = norm_solution(a, f, seed=settings.seed)
        if solution is not None:
            return solution[0], solution[1], t0
    logger.info(f"{clause}: no point on the quadric with t0 of height <= {QUADRIC_HEIGHT}")
    raise CertificateUnavailable(clause)


def _quadric_parameters(w: str, f: str, root: str, t: str,
                        point: Tuple[Rational, Rational, Rational]) -> Tuple[str, str]:
    """
    Projection from a rational point of z1^2 - a*z2^2 = f(t), where w -> f/w
    and root -> -root: the slopes of z2 and t against z1.
    """
    p1, p2, t0 = point
    z1 = f"(({w}) + ({f})/({w}))/2"
    z2 = f"(({w}) - ({f})/({w}))/(2*{root})"
    return f"(({z2}) - ({p2}))/(({z1}) - ({p1}))", f"(({t}) - ({t0}))/(({z1}) - ({p1}))"


V4_1_U = "y*(x^2 - c)/(x^2*y^2 - c*d)"
V4_1_V = "x*(y^2 - d)/(x^2*y^2 - c*d)"


def _certificate_v4_1_minus_I(inst: Instance, settings: Settings, clause: str) -> Certificate:
    a, c, d = (inst.params[n] for n in ("a", "c", "d"))
    gens = [
        GeneratorSpec(name="lambda", coefficients=("1", "d"), field_images={"sqrt_a": "-sqrt_a"}),
        _minus_I(("c", "d")),
    ]
    U = f"sqrt_a*({V4_1_U})/({V4_1_V})"
    V = f"c*({V4_1_V}) - d*({V4_1_U})^2/({V4_1_V})"
    point = _quadric_point(clause, a, c, -d / a, settings)
    u, v = _quadric_parameters(V, f"c - d*({U})^2/a", "sqrt_a", U, point)
    return _explicit(clause, [SQRT_A], gens, {"a": a, "c": c, "d": d}, u, v)


def _certificate_v4_2_trivial(inst: Instance, settings: Settings, clause: str) -> Certificate:
    a, b, c = (inst.params[n] for n in ("a", "b", "c"))
    gens = [
        GeneratorSpec(name="tau", field_images={"sqrt_a": "-sqrt_a"}),
        _minus_I(("c", "c"), sqrt_b="-sqrt_b"),
    ]
    U = "sqrt_b*(x + y)/(sqrt_a*(x - y))"
    V = f"(({U})^2/b - 1/a)*sqrt_a*(x - y)/2"
    point = _quadric_point(clause, b, c / a, -c / b, settings)
    u, v = _quadric_parameters(V, f"-c*(({U})^2/b - 1/a)", "sqrt_b", U, point)
    return _explicit(clause, [SQRT_A, SQRT_B], gens, {"a": a, "b": b, "c": c}, u, v)


def _d4_generators(eps: int, tau_images: Dict[str, str]) -> List[GeneratorSpec]:
    return [
        GeneratorSpec(name="sigma", coefficients=("1", "c"), field_images={"sqrt_a": "-sqrt_a"}),
        GeneratorSpec(name="tau", coefficients=(str(eps), str(eps)), field_images=tau_images),
    ]


def _certificate_d4_minus_I(inst: Instance, settings: Settings, clause: str) -> Certificate:
    a, b, c = (inst.params[n] for n in ("a", "b", "c"))
    eps = inst.epsilon
    # sigma inverts S and T up to f_S and f_T
    if eps == 1:
        S, T, f_S, f_T = INVERSION_X, f"sqrt_b*({INVERSION_Y})", c, -b * c
    else:
        S, T, f_S, f_T = f"sqrt_b*({INVERSION_X})", INVERSION_Y, b * c, -c
    u = _conic_parameter(S, str(f_S), "sqrt_a", _point(clause, a, f_S, settings))
    v = _conic_parameter(T, str(f_T), "sqrt_a", _point(clause, a, f_T, settings))
    gens = _d4_generators(eps, {"sqrt_b": "-sqrt_b"})
    return _explicit(clause, [SQRT_A, SQRT_B], gens, {"a": a, "b": b, "c": c}, u, v)


def _certificate_d4_minus_I_tau(inst: Instance, settings: Settings, clause: str) -> Certificate:
    a, c = inst.params["a"], inst.params["c"]
    eps = inst.epsilon
    if eps == 1:
        u = _conic_parameter(INVERSION_X, str(c), "sqrt_a", _point(clause, a, c, settings))
        T = f"({INVERSION_Y})^2/c"
        v = f"sqrt_a*(({T}) + 1)/(({T}) - 1)"
    else:
        S = f"({INVERSION_X})^2/c"
        u = f"sqrt_a*(({S}) + 1)/(({S}) - 1)"
        v = _conic_parameter(INVERSION_Y, str(-c), "sqrt_a", _point(clause, a, -c, settings))
    return _explicit(clause, [SQRT_A], _d4_generators(eps, {}), {"a": a, "c": c}, u, v)


EXPLICIT_CERTIFICATES: Dict[str, Callable[[Instance, Settings, str], Certificate]] = {
    "C2_1/trivial-kernel": _certificate_c2_1,
    "C2_2/trivial-kernel": _certificate_c2_2,
    "C4/kernel-sigma^2": _certificate_c4_sigma2,
    "V4_1/trivial-kernel": _certificate_v4_1_trivial,
    "V4_1/kernel-minus-I": _certificate_v4_1_minus_I,
    "V4_1/kernel-lambda/epsilon1=1": _certificate_v4_1_lambda,
    "V4_1/kernel-minus-lambda/epsilon2=1": _certificate_v4_1_minus_lambda,
    "V4_2/trivial-kernel": _certificate_v4_2_trivial,
    "D4/kernel-minus-I/epsilon=1": _certificate_d4_minus_I,
    "D4/kernel-minus-I/epsilon=-1": _certificate_d4_minus_I,
    "D4/kernel-minus-I-tau/epsilon=1": _certificate_d4_minus_I_tau,
    "D4/kernel-minus-I-tau/epsilon=-1": _certificate_d4_minus_I_tau,
}


def certificate_for(instance: Instance, verdict: Verdict, settings: Optional[Settings] = None) -> Certificate:
    """
    Certificate of a rational verdict.

    Explicit generators refer to the normalized action recorded in
    verdict.normalized. Clauses settled by a cited theorem return that
    citation.

    Raises:
        ValueError: verdict is not Rational
        CertificateUnavailable: no construction is implemented for the clause
    """
    if verdict.status is not VerdictStatus.RATIONAL:
        raise ValueError("certificates exist only for rational verdicts")
    settings = settings or load_settings()
    builder = EXPLICIT_CERTIFICATES.get(verdict.clause)
    if builder is not None:
        return builder(normalize(instance), settings, verdict.clause)
    if verdict.certificate is not None and verdict.certificate.kind == "cited_theorem":
        return verdict.certificate
    raise CertificateUnavailable(verdict.clause)


def _fallback_anchor(clause: str) -> str:
    if clause in list_cases():
        return _chain_anchor(clause)
    return f"rationality criterion of {clause}"


# Entry points

def decide(instance: Instance, settings: Optional[Settings] = None) -> Verdict:
    """
    Decide k-rationality of K(x,y)^G for a concrete instance over Q.

    Args:
        instance: Group label, H, parameters and field data
        settings: Search bound and seed for the symbol oracle

    Returns:
        Verdict with the clause used, the evaluated symbols and, when
        rational, a certificate

    Raises:
        InvalidInstance: H is not normal in G, parameters are missing or K
            is not a field of the right degree
    """
    settings = settings or load_settings()
    label = ConjugacyLabel(instance.group)
    H = find_normal_subgroup(label, instance.H)
    normalized = normalize(instance)

    if H.order == representative(label).order:
        verdict = _rational(f"{label.value}/H-equals-G", HAJJA, notes=["G acts trivially on K"])
    else:
        field = sign_field(label, H.selector)
        row = dispatch_row(label, H.selector, getattr(normalized, field) if field else None)
        try:
            verdict = row.handler(normalized, settings, row)
        except UnsupportedSymbolBase as exc:
            logger.info(f"Undecided: {exc.message}")
            verdict = _verdict(VerdictStatus.UNDECIDED, exc.query.get("clause", row.clause), notes=[exc.message])
            verdict.unsupported = [PendingSymbol(
                symbol=exc.query.get("symbol", row.clause),
                degree=exc.query.get("degree", 3),
                base=exc.query.get("base", "unsupported"),
                argument=exc.query.get("argument"),
                reason=exc.query.get("reason", exc.message),
            )]

    verdict.normalized = {
        "params": {k: str(v) for k, v in sorted(normalized.params.items())},
        "epsilon": normalized.epsilon,
        "epsilon1": normalized.epsilon1,
        "epsilon2": normalized.epsilon2,
        "steps": list(normalized.normalization),
    }
    if verdict.status is VerdictStatus.RATIONAL and (
            verdict.certificate is None or verdict.clause in EXPLICIT_CERTIFICATES):
        try:
            verdict.certificate = certificate_for(normalized, verdict, settings)
        except CertificateUnavailable:
            logger.debug(f"{verdict.clause}: no explicit generators, citing the criterion")
            verdict.certificate = Certificate.cited(_fallback_anchor(verdict.clause))

    logger.info(f"{label.value} H={H.selector}: {verdict.status.value} via {verdict.clause}")
    return verdict


def decide_dim1(a, b, settings: Optional[Settings] = None) -> Verdict:
    """
    One-dimensional case: K = k(sqrt a) acting on K(x) by x -> b/x.

    A square a makes the extension trivial and the action purely
    quasi-monomial, which is always rational.
    """
    settings = settings or load_settings()
    a, b = parse_rational(a), parse_rational(b)
    if a == 0 or b == 0:
        raise InvalidInstance("a and b must be nonzero", field_errors={"a" if a == 0 else "b": "must be nonzero"})
    if is_rational_square(a):
        return _rational("dim1/square-a", "purely quasi-monomial action on K(x) is k-rational",
                         notes=["a is a square, K = k"])
    result = _symbol(a, b, settings)
    verdict = _from_symbols("dim1/conic", [result])
    if verdict.status is VerdictStatus.RATIONAL:
        point = result.witness.get("conic_point")
        verdict.certificate = Certificate.cited(f"conic X^2 - ({a})*Y^2 - ({b})*Z^2 has the rational point {point}")
    return verdict


def decide_batch(instances: Sequence[Instance], settings: Optional[Settings] = None
                 ) -> List[Union[Verdict, RationalityError]]:
    """
    Decide many instances in parallel. Results keep the input order; an
    instance that fails validation yields its exception instead of a verdict.
    """
    settings = settings or load_settings()

    def run(instance: Instance) -> Union[Verdict, RationalityError]:
        try:
            return decide(instance, settings)
        except RationalityError as exc:
            return exc

    with ThreadPoolExecutor(max_workers=settings.workers) as executor:
        return list(executor.map(run, instances))
