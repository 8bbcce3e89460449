"""
Registry of change-of-variables chains, one per case of the rationality
classification.

Each builder returns a ChainDefinition: the starting action on K(x, y)
followed by the changes of variables that reduce it to a known shape
(a conic bundle, a norm residue algebra, a purely monomial action). The
verifier in fixedfield checks every claimed image exactly.

Formal conventions: sc stands for a square root of c whenever sqrt(c) lies
in K, so c never appears separately there; alpha, beta, alpha_i and the
delta_i are free symbols. Words act right to left.
"""

import logging
import re
from dataclasses import dataclass
from functools import partial
from typing import Callable, Dict, List, Mapping, Optional, Sequence

from src.models.fixedfield import (
    THREE_CYCLE_U,
    THREE_CYCLE_V,
    OMEGA_EIGEN_U,
    OMEGA_EIGEN_V,
    ChainDefinition,
    ChainStart,
    ChangeStep,
    CheckStep,
    ImageText,
    RebaseStep,
    TransformChain,
    verify_chain,
)
from src.models.ratfunc import TowerGenerator
from src.utils.enhanced_cache import cached
from src.utils.error_handling import UnknownCase

logger = logging.getLogger(__name__)


# Builders' vocabulary

def _free(*names: str) -> List[TowerGenerator]:
    return [TowerGenerator.free(name) for name in names]


def _sqrt(name: str, expr: str) -> TowerGenerator:
    return TowerGenerator.sqrt(name, expr)


def _cbrt(name: str, expr: str) -> TowerGenerator:
    return TowerGenerator.cbrt(name, expr)


def _omega() -> TowerGenerator:
    return TowerGenerator.omega()


def _start(tower: Sequence[TowerGenerator], actions: Dict[str, Dict[str, str]],
           aliases: Optional[Dict[str, str]] = None,
           products: Optional[Dict[str, List[str]]] = None) -> ChainStart:
    return ChainStart(tower=list(tower), actions=actions, aliases=aliases or {}, products=products or {})


def _change(label: str, define: Dict[str, str], images: Optional[Dict[str, Dict[str, ImageText]]] = None,
            variables: Optional[Sequence[str]] = None, keep: Optional[List[str]] = None,
            tower: Sequence[TowerGenerator] = (), aliases: Optional[Dict[str, str]] = None,
            generators: Optional[List[str]] = None) -> ChangeStep:
    return ChangeStep(
        label=label,
        define=define,
        variables=tuple(variables or list(define)[:2]),
        keep=keep,
        tower=list(tower),
        aliases=aliases or {},
        images=images or {},
        generators=generators,
    )


def _rebase(label: str, tower: Sequence[TowerGenerator], lift: Dict[str, str],
            images: Optional[Dict[str, Dict[str, ImageText]]] = None,
            aliases: Optional[Dict[str, str]] = None,
            generators: Optional[List[str]] = None) -> RebaseStep:
    return RebaseStep(label=label, tower=list(tower), lift=lift, images=images or {},
                      aliases=aliases or {}, generators=generators)


def _fixed(label: str, generators: Sequence[str], *exprs: str) -> List[CheckStep]:
    return [CheckStep(label=label, lhs=e, rhs=e, word=[g]) for g in generators for e in exprs]


def _maps(label: str, generator: str, lhs: str, rhs: ImageText) -> CheckStep:
    return CheckStep(label=label, lhs=lhs, rhs=rhs, word=[generator])


def _equal(label: str, lhs: str, rhs: str) -> CheckStep:
    return CheckStep(label=label, lhs=lhs, rhs=rhs)


_WORD = re.compile(r"\b[A-Za-z_][A-Za-z_0-9]*\b")


def _rename(text: str, mapping: Mapping[str, str]) -> str:
    """Whole-word renaming, e.g. x -> X, b -> (1)."""
    return _WORD.sub(lambda m: mapping.get(m.group(0), m.group(0)), text)


def _conic_aliases(w: str, f: str, root: str, prefix: str = "z") -> Dict[str, str]:
    """z1 = (w + f/w)/2, z2 = (w - f/w)/(2 root): invariants of root -> -root, w -> f/w."""
    return {
        f"{prefix}1": f"({w} + ({f})/{w})/2",
        f"{prefix}2": f"({w} - ({f})/{w})/(2*{root})",
    }


def _conic_checks(label: str, generator: str, f: str, a: str, prefix: str = "z") -> List[CheckStep]:
    z1, z2 = f"{prefix}1", f"{prefix}2"
    return _fixed(label, [generator], z1, z2) + [_equal(label, f"{z1}^2 - ({a})*{z2}^2", f)]


CAYLEY_X = "(x + sc)/(x - sc)"
CAYLEY_Y = "(y + sc)/(y - sc)"
INVERSION_X = "(x*y + c)/(x + y)"
INVERSION_Y = "(x*y - c)/(x - y)"

EIGEN_U = _rename(OMEGA_EIGEN_U, {"x": "X", "y": "Y"})
EIGEN_V = _rename(OMEGA_EIGEN_V, {"x": "X", "y": "Y"})
# s, t for the eigenbasis; the factor omega^2 makes tau act by inversion
EIGEN_S = "omega^2*(u - v^2)/(v*(u*v - 1))"
EIGEN_T = "omega^2*u*(u*v - 1)/(v - u^2)"


# Two-cycles

def c2_1_trivial_kernel() -> ChainDefinition:
    aliases = {**_conic_aliases("x", "b", "sqrt_a", "z"), **_conic_aliases("y", "c", "sqrt_a", "w")}
    start = _start(_free("a", "b", "c") + [_sqrt("sqrt_a", "a")],
                   {"minus_I": {"sqrt_a": "-sqrt_a", "x": "b/x", "y": "c/y"}}, aliases)
    steps = (_conic_checks("norm forms", "minus_I", "b", "a", "z")
             + _conic_checks("norm forms", "minus_I", "c", "a", "w"))
    return ChainDefinition(tag="C2_1/trivial-kernel", title="-I inverts x, y and sqrt(a)",
                           group="C2_1", H="1", start=start, steps=steps)


def c2_2(epsilon: int) -> ChainDefinition:
    tower = _free("a", "b") + [_sqrt("sqrt_a", "a")]
    if epsilon == 1:
        start = _start(tower, {"lam": {"sqrt_a": "-sqrt_a", "y": "b/y"}}, _conic_aliases("y", "b", "sqrt_a"))
        steps: List = _fixed("x fixed", ["lam"], "x") + _conic_checks("conic bundle", "lam", "b", "a")
    else:
        start = _start(tower, {"lam": {"sqrt_a": "-sqrt_a", "x": "-x", "y": "b/y"}})
        steps = [
            _change("absorb the sign", {"X": "sqrt_a*x", "Y": "y"}, {"lam": {"Y": "b/Y"}},
                    aliases=_conic_aliases("Y", "b", "sqrt_a")),
            *_fixed("X fixed", ["lam"], "X"),
            *_conic_checks("conic bundle", "lam", "b", "a"),
        ]
    return ChainDefinition(tag=f"C2_2/epsilon={epsilon}", title=f"lambda with x -> {epsilon}*x, y -> b/y",
                           group="C2_2", H="1", start=start, steps=steps)


def c2_3_normalize() -> ChainDefinition:
    start = _start(_free("a", "b") + [_sqrt("sqrt_a", "a")],
                   {"tau": {"sqrt_a": "-sqrt_a", "x": "b*y", "y": "x/b"}})
    steps = [
        _change("replace b*y by y", {"X": "x", "Y": "b*y"}, {"tau": {"X": "Y", "Y": "X"}},
                aliases={"P": "X + Y", "Q": "sqrt_a*(X - Y)"}),
        *_fixed("invariants", ["tau"], "P", "Q"),
    ]
    return ChainDefinition(tag="C2_3/normalize-b", title="tau reduces to the swap", group="C2_3", H="1",
                           start=start, steps=steps)


# Three-cycles

def c3_normalize() -> ChainDefinition:
    start = _start(_free("b", "c"), {"rho2": {"x": "b*y", "y": "c/(x*y)"}})
    steps = [_change("replace b*y by y", {"X": "x", "Y": "b*y"},
                     {"rho2": {"X": "Y", "Y": "b^2*c/(X*Y)"}})]
    return ChainDefinition(tag="C3/normalize-b", title="rho^2 with b absorbed into c", group="C3", H="1",
                           start=start, steps=steps)


def c3_cube_root_in_k() -> ChainDefinition:
    start = _start(_free("alpha0", "alpha1", "alpha2", "g"),
                   {"rho2": {"alpha0": "alpha1", "alpha1": "alpha2", "alpha2": "alpha0",
                             "x": "y", "y": "g^3/(x*y)"}})
    names = {"x": "X", "y": "Y", "b": "1"}
    steps = [
        _change("scale by the cube root", {"X": "x/g", "Y": "y/g"}, {"rho2": {"X": "Y", "Y": "1/(X*Y)"}},
                aliases={"u": _rename(THREE_CYCLE_U, names), "v": _rename(THREE_CYCLE_V, names)}),
        *_fixed("monomial invariants", ["rho2"], "u", "v"),
    ]
    return ChainDefinition(tag="C3/omega-outside-k/cube-root-of-c-in-k", title="purely monomial after scaling",
                           group="C3", H="1", start=start, steps=steps)


def _pure_cubic_prefix(with_tau: bool) -> List:
    """X, Y then eigenvectors u, v then s, t then S, T for K containing alpha = a^(1/3)."""
    tau = with_tau
    steps = [
        _change("scale by the cube root of c", {"X": "x/cc", "Y": "y/cc"}, {
            "rho2": {"X": "Y", "Y": "1/(X*Y)"},
            "phi_c": {"X": "omega^2*X", "Y": "omega^2*Y"},
            **({"tau": {"X": "Y", "Y": "X"}} if tau else {}),
        }),
        _change("eigenvectors", {"u": EIGEN_U, "v": EIGEN_V}, {
            "rho2": {"u": "omega*u", "v": "omega^2*v"},
            "phi_c": {"u": "v/u", "v": "1/u"},
            **({"tau": {"u": "omega^2*(u - v^2)/(u*v - 1)", "v": "omega*(v - u^2)/(u*v - 1)"}} if tau else {}),
        }),
        _change("s, t", {"s": EIGEN_S, "t": EIGEN_T}, {
            "rho2": {"s": ["omega^2*s", "omega*s"], "t": ["omega^2*t", "omega*t"]},
            "phi_c": {"s": "t", "t": "1/(s*t)"},
            **({"tau": {"s": "t", "t": "s"}} if tau else {}),
        }),
        _change("twist by alpha", {"S": "alpha*s", "T": "alpha*t"}, {
            "phi_c": {"S": "T", "T": "a/(S*T)", "U": "S"},
            **({"tau": {"S": "T", "T": "S", "U": "U"}} if tau else {}),
        }, keep=["omega", "a", "c", "cc"], aliases={"U": "a/(S*T)"}),
    ]
    return steps


def _pure_cubic_start(with_tau: bool) -> ChainStart:
    tower = [_omega(), *_free("a"), _cbrt("alpha", "a"), *_free("c"), _cbrt("cc", "c")]
    actions = {
        "rho2": {"alpha": "omega*alpha", "x": "y", "y": "c/(x*y)"},
        "phi_c": {"cc": "omega*cc"},
    }
    if with_tau:
        actions["tau"] = {"omega": "omega^2", "x": "y", "y": "x"}
    return _start(tower, actions)


def c3_omega_in_k() -> ChainDefinition:
    return ChainDefinition(tag="C3/omega-in-k", title="Kummer cubic K = k(a^(1/3)) with omega in k",
                           group="C3", H="1", start=_pure_cubic_start(False), steps=_pure_cubic_prefix(False))


def _norm_branch_pure(with_tau: bool) -> List:
    return [
        _rebase("split a as a norm", [_omega(), *_free("d0", "d1", "d2", "c"), _cbrt("cc", "c")],
                {"a": "d0*d1*d2"}, {
                    "phi_c": {"d0": "d1", "d1": "d2", "d2": "d0", "cc": "omega*cc"},
                    **({"tau": {"d1": "d2", "d2": "d1", "omega": "omega^2"}} if with_tau else {}),
                }),
        _change("p, q", {"p": "S/d1", "q": "T/d2"}, {
            "phi_c": {"p": "q", "q": "1/(p*q)"},
            **({"tau": {"p": "q", "q": "p"}} if with_tau else {}),
        }),
    ]


def s3_omega_in_K_norm() -> ChainDefinition:
    steps = _pure_cubic_prefix(True) + _norm_branch_pure(True)
    return ChainDefinition(tag="S3_1/trivial-kernel/omega-in-K/norm-branch",
                           title="omega in K, a = d0*d1*d2", group="S3_1", H="1",
                           start=_pure_cubic_start(True), steps=steps)


def s3_omega_in_K_trace() -> ChainDefinition:
    steps = _pure_cubic_prefix(True)
    steps[-1].aliases.update({
        "S3": "S + T + U",
        "T3": "omega^2*S + omega*T + U",
        "U3": "omega*S + omega^2*T + U",
    })
    steps += [
        _maps("Fourier components", "phi_c", "T3", "omega*T3"),
        _maps("Fourier components", "phi_c", "U3", "omega^2*U3"),
        *_fixed("Fourier components", ["phi_c", "tau"], "S3", "T3/cc", "cc*U3"),
        *_fixed("Fourier components", ["tau"], "T3", "U3"),
    ]
    return ChainDefinition(tag="S3_1/trivial-kernel/omega-in-K/trace-branch",
                           title="omega in K, invariants S+T+U and the twisted traces", group="S3_1", H="1",
                           start=_pure_cubic_start(True), steps=steps)


def _cyclic_cubic_start(with_tau: bool, omega_in_k: bool) -> ChainStart:
    actions: Dict[str, Dict[str, str]] = {"phi_c": {"cc": "omega*cc"}}
    if omega_in_k:
        tower = [_omega(), *_free("A", "B", "c"), _cbrt("cc", "c")]
        actions["rho2"] = {"A": "omega*A", "B": "omega^2*B", "x": "y", "y": "c/(x*y)"}
        if with_tau:
            actions["tau"] = {"A": "B", "B": "A", "x": "y", "y": "x"}
    else:
        tower = [*_free("alpha0", "alpha1", "alpha2", "c"), _omega(), _cbrt("cc", "c")]
        actions["rho2"] = {"alpha0": "alpha1", "alpha1": "alpha2", "alpha2": "alpha0", "x": "y", "y": "c/(x*y)"}
        actions["phi_w"] = {"omega": "omega^2"}
        if with_tau:
            actions["tau"] = {"alpha1": "alpha2", "alpha2": "alpha1", "x": "y", "y": "x"}
    return _start(tower, actions)


def _cyclic_cubic_prefix(with_tau: bool, omega_in_k: bool) -> List:
    """Down to S', T' with phi_c: S' -> T' -> a'/(S'T')."""
    with_phi_w = not omega_in_k
    generators = ["phi_c"] + (["phi_w"] if with_phi_w else []) + (["tau"] if with_tau else [])

    def extra(tau_images: Dict[str, ImageText], phi_w_images: Dict[str, ImageText]) -> Dict:
        out: Dict = {}
        if with_tau:
            out["tau"] = tau_images
        if with_phi_w:
            out["phi_w"] = phi_w_images
        return out

    steps: List = [
        _change("scale by the cube root of c", {"X": "x/cc", "Y": "y/cc"}, {
            "rho2": {"X": "Y", "Y": "1/(X*Y)"},
            "phi_c": {"X": "omega^2*X", "Y": "omega^2*Y"},
            **extra({"X": "Y", "Y": "X"}, {}),
        }),
        _change("eigenvectors", {"u": EIGEN_U, "v": EIGEN_V}, {
            "rho2": {"u": "omega*u", "v": "omega^2*v"},
            "phi_c": {"u": "v/u", "v": "1/u"},
            **extra({"u": "omega*(v - u^2)/(u*v - 1)", "v": "omega^2*(u - v^2)/(u*v - 1)"},
                    {"u": "v", "v": "u"}),
        }),
        _change("s, t", {"s": EIGEN_S, "t": EIGEN_T}, {
            "rho2": {"s": ["omega^2*s", "omega*s"], "t": ["omega^2*t", "omega*t"]},
            "phi_c": {"s": "t", "t": "1/(s*t)"},
            **extra({"s": "1/s", "t": "1/t"}, {"s": "1/t", "t": "1/s"}),
        }),
    ]
    if not omega_in_k:
        steps.append(_rebase(
            "Lagrange resolvents",
            [*_free("A0", "A", "B", "c"), _omega(), _cbrt("cc", "c")],
            {
                "alpha0": "(A0 + A + B)/3",
                "alpha1": "(A0 + omega*A + omega^2*B)/3",
                "alpha2": "(A0 + omega^2*A + omega*B)/3",
            },
            {
                "rho2": {"A": "omega*A", "B": "omega^2*B"},
                "phi_c": {"cc": "omega*cc"},
                "phi_w": {"A": "B", "B": "A", "omega": "omega^2"},
                **({"tau": {"A": "B", "B": "A"}} if with_tau else {}),
            },
        ))
    steps += [
        _change("twist by the resolvent", {"S": "A*s", "T": "A*t"}, {
            "phi_c": {"S": "T", "T": "alpha/(S*T)"},
            **extra({"S": "b/S", "T": "b/T", "alpha": "b^3/alpha"},
                    {"S": "b/T", "T": "b/S", "alpha": "b^3/alpha"}),
        }, aliases={"alpha": "A^3", "b": "A*B"}),
        *_fixed("rho2 acts trivially", ["rho2"], "S", "T"),
        _change("normalize the norm", {"Sp": "b*S/alpha", "Tp": "b*T/alpha", "ap": "b^3/alpha^2"}, {
            "phi_c": {"Sp": "Tp", "Tp": "ap/(Sp*Tp)"},
            **extra({"Sp": "1/Sp", "Tp": "1/Tp", "ap": "1/ap"},
                    {"Sp": "1/Tp", "Tp": "1/Sp", "ap": "1/ap"}),
        }, keep=["omega", "c", "cc"], generators=generators),
    ]
    return steps


def _delta_branch(with_tau: bool, omega_in_k: bool) -> List:
    tower = ([_omega(), *_free("d0", "d1", "d2", "d3", "d4", "c"), _cbrt("cc", "c")] if omega_in_k
             else [*_free("d0", "d1", "d2", "d3", "d4", "c"), _omega(), _cbrt("cc", "c")])
    images: Dict[str, Dict[str, ImageText]] = {
        "phi_c": {"d0": "d1", "d1": "d2", "d2": "d0", "d3": "d4", "d4": "d5", "cc": "omega*cc", "d5": "d3"},
    }
    if not omega_in_k:
        images["phi_w"] = {"d0": "d3", "d3": "d0", "d1": "d5", "d2": "d4", "d4": "d2",
                           "omega": "omega^2", "d5": "d1"}
    if with_tau:
        images["tau"] = {"d0": "d3", "d3": "d0", "d1": "d4", "d4": "d1", "d2": "d5", "d5": "d2"}
    pq: Dict[str, Dict[str, ImageText]] = {"phi_c": {"p": "q", "q": "1/(p*q)"}}
    if not omega_in_k:
        pq["phi_w"] = {"p": "1/q", "q": "1/p"}
    if with_tau:
        pq["tau"] = {"p": "1/p", "q": "1/q"}
    return [
        _rebase("split a' as a norm", tower, {"ap": "d0*d1*d2"}, images,
                aliases={"d5": "1/(d0*d1*d2*d3*d4)"}),
        _change("p, q", {"p": "Sp/(d0*d2*d4)", "q": "Tp/(d0*d1*d5)"}, pq),
    ]


def c3_cyclic_cubic() -> ChainDefinition:
    steps = _cyclic_cubic_prefix(False, False) + _delta_branch(False, False)
    return ChainDefinition(tag="C3/omega-outside-k/cube-root-of-c-outside-K",
                           title="cyclic cubic K, omega and cbrt(c) adjoined", group="C3", H="1",
                           start=_cyclic_cubic_start(False, False), steps=steps)


def s3_omega_outside_K() -> ChainDefinition:
    steps = _cyclic_cubic_prefix(True, False) + _delta_branch(True, False)
    return ChainDefinition(tag="S3_1/trivial-kernel/omega-outside-K",
                           title="S3 field K, omega and cbrt(c) adjoined", group="S3_1", H="1",
                           start=_cyclic_cubic_start(True, False), steps=steps)


def s3_omega_in_k_norm() -> ChainDefinition:
    steps = _cyclic_cubic_prefix(True, True) + _delta_branch(True, True)
    return ChainDefinition(tag="S3_1/trivial-kernel/omega-in-k/norm-branch",
                           title="omega in k, a' a norm from the cubic subfield", group="S3_1", H="1",
                           start=_cyclic_cubic_start(True, True), steps=steps)


def s3_omega_in_k_conic() -> ChainDefinition:
    steps = _cyclic_cubic_prefix(True, True) + [
        _change("Cayley transform", {
            "S2": "((Sp + 1)/(Sp - 1))/((ap + 1)/(ap - 1))",
            "T2": "((Tp + 1)/(Tp - 1))/((ap + 1)/(ap - 1))",
            "app": "(ap + 1)/(ap - 1)",
        }, {
            "tau": {"app": "-app"},
            "phi_c": {"S2": "T2",
                      "T2": "(1 - S2 - T2 + app^2*S2*T2)/(1 - app^2*S2 - app^2*T2 + app^2*S2*T2)"},
        }, keep=["omega", "c", "cc"]),
        _change("r1, r2", {"r1": "(S2 - 1)/(2*S2)", "r2": "(T2 - 1)/(2*T2)"},
                {"phi_c": {"r1": "r2", "r2": "(1 - r1 - r2)/(1 + ar*r1*r2)"}},
                aliases={"ar": "4/(app^2 - 1)"}),
    ]
    return ChainDefinition(tag="S3_1/trivial-kernel/omega-in-k/conic-branch",
                           title="omega in k, Cayley coordinates and the r1, r2 form", group="S3_1", H="1",
                           start=_cyclic_cubic_start(True, True), steps=steps)


def s3_1_normalize() -> ChainDefinition:
    start = _start(_free("b", "c", "d", "e"),
                   {"rho2": {"x": "b*y", "y": "c/(x*y)"}, "tau": {"x": "d*y", "y": "e*x"}})
    steps = [_change("replace b*y by y", {"X": "x", "Y": "b*y"}, {
        "rho2": {"X": "Y", "Y": "b^2*c/(X*Y)"},
        "tau": {"X": "d*Y/b", "Y": "b*e*X"},
    })]
    return ChainDefinition(tag="S3_1/normalize-b", title="absorb b into c, d and e", group="S3_1", H="1",
                           start=start, steps=steps)


def s3_cube_root_in_k() -> ChainDefinition:
    start = _start(_free("alpha0", "alpha1", "alpha2", "g"), {
        "rho2": {"alpha0": "alpha1", "alpha1": "alpha2", "alpha2": "alpha0", "x": "y", "y": "g^3/(x*y)"},
        "tau": {"alpha1": "alpha2", "alpha2": "alpha1", "x": "y", "y": "x"},
    })
    steps = [_change("scale by the cube root", {"X": "x/g", "Y": "y/g"}, {
        "rho2": {"X": "Y", "Y": "1/(X*Y)"},
        "tau": {"X": "Y", "Y": "X"},
    })]
    return ChainDefinition(tag="S3_1/trivial-kernel/cube-root-of-c-in-k", title="purely monomial after scaling",
                           group="S3_1", H="1", start=start, steps=steps)


def s3_kernel_rho2() -> ChainDefinition:
    start = _start(_free("a", "c") + [_sqrt("sqrt_a", "a")], {
        "rho2": {"x": "y", "y": "c/(x*y)"},
        "tau": {"sqrt_a": "-sqrt_a", "x": "y", "y": "x"},
    })
    names = {"b": "c"}
    steps = [
        _change("cyclic invariants", {"X": _rename(THREE_CYCLE_U, names), "Y": _rename(THREE_CYCLE_V, names)},
                {"tau": {"X": "Y", "Y": "X"}}, aliases={"P": "X + Y", "Q": "sqrt_a*(X - Y)"}),
        *_fixed("invariants", ["rho2", "tau"], "P", "Q"),
    ]
    return ChainDefinition(tag="S3_1/kernel-rho^2", title="quadratic K, rho^2 acting trivially on K",
                           group="S3_1", H="rho^2", start=start, steps=steps)


def s3_2_normalize() -> ChainDefinition:
    start = _start(_free("e"), {
        "rho2": {"x": "y", "y": "e^3/(x*y)"},
        "minus_tau": {"x": "e^2/y", "y": "e^2/x"},
    })
    steps = [_change("scale by d/c", {"X": "x/e", "Y": "y/e"}, {
        "rho2": {"X": "Y", "Y": "1/(X*Y)"},
        "minus_tau": {"X": "1/Y", "Y": "1/X"},
    })]
    return ChainDefinition(tag="S3_2/normalize", title="c = e^3, d = e^2 reduce to the monomial action",
                           group="S3_2", H="1", start=start, steps=steps)


# C4 and C6

def c4_normalize() -> ChainDefinition:
    start = _start(_free("b", "c"), {"sigma": {"x": "b*y", "y": "c/x"}})
    steps = [_change("replace b*y by y", {"X": "x", "Y": "b*y"}, {"sigma": {"X": "Y", "Y": "b*c/X"}})]
    return ChainDefinition(tag="C4/normalize-b", title="absorb b into c", group="C4", H="1",
                           start=start, steps=steps)


def _c4_tail(tower: Sequence[TowerGenerator], images: Dict[str, Dict[str, ImageText]], keep: List[str],
             uv_images: Optional[Dict[str, Dict[str, ImageText]]] = None) -> List:
    """Rebase alpha = B*beta (so A = alpha*beta), then U = u + v, V = A(u - v), a, b."""
    sigma = {"B": "-1/B", "beta": "-B*beta", "A": "-A", **images.get("sigma", {})}
    return [
        _rebase("A = alpha*beta, B = alpha/beta", [*_free("B", "beta"), *tower], {"alpha": "B*beta"},
                {**images, "sigma": sigma}, aliases={"A": "B*beta^2"}),
        _change("sigma-invariants", {"U": "u + v", "V": "A*(u - v)", "a": "A*(B + 1/B)", "b": "B - 1/B"},
                uv_images, keep=keep),
    ]


def c4_sqrt_c_in_k() -> ChainDefinition:
    start = _start(_free("alpha", "beta", "sc"),
                   {"sigma": {"alpha": "beta", "beta": "-alpha", "x": "y", "y": "sc^2/x"}})
    steps = [
        _change("Cayley transform", {"X": CAYLEY_X, "Y": CAYLEY_Y}, {"sigma": {"X": "Y", "Y": "-X"}}),
        _change("u = alpha*X, v = beta*Y", {"u": "alpha*X", "v": "beta*Y"}, {"sigma": {"u": "v", "v": "u"}}),
        *_c4_tail(_free("sc"), {}, ["sc"]),
    ]
    return ChainDefinition(tag="C4/trivial-kernel/sqrt-c-in-k", title="sqrt(c) in k", group="C4", H="1",
                           start=start, steps=steps)


def c4_sqrt_c_in_quadratic_subfield() -> ChainDefinition:
    start = _start(_free("alpha", "beta", "sc"),
                   {"sigma": {"alpha": "beta", "beta": "-alpha", "sc": "-sc", "x": "y", "y": "sc^2/x"}})
    steps = [
        _change("Cayley transform", {"X": CAYLEY_X, "Y": CAYLEY_Y}, {"sigma": {"X": "1/Y", "Y": "-1/X"}}),
        _change("u = alpha*X, v = beta/Y", {"u": "alpha*X", "v": "beta/Y"}, {"sigma": {"u": "v", "v": "u"}}),
        *_c4_tail(_free("sc"), {"sigma": {"sc": "-sc"}}, ["sc"]),
    ]
    return ChainDefinition(tag="C4/trivial-kernel/sqrt-c-in-quadratic-subfield",
                           title="sqrt(c) in the quadratic subfield of K", group="C4", H="1",
                           start=start, steps=steps)


def c4_sqrt_c_outside_K() -> ChainDefinition:
    start = _start(_free("alpha", "beta", "c") + [_sqrt("sc", "c")], {
        "sigma": {"alpha": "beta", "beta": "-alpha", "x": "y", "y": "c/x"},
        "phi_c": {"sc": "-sc"},
    })
    uv_images = {"phi_c": {
        "U": "2*a^2*(a*U - b*V)/(a^2*U^2 - b^2*V^2 - 4*V^2)",
        "V": "2*a^3*(a*b*U - b^2*V - 4*V)/((b^2 + 4)*(a^2*U^2 - b^2*V^2 - 4*V^2))",
    }}
    steps = [
        _change("Cayley transform", {"X": CAYLEY_X, "Y": CAYLEY_Y}, {
            "sigma": {"X": "Y", "Y": "-X"},
            "phi_c": {"X": "1/X", "Y": "1/Y"},
        }),
        _change("u = alpha*X, v = beta*Y", {"u": "alpha*X", "v": "beta*Y"}, {
            "sigma": {"u": "v", "v": "u"},
            "phi_c": {"u": "alpha^2/u", "v": "beta^2/v"},
        }),
        *_c4_tail([*_free("c"), _sqrt("sc", "c")], {"phi_c": {"sc": "-sc"}}, ["c", "sc"], uv_images),
        _change("s, t", {
            "s": "(a*b*U - b^2*V - 4*V)/(2*V)",
            "t": "b*(a^2*U^2 - b^2*V^2 - 4*V^2)/(4*a*V)",
        }, {"phi_c": {"s": "(b^2 + 4)/s", "t": "(a*(s + (b^2 + 4)/s) + a*(b^2 + 4))/t"}}),
    ]
    return ChainDefinition(tag="C4/trivial-kernel/sqrt-c-outside-K", title="sqrt(c) adjoined to K",
                           group="C4", H="1", start=start, steps=steps)


def c4_kernel_sigma2() -> ChainDefinition:
    start = _start(_free("a", "c") + [_sqrt("sqrt_a", "a")],
                   {"sigma": {"sqrt_a": "-sqrt_a", "x": "y", "y": "c/x"}})
    aliases = {**_conic_aliases("u", "c", "sqrt_a", "z"), **_conic_aliases("v", "-c", "sqrt_a", "w")}
    steps = [
        _change("invariants of sigma^2", {"u": INVERSION_X, "v": INVERSION_Y},
                {"sigma": {"u": "c/u", "v": "-c/v"}}, aliases=aliases),
        *_conic_checks("norm forms", "sigma", "c", "a", "z"),
        *_conic_checks("norm forms", "sigma", "-c", "a", "w"),
    ]
    return ChainDefinition(tag="C4/kernel-sigma^2", title="quadratic K, sigma^2 acting trivially on K",
                           group="C4", H="sigma^2", start=start, steps=steps)


def c6_normalize() -> ChainDefinition:
    start = _start(_free("b", "c"), {"rho": {"x": "b*x*y", "y": "c/x"}})
    steps = [_change("replace x/(bc) by x and b*y by y", {"X": "x/(b*c)", "Y": "b*y"},
                     {"rho": {"X": "X*Y", "Y": "1/X"}})]
    return ChainDefinition(tag="C6/normalize", title="rho reduces to the monomial action", group="C6", H="1",
                           start=start, steps=steps)


def d6_normalize() -> ChainDefinition:
    start = _start(_free("b"), {"rho": {"x": "b*x*y", "y": "1/(b^2*x)"}, "tau": {"x": "y", "y": "x"}})
    steps = [_change("scale by b", {"X": "b*x", "Y": "b*y"}, {
        "rho": {"X": "X*Y", "Y": "1/X"},
        "tau": {"X": "Y", "Y": "X"},
    })]
    return ChainDefinition(tag="D6/normalize", title="c = 1/b^2 reduces to the monomial action", group="D6",
                           H="1", start=start, steps=steps)


# Klein four-groups

def v4_1_trivial_kernel() -> ChainDefinition:
    aliases = {
        "z1": "(y + d/y)/2", "z2": "(y - d/y)/(2*sqrt_a*sqrt_b)",
        "w1": "(x + c/x)/2", "w2": "(x - c/x)/(2*sqrt_b)",
    }
    start = _start(_free("a", "b", "c", "d") + [_sqrt("sqrt_a", "a"), _sqrt("sqrt_b", "b")], {
        "lam": {"sqrt_a": "-sqrt_a", "y": "d/y"},
        "minus_I": {"sqrt_b": "-sqrt_b", "x": "c/x", "y": "d/y"},
    }, aliases)
    steps = [
        *_fixed("invariants", ["lam", "minus_I"], "z1", "z2", "w1", "w2"),
        _equal("norm forms", "z1^2 - a*b*z2^2", "d"),
        _equal("norm forms", "w1^2 - b*w2^2", "c"),
    ]
    return ChainDefinition(tag="V4_1/trivial-kernel", title="biquadratic K, two conic factors", group="V4_1",
                           H="1", start=start, steps=steps)


def _v4_1_minus_I(scaled: bool) -> ChainDefinition:
    aliases = {"u": "y*(x^2 - c)/(x^2*y^2 - c*d)", "v": "x*(y^2 - d)/(x^2*y^2 - c*d)"}
    start = _start(_free("a", "c", "d") + [_sqrt("sqrt_a", "a")], {
        "lam": {"sqrt_a": "-sqrt_a", "y": "d/y"},
        "minus_I": {"x": "c/x", "y": "d/y"},
    }, aliases)
    if scaled:
        define = {"U": "sqrt_a*u/v", "V": "c*v - d*u^2/v"}
        image = "(c - d*U^2/a)/V"
    else:
        define = {"U": "sqrt_a*u/v", "V": "(c - d*a*u^2/v^2)*v"}
        image = "(c - d*U^2)/V"
    steps = [_change("invariants of -I", define, {"lam": {"V": image}})]
    tag = "V4_1/kernel-minus-I" if scaled else "V4_1/kernel-minus-I/unscaled-V"
    return ChainDefinition(tag=tag, title="quadratic K, -I acting trivially on K", group="V4_1", H="-I",
                           start=start, steps=steps)


def v4_1_kernel_lambda(epsilon1: int) -> ChainDefinition:
    tower = _free("a", "c", "d") + [_sqrt("sqrt_a", "a")]
    minus_I = {"sqrt_a": "-sqrt_a", "x": "c/x", "y": "d/y"}
    if epsilon1 == 1:
        start = _start(tower, {"lam": {"y": "d/y"}, "minus_I": minus_I})
        steps = [
            _change("invariants of lambda", {"X": "x", "Y": "y + d/y"}, {"minus_I": {"X": "c/X"}},
                    aliases=_conic_aliases("X", "c", "sqrt_a")),
            *_conic_checks("conic bundle", "minus_I", "c", "a"),
        ]
    else:
        f = "-c*(v^2 - 4*d)"
        start = _start(tower, {"lam": {"x": "-x", "y": "d/y"}, "minus_I": minus_I})
        steps = [
            _change("invariants of lambda", {"u": "x*(y - d/y)", "v": "y + d/y"}, {"minus_I": {"u": f"{f}/u"}},
                    aliases=_conic_aliases("u", f, "sqrt_a")),
            *_conic_checks("conic bundle", "minus_I", f, "a"),
        ]
    return ChainDefinition(tag=f"V4_1/kernel-lambda/epsilon1={epsilon1}",
                           title="quadratic K, lambda acting trivially on K", group="V4_1", H="lambda",
                           start=start, steps=steps)


def v4_1_kernel_minus_lambda(epsilon2: int) -> ChainDefinition:
    tower = _free("a", "c", "d") + [_sqrt("sqrt_a", "a")]
    minus_I = {"sqrt_a": "-sqrt_a", "x": "c/x", "y": "d/y"}
    if epsilon2 == 1:
        start = _start(tower, {"minus_lam": {"x": "c/x"}, "minus_I": minus_I})
        steps = [
            _change("invariants of -lambda", {"X": "x + c/x", "Y": "y"}, {"minus_I": {"Y": "d/Y"}},
                    aliases=_conic_aliases("Y", "d", "sqrt_a")),
            *_conic_checks("conic bundle", "minus_I", "d", "a"),
        ]
    else:
        f = "-d*(v^2 - 4*c)"
        start = _start(tower, {"minus_lam": {"x": "c/x", "y": "-y"}, "minus_I": minus_I})
        steps = [
            _change("invariants of -lambda", {"u": "y*(x - c/x)", "v": "x + c/x"}, {"minus_I": {"u": f"{f}/u"}},
                    aliases=_conic_aliases("u", f, "sqrt_a")),
            *_conic_checks("conic bundle", "minus_I", f, "a"),
        ]
    return ChainDefinition(tag=f"V4_1/kernel-minus-lambda/epsilon2={epsilon2}",
                           title="quadratic K, -lambda acting trivially on K", group="V4_1", H="-lambda",
                           start=start, steps=steps)


def _v4_2_trivial_kernel(scaled: bool) -> ChainDefinition:
    start = _start(_free("a", "b", "c") + [_sqrt("sqrt_a", "a"), _sqrt("sqrt_b", "b")], {
        "tau": {"sqrt_a": "-sqrt_a", "x": "y", "y": "x"},
        "minus_I": {"sqrt_b": "-sqrt_b", "x": "c/x", "y": "c/y"},
    }, {"u": "x + y", "v": "sqrt_a*(x - y)", "Uo": "sqrt_b*u/v"})
    if scaled:
        define = {"U": "Uo", "V": "(Uo^2/b - 1/a)*v/2"}
        image = "-c*(U^2/b - 1/a)/V"
    else:
        define = {"U": "Uo", "V": "(Uo^2 - 1/a)*v/2"}
        image = "-c*(U^2 - 1/a)/V"
    steps = [_change("invariants of tau", define, {"minus_I": {"V": image}}, keep=["a", "b", "c", "sqrt_b"])]
    tag = "V4_2/trivial-kernel" if scaled else "V4_2/trivial-kernel/unscaled-V"
    return ChainDefinition(tag=tag, title="biquadratic K, conic bundle over k(sqrt(b))", group="V4_2", H="1",
                           start=start, steps=steps)


def v4_2_kernel_minus_I() -> ChainDefinition:
    start = _start(_free("a", "c") + [_sqrt("sqrt_a", "a")], {
        "tau": {"sqrt_a": "-sqrt_a", "x": "y", "y": "x"},
        "minus_I": {"x": "c/x", "y": "c/y"},
    })
    steps = [
        _change("invariants of -I", {"X": INVERSION_X, "Y": INVERSION_Y}, {"tau": {"Y": "-Y"}},
                aliases={"Q": "sqrt_a*Y"}),
        *_fixed("invariants", ["tau", "minus_I"], "X", "Q"),
    ]
    return ChainDefinition(tag="V4_2/kernel-minus-I", title="quadratic K, -I acting trivially on K",
                           group="V4_2", H="-I", start=start, steps=steps)


def v4_2_kernel_tau() -> ChainDefinition:
    start = _start(_free("a", "c") + [_sqrt("sqrt_a", "a")], {
        "tau": {"x": "y", "y": "x"},
        "minus_I": {"sqrt_a": "-sqrt_a", "x": "c/x", "y": "c/y"},
    })
    steps = [_change("invariants of tau", {"u": "x*y/c", "v": "x + y"}, {"minus_I": {"u": "1/u", "v": "v/u"}})]
    return ChainDefinition(tag="V4_2/kernel-tau", title="quadratic K, tau acting trivially on K", group="V4_2",
                           H="tau", start=start, steps=steps)


def v4_2_kernel_minus_tau() -> ChainDefinition:
    start = _start(_free("a", "c") + [_sqrt("sqrt_a", "a")], {
        "tau": {"sqrt_a": "-sqrt_a", "x": "y", "y": "x"},
        "minus_I": {"sqrt_a": "-sqrt_a", "x": "c/x", "y": "c/y"},
    })
    steps = [
        _change("invariants of -tau", {"u": "(x + y)/(sqrt_a*(x - y))", "v": "sqrt_a*(x - y)"},
                {"minus_I": {"v": "4*a*c/((a*u^2 - 1)*v)"}}, aliases={"w": "v + 4*a*c/((a*u^2 - 1)*v)"}),
        *_fixed("invariants", ["tau", "minus_I"], "u", "w"),
    ]
    return ChainDefinition(tag="V4_2/kernel-minus-tau", title="quadratic K, -tau acting trivially on K",
                           group="V4_2", H="-tau", start=start, steps=steps)


# Dihedral group of order 8

SQRT_C_LOCATIONS = {
    # name: (sign of sigma on sqrt(c), sign of tau on sqrt(c))
    "sqrt-c-in-k": (1, 1),
    "sqrt-c-in-sigma-field": (1, -1),
    "sqrt-c-in-sigma^2-tau-field": (-1, 1),
    "sqrt-c-in-sigma^2-sigma*tau-field": (-1, -1),
}


def _sign(value: int, text: str) -> str:
    return text if value == 1 else f"-({text})"


def d4_sqrt_c_in_K(location: str, epsilon: int) -> ChainDefinition:
    s, t = SQRT_C_LOCATIONS[location]
    sigma = {"alpha": "beta", "beta": "-alpha", "x": "y", "y": "sc^2/x"}
    tau = {"alpha": "beta", "beta": "alpha", "x": _sign(epsilon, "y"), "y": _sign(epsilon, "x")}
    if s == -1:
        sigma["sc"] = "-sc"
    if t == -1:
        tau["sc"] = "-sc"
    swap = epsilon * t * s == 1
    start = _start(_free("alpha", "beta", "sc"), {"sigma": sigma, "tau": tau},
                   products={} if swap else {"sigma_tau": ["sigma", "tau"]})

    sigma_xy = {"X": "Y", "Y": "-X"} if s == 1 else {"X": "1/Y", "Y": "-1/X"}
    tau_xy = {"X": "Y", "Y": "X"} if epsilon * t == 1 else {"X": "1/Y", "Y": "1/X"}
    v_text = "beta*Y" if s == 1 else "beta/Y"
    steps: List = []
    if swap:
        steps += [
            _change("Cayley transform", {"X": CAYLEY_X, "Y": CAYLEY_Y}, {"sigma": sigma_xy, "tau": tau_xy}),
            _change("u, v", {"u": "alpha*X", "v": v_text}, {"sigma": {"u": "v", "v": "u"}, "tau": {"u": "v", "v": "u"}}),
            _change("A = alpha^2, B = beta^2", {"u": "u", "v": "v", "A": "alpha^2", "B": "beta^2"}, {
                "sigma": {"u": "v", "v": "u", "A": "B", "B": "A"},
                "tau": {"u": "v", "v": "u", "A": "B", "B": "A"},
            }, keep=["sc"]),
            _change("sigma-invariants", {"U": "u + v", "V": "(A - B)*(u - v)", "a": "A + B", "b": "(A - B)^2"},
                    keep=["sc"]),
        ]
    else:
        sc_images = {"sigma": s, "tau": t, "sigma_tau": s * t}
        rebase_images: Dict[str, Dict[str, ImageText]] = {
            "sigma": {"B": "-1/B", "beta": "-B*beta", "A": "-A"},
            "tau": {"B": "1/B", "beta": "B*beta", "A": "A"},
            "sigma_tau": {"B": "-B", "A": "-A"},
        }
        for gen, sign in sc_images.items():
            if sign == -1:
                rebase_images[gen]["sc"] = "-sc"
        steps += [
            _change("Cayley transform", {"X": CAYLEY_X, "Y": CAYLEY_Y}, {
                "sigma": sigma_xy, "tau": tau_xy, "sigma_tau": {"X": "-1/X", "Y": "1/Y"},
            }),
            _change("u, v", {"u": "alpha*X", "v": v_text}, {
                "sigma": {"u": "v", "v": "u"},
                "tau": {"u": "beta^2/v", "v": "alpha^2/u"},
                "sigma_tau": {"u": "alpha^2/u", "v": "beta^2/v"},
            }),
            _rebase("A = alpha*beta, B = alpha/beta", _free("B", "beta", "sc"), {"alpha": "B*beta"},
                    rebase_images, aliases={"A": "B*beta^2"}),
            _change("sigma-invariants", {"U": "u + v", "V": "A*(u - v)", "a": "A*(B + 1/B)", "g": "B - 1/B"}, {
                "sigma_tau": {
                    "g": "-g",
                    "U": "2*a^2*(a*U - g*V)/(a^2*U^2 - (g^2 + 4)*V^2)",
                    "V": "-2*a^3*(a*g*U - (g^2 + 4)*V)/((g^2 + 4)*(a^2*U^2 - (g^2 + 4)*V^2))",
                },
            }, keep=["sc"], generators=["sigma", "sigma_tau"]),
            _change("S, T", {"S": "(g^2 + 4)*(a*U - g*V)/(2*a*U)", "T": "a*g/U"}, {
                "sigma_tau": {"S": "(g^2 + 4)/S", "T": "a*(S + (g^2 + 4)/S - g^2 - 4)/T"},
            }),
        ]
    return ChainDefinition(tag=f"D4/trivial-kernel/{location}/epsilon={epsilon}",
                           title=f"sqrt(c) in K ({location}), tau with epsilon = {epsilon}", group="D4", H="1",
                           start=start, steps=steps)


def d4_sqrt_c_outside_K(epsilon: int) -> ChainDefinition:
    tau = {"alpha": "beta", "beta": "alpha", "x": _sign(epsilon, "y"), "y": _sign(epsilon, "x")}
    start = _start(_free("alpha", "beta", "c") + [_sqrt("sc", "c")], {
        "sigma": {"alpha": "beta", "beta": "-alpha", "x": "y", "y": "c/x"},
        "tau": tau,
        "phi_c": {"sc": "-sc"},
    })
    u_image = {"U": "2*b*(a*U - V)/(b*U^2 - V^2)", "V": "2*b*(b*U - a*V)/(b*U^2 - V^2)"}
    st_image = {"s": "(a^2 - b)/s", "t": "(2*(s + (a^2 - b)/s) + 4*a)/t"}
    steps: List = [
        _change("Cayley transform", {"X": CAYLEY_X, "Y": CAYLEY_Y}, {
            "sigma": {"X": "Y", "Y": "-X"},
            "tau": {"X": "Y", "Y": "X"} if epsilon == 1 else {"X": "1/Y", "Y": "1/X"},
            "phi_c": {"X": "1/X", "Y": "1/Y"},
        }),
        _change("u, v", {"u": "alpha*X", "v": "beta*Y"}, {
            "sigma": {"u": "v", "v": "u"},
            "tau": {"u": "v", "v": "u"} if epsilon == 1 else {"u": "beta^2/v", "v": "alpha^2/u"},
            "phi_c": {"u": "alpha^2/u", "v": "beta^2/v"},
        }),
    ]
    if epsilon == 1:
        steps += [
            _change("A = alpha^2, B = beta^2", {"u": "u", "v": "v", "A": "alpha^2", "B": "beta^2"}, {
                "sigma": {"u": "v", "v": "u", "A": "B", "B": "A"},
                "tau": {"u": "v", "v": "u", "A": "B", "B": "A"},
                "phi_c": {"u": "A/u", "v": "B/v"},
            }, keep=["c", "sc"]),
            _change("sigma-invariants", {"U": "u + v", "V": "(A - B)*(u - v)", "a": "A + B", "b": "(A - B)^2"},
                    {"phi_c": u_image}, keep=["c", "sc"]),
            _change("s, t", {"s": "(b*U - a*V)/V", "t": "(b*U^2 - V^2)/(b*U - a*V)"}, {"phi_c": st_image}),
        ]
    else:
        steps += [
            _change("A = alpha^2, B = beta^2, C = alpha*beta*sqrt(c)",
                    {"u": "u", "v": "v", "A": "alpha^2", "B": "beta^2", "C": "alpha*beta*sc"}, {
                        "sigma": {"u": "v", "v": "u", "A": "B", "B": "A", "C": "-C"},
                        "tau": {"u": "B/v", "v": "A/u", "A": "B", "B": "A"},
                    }, keep=["c"], tower=[_sqrt("C", "A*B*c")], generators=["sigma", "tau"]),
            _change("sigma-invariants", {
                "U": "u + v", "V": "(A - B)*(u - v)", "a": "A + B", "b": "(A - B)^2", "gamma": "2*(A - B)*C",
            }, {"tau": {"gamma": "-gamma", **u_image}}, keep=["c"], tower=[_sqrt("gamma", "b*c*(a^2 - b)")]),
            _change("s, t", {"s": "(b*U - a*V)/V", "t": "(b*U^2 - V^2)/(b*U - a*V)"}, {"tau": st_image}),
        ]
    return ChainDefinition(tag=f"D4/trivial-kernel/sqrt-c-outside-K/epsilon={epsilon}",
                           title=f"sqrt(c) adjoined to K, tau with epsilon = {epsilon}", group="D4", H="1",
                           start=start, steps=steps)


def _d4_inversion_start(sigma_sqrt: bool, tau_sqrt: bool, epsilon: int, tower: List[TowerGenerator],
                      tau_root: str = "sqrt_a", products: Optional[Dict[str, List[str]]] = None) -> ChainStart:
    sigma = {"x": "y", "y": "c/x"}
    tau = {"x": _sign(epsilon, "y"), "y": _sign(epsilon, "x")}
    if sigma_sqrt:
        sigma["sqrt_a"] = "-sqrt_a"
    if tau_sqrt:
        tau[tau_root] = f"-{tau_root}"
    return _start(tower, {"sigma": sigma, "tau": tau}, products=products)


def _d4_inversion_step(epsilon: int, extra: Optional[Dict[str, Dict[str, str]]] = None) -> ChangeStep:
    images = {
        "sigma": {"X": "c/X", "Y": "-c/Y"},
        "tau": {"X": _sign(epsilon, "X"), "Y": _sign(-epsilon, "Y")},
        **(extra or {}),
    }
    return _change("invariants of -I", {"X": INVERSION_X, "Y": INVERSION_Y}, images)


def d4_kernel_minus_I(epsilon: int) -> ChainDefinition:
    tower = _free("a", "b", "c") + [_sqrt("sqrt_a", "a"), _sqrt("sqrt_b", "b")]
    start = _d4_inversion_start(True, True, epsilon, tower, tau_root="sqrt_b")
    if epsilon == 1:
        define, sigma = {"S": "X", "T": "sqrt_b*Y"}, {"S": "c/S", "T": "-b*c/T"}
    else:
        define, sigma = {"S": "sqrt_b*X", "T": "Y"}, {"S": "b*c/S", "T": "-c/T"}
    steps = [
        _d4_inversion_step(epsilon),
        _change("invariants of tau", define, {"sigma": sigma}, keep=["a", "b", "c", "sqrt_a"]),
    ]
    return ChainDefinition(tag=f"D4/kernel-minus-I/epsilon={epsilon}",
                           title=f"biquadratic K, -I acting trivially on K, epsilon = {epsilon}", group="D4",
                           H="-I", start=start, steps=steps)


def d4_kernel_minus_I_tau_sigma(epsilon: int) -> ChainDefinition:
    start = _d4_inversion_start(True, True, epsilon, _free("a", "c") + [_sqrt("sqrt_a", "a")],
                              products={"tau_sigma": ["tau", "sigma"]})
    ec, plus, minus = ("c", "+", "-") if epsilon == 1 else ("(-c)", "-", "+")
    steps = [
        _d4_inversion_step(epsilon, {"tau_sigma": {"X": f"{ec}/X", "Y": f"{ec}/Y"}}),
        _change("invariants of tau*sigma", {"S": f"(X*Y + {ec})/(X + Y)", "T": f"(X*Y - {ec})/(X - Y)"}, {
            "sigma": {"S": _sign(-epsilon, "T"), "T": _sign(-epsilon, "S")},
            "tau": {"S": _sign(-epsilon, "T"), "T": _sign(-epsilon, "S")},
        }, aliases={"P": f"S {minus} T", "Q": f"sqrt_a*(S {plus} T)"}),
        *_fixed("invariants", ["sigma", "tau", "tau_sigma"], "P", "Q"),
    ]
    return ChainDefinition(tag=f"D4/kernel-minus-I-tau-sigma/epsilon={epsilon}",
                           title=f"quadratic K, <-I, tau*sigma> acting trivially on K, epsilon = {epsilon}",
                           group="D4", H="-I,tau*sigma", start=start, steps=steps)


def d4_kernel_minus_I_tau(epsilon: int) -> ChainDefinition:
    start = _d4_inversion_start(True, False, epsilon, _free("a", "c") + [_sqrt("sqrt_a", "a")])
    if epsilon == 1:
        define, sigma = {"S": "X", "T": "Y^2/c"}, {"S": "c/S", "T": "1/T"}
        aliases = {"Tq": "sqrt_a*(T + 1)/(T - 1)"}
    else:
        define, sigma = {"S": "X^2/c", "T": "Y"}, {"S": "1/S", "T": "-c/T"}
        aliases = {"Tq": "sqrt_a*(S + 1)/(S - 1)"}
    steps = [
        _d4_inversion_step(epsilon),
        _change("invariants of tau", define, {"sigma": sigma}, aliases=aliases),
        *_fixed("Cayley coordinate", ["sigma"], "Tq"),
    ]
    return ChainDefinition(tag=f"D4/kernel-minus-I-tau/epsilon={epsilon}",
                           title=f"quadratic K, <-I, tau> acting trivially on K, epsilon = {epsilon}",
                           group="D4", H="-I,tau", start=start, steps=steps)


def d4_kernel_sigma(epsilon: int) -> ChainDefinition:
    start = _d4_inversion_start(False, True, epsilon, _free("a", "c") + [_sqrt("sqrt_a", "a")])
    if epsilon == 1:
        define, sigma = {"S": "X", "T": "sqrt_a*Y"}, {"S": "c/S", "T": "-a*c/T"}
    else:
        define, sigma = {"S": "sqrt_a*X", "T": "Y"}, {"S": "a*c/S", "T": "-c/T"}
    steps = [
        _d4_inversion_step(epsilon),
        _change("invariants of tau", define, {"sigma": sigma}, keep=["a", "c"]),
    ]
    return ChainDefinition(tag=f"D4/kernel-sigma/epsilon={epsilon}",
                           title=f"quadratic K, sigma acting trivially on K, epsilon = {epsilon}", group="D4",
                           H="sigma", start=start, steps=steps)


# Registry

@dataclass(frozen=True)
class CaseEntry:
    tag: str
    group: str
    H: str
    builder: Callable[[], ChainDefinition]
    holds: bool = True


CASES: Dict[str, CaseEntry] = {}
# Formulas whose V coordinate lacks the 1/a (resp. 1/b) scaling; kept to show the identity fails
UNSCALED_VARIANTS: Dict[str, CaseEntry] = {}


def _register(builder: Callable[[], ChainDefinition], table: Optional[Dict[str, CaseEntry]] = None,
              holds: bool = True) -> None:
    chain = builder()
    target = CASES if table is None else table
    target[chain.tag] = CaseEntry(chain.tag, chain.group, chain.H, builder, holds)


for _builder in (
    c2_1_trivial_kernel, partial(c2_2, 1), partial(c2_2, -1), c2_3_normalize,
    c3_normalize, c3_omega_in_k, c3_cube_root_in_k, c3_cyclic_cubic,
    c4_normalize, c4_sqrt_c_in_k, c4_sqrt_c_in_quadratic_subfield, c4_sqrt_c_outside_K, c4_kernel_sigma2,
    c6_normalize,
    v4_1_trivial_kernel, partial(_v4_1_minus_I, True),
    partial(v4_1_kernel_lambda, 1), partial(v4_1_kernel_lambda, -1),
    partial(v4_1_kernel_minus_lambda, 1), partial(v4_1_kernel_minus_lambda, -1),
    partial(_v4_2_trivial_kernel, True), v4_2_kernel_minus_I, v4_2_kernel_tau, v4_2_kernel_minus_tau,
    s3_1_normalize, s3_cube_root_in_k, s3_omega_in_k_norm, s3_omega_in_k_conic,
    s3_omega_in_K_norm, s3_omega_in_K_trace, s3_omega_outside_K, s3_kernel_rho2,
    s3_2_normalize,
    *[partial(d4_sqrt_c_in_K, loc, eps) for loc in SQRT_C_LOCATIONS for eps in (1, -1)],
    partial(d4_sqrt_c_outside_K, 1), partial(d4_sqrt_c_outside_K, -1),
    *[partial(f, eps) for f in (d4_kernel_minus_I, d4_kernel_minus_I_tau_sigma, d4_kernel_minus_I_tau,
                                d4_kernel_sigma) for eps in (1, -1)],
    d6_normalize,
):
    _register(_builder)

_register(partial(_v4_1_minus_I, False), UNSCALED_VARIANTS, holds=False)
_register(partial(_v4_2_trivial_kernel, False), UNSCALED_VARIANTS, holds=False)


def list_cases(group: Optional[str] = None) -> List[str]:
    return [tag for tag, entry in CASES.items() if group is None or entry.group == group]


def chain_definition(tag: str) -> ChainDefinition:
    entry = CASES.get(tag) or UNSCALED_VARIANTS.get(tag)
    if entry is None:
        raise UnknownCase(tag, list(CASES))
    return entry.builder()


def case_chain(tag: str, params: Optional[Mapping[str, object]] = None, strict: bool = True) -> TransformChain:
    """
    Build and verify the chain registered under tag.

    Args:
        tag: Case tag from list_cases()
        params: Numeric values for free parameters of the starting level
        strict: Raise VerificationFailure on the first failing identity

    Returns:
        The verified chain with every identity and its outcome
    """
    return verify_chain(chain_definition(tag), params, strict)


@cached("case_chains")
def _verify_symbolic(tag: str) -> TransformChain:
    return case_chain(tag, strict=False)


def verify_case(tag: str) -> TransformChain:
    """Symbolic verification, memoized per tag."""
    return _verify_symbolic(tag)


def verify_all(tags: Optional[Sequence[str]] = None) -> List[TransformChain]:
    results = []
    for tag in tags or list_cases():
        chain = verify_case(tag)
        if not chain.passed:
            logger.error(f"Case {tag}: {len(chain.failures)} identities failed")
        results.append(chain)
    logger.info(f"Verified {len(results)} cases, {sum(r.identity_count for r in results)} identities")
    return results
