"""A library of named rules: the constructive modal rules corresponding to the
standard axioms, and rules that fail the constructive templates."""

from __future__ import annotations

from .calculus import MetaSequent, RuleSchema, rule
from .core import (
    BOT_F,
    And,
    Atom,
    Box,
    Dia,
    Formula,
    Neg,
    Or,
    big_or,
    boxes,
    dias,
    print_formula,
)


def _t(f: Formula) -> str:
    return print_formula(f)


def _bd(n: int) -> Formula:
    f = BOT_F
    for i in range(n):
        pi = Atom(f"p{i}")
        f = Or(pi, Box(Or(Dia(Neg(pi)), f)))
    return f


def _fixed_constructive() -> list[RuleSchema]:
    return [
        rule("r_dia_bot", ["G => dia bot"], "G => bot"),
        rule("r_dia_or", ["G => dia (p | q)"], "G => dia p | dia q"),
        rule("r_box_imp", ["G ; dia p => box q"], "G => box (p -> q)"),
        rule("r_D", ["G => box p"], "G => dia p"),
        rule("a_dia_bot", [], "G ; dia bot => D"),
        rule("a_D", [], "G ; box p => dia p"),
        rule("l_dia_or", ["G ; dia p => D", "G ; dia q => D"], "G ; dia (p | q) => D"),
        rule("r_T_a", ["G => box p"], "G => p"),
        rule("r_T_b", ["G => p"], "G => dia p"),
        rule("r_4_a", ["G => box p"], "G => box box p"),
        rule("r_4_b", ["G => dia dia p"], "G => dia p"),
        rule("r_B_a", ["G => dia box p"], "G => p"),
        rule("r_B_b", ["G => p"], "G => box dia p"),
        rule("r_5_a", ["G => dia box p"], "G => box p"),
        rule("r_5_b", ["G => dia p"], "G => box dia p"),
        rule("r_ga", ["G => dia box p"], "G => box dia p"),
        rule("l_T_a", ["G ; p => D"], "G ; box p => D"),
        rule("r_c_a", ["G => p"], "G => box p"),
        rule("l_c_b", ["G ; p => D"], "G ; dia p => D"),
        rule("a_D_a", [], "G ; box bot => D"),
        rule("a_D_b", [], "G => dia top"),
        rule("r_dot2", ["G => dia (p & box q)"], "G => box (p | dia q)"),
        rule("r_d1", ["G => ~dia p"], "G => box ~p"),
        rule("r_d2", ["G => box ~p"], "G => ~dia p"),
        rule("r_d3", ["G => dia ~p"], "G => ~box p"),
        rule("r_d1_left", ["G ; dia p => bot"], "G => box ~p"),
        rule("l_d2", ["G => box ~p"], "G ; dia p => D"),
        rule("l_d3", ["G => dia ~p"], "G ; box p => D"),
        rule("r_H", ["G => p"], "G => box (dia p -> p)"),
        rule("r_dir", ["G => dia (box p & q)"], "G => box (dia p | q)"),
    ]


def _param_constructive(n: int, m: int, klmn: tuple[int, int, int, int], r: int) -> list[RuleSchema]:
    p = Atom("p")
    k, l, mm, nn = klmn
    out = [
        rule(f"r_den_{n}_a", [f"G => {_t(boxes(p, n + 1))}"], f"G => {_t(boxes(p, n))}"),
        rule(f"r_den_{n}_b", [f"G => {_t(dias(p, n))}"], f"G => {_t(dias(p, n + 1))}"),
        rule(f"r_4_{n}_{m}_a", [f"G => {_t(boxes(p, n))}"], f"G => {_t(boxes(p, m))}"),
        rule(f"r_4_{n}_{m}_b", [f"G => {_t(dias(p, m))}"], f"G => {_t(dias(p, n))}"),
        rule(
            f"r_tra_{n}_a",
            [f"G => {_t(boxes(p, i))}" for i in range(n + 1)],
            f"G => {_t(boxes(p, n + 1))}",
        ),
        rule(
            f"r_tra_{n}_b",
            [f"G => {_t(dias(p, n + 1))}"],
            f"G => {_t(big_or(dias(p, i) for i in range(n + 1)))}",
        ),
        rule(
            f"r_ga_{k}_{l}_{mm}_{nn}",
            [f"G => {_t(dias(boxes(p, l), k))}"],
            f"G => {_t(boxes(dias(p, nn), mm))}",
        ),
        rule(
            f"l_tra_{n}_b",
            [f"G ; {_t(dias(p, i))} => D" for i in range(n + 1)],
            f"G ; {_t(dias(p, n + 1))} => D",
        ),
    ]
    ps = [Atom(f"p{i}") for i in range(r + 1)]
    pairs = [(i, j) for i in range(r + 1) for j in range(r + 1) if i != j]
    out.append(
        rule(
            f"l_bw_{r}",
            [f"G ; {_t(Dia(And(ps[i], Or(ps[j], Dia(ps[j])))))} => D" for i, j in pairs],
            "G ; " + ", ".join(_t(Dia(x)) for x in ps) + " => D",
        )
    )
    out.append(
        rule(
            f"r_bw_{r}",
            [f"G => {_t(Dia(x))}" for x in ps],
            "G => " + _t(big_or(Dia(And(ps[i], Or(ps[j], Dia(ps[j])))) for i, j in pairs)),
        )
    )
    pn = Atom(f"p{n}")
    out.append(rule(f"l_bd_{n}", [f"G ; {_t(pn)} => D"], f"G ; {_t(Dia(And(Box(pn), _bd(n))))} => D"))
    return out


def constructive_table(max_n: int = 2) -> list[RuleSchema]:
    """The constructive rule table with its parameterized families instantiated
    for small parameters."""
    out = _fixed_constructive()
    seen = {r.name for r in out}
    for n in range(max_n + 1):
        for m in range(n + 1, max_n + 2):
            for klmn in ((0, 0, 0, 0), (1, 1, 1, 1), (2, 0, 1, 2), (0, 2, 2, 0), (n, m, n, m)):
                for r in (1, 2):
                    for x in _param_constructive(n, m, klmn, r):
                        if x.name not in seen:
                            seen.add(x.name)
                            out.append(x)
    return out


def non_constructive_rules() -> list[RuleSchema]:
    """Rules that fail the constructive templates."""
    return [
        rule("excluded_middle", [], "G => p | ~p"),
        rule("dneg_elim", ["G => ~~p"], "G => p"),
        rule("raa", ["G ; ~p => bot"], "G => p"),
        rule("em_cases", ["G ; p => D", "G ; ~p => D"], "G => D"),
        rule("raa_cases", ["G ; ~p => bot", "G ; p => D"], "G => D"),
        rule("sc", ["G ; box (box p -> q) => D", "G ; box (box q -> p) => D"], "G => D"),
        rule("ma", ["G => box dia p"], "G => dia box p"),
        rule("la", ["G => box (box p -> p)"], "G => box p"),
        rule("grz", ["G => box (box (p -> box p) -> p)"], "G => p"),
        rule("neg_box", ["G => ~box p"], "G => dia ~p"),
        rule("dot1", ["G => box dia p", "G => dia p"], "G => dia box p | box p"),
        rule("dia_top_or_box_bot", [], "G => dia top | box bot"),
    ]


def first_five_non_examples() -> list[RuleSchema]:
    return non_constructive_rules()[:5]


def named_modal_non_examples() -> list[RuleSchema]:
    return non_constructive_rules()[5:]


__all__ = [
    "constructive_table",
    "non_constructive_rules",
    "first_five_non_examples",
    "named_modal_non_examples",
    "MetaSequent",
]
