import random
from itertools import product

import pytest
from hypothesis import given, settings

from modalproof import build as B
from modalproof.calculus import MetaSequent, RuleSchema, axiom_rule, proof_hash, builtin, check_proof, instantiate, rule
from modalproof.classify import (
    Mismatch,
    MultiConclusion,
    NotConstructiveCalculus,
    NotInRuleClass,
    axiom_name,
    axiom_to_rule_proof,
    classify_formula,
    classify_rule,
    lj_plus,
    normalize_to_ck_plus_c,
    rule_to_axiom,
    subformula_at,
)
from modalproof.core import (
    BOT_F,
    TOP_F,
    And,
    Angle,
    Atom,
    Box,
    Dia,
    FMultiset,
    Imp,
    Or,
    Substitution,
    big_and,
    boxes,
    dias,
    parse_formula,
    print_formula,
)
from modalproof.gen import random_formula, random_general_rule, random_proof
from modalproof.rulebook import constructive_table, first_five_non_examples, named_modal_non_examples

from conftest import formulas

P = parse_formula
CLASSES = ("basic", "almostPositive", "constructive", "harrop", "modalHorn", "implicationalHorn")


# ---------------------------------------------------------------------------
# Closure oracle: every class generated bottom-up by size from its definition.


def _by_size(max_size, atoms):
    """All formulas of each size over atoms, top, bot, the five connectives."""
    leaves = [Atom(a) for a in atoms] + [TOP_F, BOT_F]
    out = {1: leaves}
    for n in range(2, max_size + 1):
        fs = [c(a) for c in (Box, Dia) for a in out[n - 1]]
        for k in range(1, n - 1):
            for a, b in product(out[k], out[n - 1 - k]):
                fs.extend((And(a, b), Or(a, b), Imp(a, b)))
        out[n] = fs
    return out


def _closure(max_size, atoms):
    """Each class as the least set closed under its formation rules."""
    ats = [Atom(a) for a in atoms]
    S = {c: {} for c in CLASSES}  # class -> size -> set

    def members(c, n):
        return S[c].get(n, set())

    def bodies(n, modal):
        # conjunctions of (dia^k) atoms, any bracketing
        out = set()
        if n == 1:
            return set(ats)
        if modal:
            out |= {Dia(x) for x in bodies_cache[(n - 1, modal)] if _is_dia_atom(x)}
        for k in range(1, n - 1):
            for a, b in product(bodies_cache[(k, modal)], bodies_cache[(n - 1 - k, modal)]):
                out.add(And(a, b))
        return out

    bodies_cache = {}
    for n in range(1, max_size + 1):
        for modal in (False, True):
            bodies_cache[(n, modal)] = bodies(n, modal)
        if n == 1:
            base = set(ats) | {TOP_F, BOT_F}
            for c in ("basic", "almostPositive", "constructive", "harrop"):
                S[c][1] = set(base)
            S["modalHorn"][1] = set(ats) | {BOT_F}
            S["implicationalHorn"][1] = set(ats) | {BOT_F}
            continue
        for c in CLASSES:
            S[c][n] = set()
        splits = [(k, n - 1 - k) for k in range(1, n - 1)]
        S["basic"][n] |= {Dia(a) for a in members("basic", n - 1)}
        S["almostPositive"][n] |= {u(a) for u in (Box, Dia) for a in members("almostPositive", n - 1)}
        S["constructive"][n] |= {Box(a) for a in members("constructive", n - 1)}
        S["harrop"][n] |= {Box(a) for a in members("harrop", n - 1)}
        S["modalHorn"][n] |= {Box(a) for a in members("modalHorn", n - 1)}
        for i, j in splits:
            for a, b in product(members("basic", i), members("basic", j)):
                S["basic"][n] |= {And(a, b), Or(a, b)}
            for a, b in product(members("almostPositive", i), members("almostPositive", j)):
                S["almostPositive"][n] |= {And(a, b), Or(a, b)}
            for a, b in product(members("basic", i), members("almostPositive", j)):
                S["almostPositive"][n].add(Imp(a, b))
            for a, b in product(members("constructive", i), members("constructive", j)):
                S["constructive"][n].add(And(a, b))
            for a, b in product(members("almostPositive", i), members("constructive", j)):
                S["constructive"][n].add(Imp(a, b))
            for a, b in product(members("harrop", i), members("harrop", j)):
                S["harrop"][n].add(And(a, b))
            for a, b in product(all_by_size[i], members("harrop", j)):
                S["harrop"][n].add(Imp(a, b))
            for a, b in product(bodies_cache[(i, True)], members("modalHorn", j)):
                S["modalHorn"][n].add(Imp(a, b))
            if j == 1:
                for a, b in product(bodies_cache[(i, False)], set(ats) | {BOT_F}):
                    S["implicationalHorn"][n].add(Imp(a, b))
        # basic formulas are almost positive and constructive
        for m in range(1, n + 1):
            S["almostPositive"][m] |= S["basic"][m]
            S["constructive"][m] |= S["basic"][m]
    return S


def _is_dia_atom(x):
    while x.kind == Dia(TOP_F).kind:
        x = x.body
    return x.kind in (Atom("p").kind, Angle(Atom("p")).kind)


all_by_size = _by_size(7, ("p", "q"))


def test_recognizers_match_closure_oracle():
    S = _closure(7, ("p", "q"))
    checked = 0
    for n, fs in all_by_size.items():
        for f in fs:
            d = classify_formula(f).as_dict()
            for c in CLASSES:
                assert d[c] == (f in S[c][n]), (print_formula(f), c)
            checked += 1
    assert checked == sum(len(v) for v in all_by_size.values())


@settings(max_examples=400, deadline=None)
@given(formulas(max_leaves=14))
def test_class_inclusions(f):
    v = classify_formula(f)
    if v.basic:
        assert v.almostPositive and v.constructive
    if v.implicationalHorn:
        assert v.modalHorn


@settings(max_examples=200, deadline=None)
@given(formulas(max_leaves=14))
def test_witness_points_at_a_subformula(f):
    v = classify_formula(f)
    for c in CLASSES:
        if not v.as_dict()[c]:
            sub = subformula_at(f, v.witness[c])
            assert sub is not None


# ---------------------------------------------------------------------------
# Modal prefix families


@pytest.mark.parametrize("m,n", [(m, n) for m in range(3) for n in range(3)])
def test_dia_box_family(m, n):
    v = classify_formula(dias(boxes(P("p"), n), m))
    assert v.almostPositive
    assert v.basic == (n == 0)
    # dia^(m+1) box^(n+1) p is not constructive
    assert v.constructive == (m == 0 or n == 0)


@pytest.mark.parametrize("m,n", [(m, n) for m in range(3) for n in range(3)])
def test_box_dia_family(m, n):
    v = classify_formula(boxes(dias(P("p"), n), m))
    assert v.almostPositive and v.constructive


EXAMPLE_TABLE = {
    "basic": (["p & q", "p | q", "dia dia p"], ["~p", "p -> q", "box p"]),
    "almostPositive": (["~p", "p | ~p"], ["~~p", "(p -> q) -> r", "box p -> q"]),
    "constructive": (["~~p", "(p -> q) -> r", "box (dia p | q)"], ["p | ~p", "dia box p"]),
}


@pytest.mark.parametrize("cls", sorted(EXAMPLE_TABLE))
def test_example_table(cls):
    pos, neg = EXAMPLE_TABLE[cls]
    for t in pos:
        assert classify_formula(P(t)).as_dict()[cls], t
    for t in neg:
        assert not classify_formula(P(t)).as_dict()[cls], t


def test_neither_almost_positive_nor_constructive():
    for t in ["((p -> q) -> r) -> s", "(box p -> q) -> r"]:
        v = classify_formula(P(t))
        assert not v.almostPositive and not v.constructive


def test_simple_formulas_both_classes():
    for t in ["p", "p & q", "p | q", "p -> q", "~p", "box p", "dia p"]:
        v = classify_formula(P(t))
        assert v.almostPositive and v.constructive


def test_horn_classes():
    assert classify_formula(P("<a> & <b> -> <c>")).implicationalHorn
    assert classify_formula(P("box (dia <a> & <b> -> box <c>)")).modalHorn
    assert not classify_formula(P("box (dia <a> & <b> -> box <c>)")).implicationalHorn
    assert not classify_formula(P("top -> p")).modalHorn
    assert not classify_formula(P("(p -> q) -> r")).modalHorn


# ---------------------------------------------------------------------------
# Rules


def test_cut_is_left_constructive():
    assert classify_rule(builtin("LJ").rule("cut")).kind == "LeftConstructive"


def test_ga_rule_right_constructive():
    for k, l, m, n in [(1, 1, 1, 1), (0, 2, 1, 0), (2, 0, 0, 2)]:
        r = rule("ga", [f"G => {print_formula(dias(boxes(P('p'), l), k))}"], f"G => {print_formula(boxes(dias(P('p'), n), m))}")
        assert classify_rule(r).kind == "RightConstructive"


def test_excluded_middle_axiom_not_constructive():
    v = classify_rule(rule("em", [], "G => p | ~p"))
    assert v.kind == "NotConstructive" and not v.constructive


def test_modal_k_recognized():
    assert classify_rule(builtin("CK").rule("Kbox")).kind == "ModalK"
    assert classify_rule(builtin("CK").rule("Kdia")).kind == "ModalK"


def test_multi_conclusion_rejected():
    with pytest.raises(MultiConclusion):
        classify_rule(RuleSchema("mc", (), MetaSequent((("G", False),), (), (P("p"), P("q")))))


def test_rulebook_verdicts():
    for r in constructive_table():
        assert classify_rule(r).constructive, r.name
    for r in first_five_non_examples() + named_modal_non_examples():
        assert classify_rule(r).kind == "NotConstructive", r.name


def test_all_lj_rules_constructive():
    for r in builtin("LJ").rules:
        assert classify_rule(r).constructive, r.name


# ---------------------------------------------------------------------------
# The axiom of a rule


def test_axiom_of_right_disjunction():
    ax, pi = rule_to_axiom(builtin("LJ").rule("Ror1"))
    assert print_formula(ax) == "(top -> p) & top -> p | q"
    assert check_proof(lj_plus([builtin("LJ").rule("Ror1")]), pi).ok


def test_axiom_of_zero_premise_left_rule():
    r = rule("eta", [], "G ; p, q => D")
    ax, pi = rule_to_axiom(r)
    # empty index sets: the implication part is top and the succedent is bot
    assert ax is Imp(big_and([TOP_F, P("p"), P("q")]), BOT_F)
    assert check_proof(lj_plus([r]), pi).ok


def test_axiom_of_cut_round_trip():
    cut = builtin("LJ").rule("cut")
    ax, pi = rule_to_axiom(cut)
    assert check_proof(lj_plus([cut]), pi).ok
    s = Substitution.make({"p": P("a & b")}, {"G": [P("c")], "D": [P("d")]})
    prem, concl = instantiate(cut, s)
    d = axiom_to_rule_proof(ax, cut, s)
    g = lj_plus([axiom_rule(ax, axiom_name(ax))])
    assert check_proof(g, d, prem).ok and d.conclusion == concl


def test_axiom_to_rule_right_disjunction():
    ror = builtin("LJ").rule("Ror1")
    ax, _ = rule_to_axiom(ror)
    s = Substitution.make({"p": P("p"), "q": P("q")}, {"G": [P("s")]})
    prem, concl = instantiate(ror, s)
    d = axiom_to_rule_proof(ax, ror, s)
    assert check_proof(lj_plus([axiom_rule(ax, axiom_name(ax))]), d, prem).ok
    assert str(concl) == str(d.conclusion)


def test_axiom_mismatch():
    with pytest.raises(Mismatch):
        axiom_to_rule_proof(P("p"), builtin("LJ").rule("Ror1"), Substitution.make({}, {"G": []}))


def test_boxed_context_not_in_rule_class():
    with pytest.raises(NotInRuleClass):
        rule_to_axiom(builtin("CK").rule("Kbox"))


def _rule_size(r):
    return sum(f.size for m in (*r.premises, r.conclusion) for f in (*m.formulas, *(m.succ if isinstance(m.succ, tuple) else ())))


def random_rules(seed, count):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        r = random_general_rule(rng, name=f"R{len(out)}")
        if _rule_size(r) <= 40:
            out.append((r, rng))
    return out


@pytest.mark.parametrize("seed", range(3))
def test_random_rules_axiom_equivalence(seed):
    verdicts = set()
    for r, rng in random_rules(seed, 20):
        ax, pi = rule_to_axiom(r)
        assert check_proof(lj_plus([r]), pi).ok
        assert classify_rule(r).constructive == classify_formula(ax).constructive
        verdicts.add(classify_rule(r).constructive)
        s = Substitution.make(
            {a: random_formula(rng, 3) for a in r.placeholders()},
            {v: FMultiset([random_formula(rng, 2)]) for v in r.context_vars()},
        )
        prem, concl = instantiate(r, s)
        d = axiom_to_rule_proof(ax, r, s)
        assert check_proof(lj_plus([axiom_rule(ax, axiom_name(ax))]), d, prem).ok
        assert d.conclusion == concl
    assert verdicts == {True, False}


# ---------------------------------------------------------------------------
# Normal form


def test_normal_form_of_axiomatic_extension():
    nf = normalize_to_ck_plus_c(builtin("CK+T_a"))
    assert nf.cset == [P("box p -> p")]
    pi = B.ror1(B.rimp(B.idp(FMultiset(), P("box p")), P("box p")), P("q"))
    assert proof_hash(nf.simulate(pi)) == proof_hash(pi)


def test_normal_form_with_extra_rule():
    extra = rule("strip", ["G => box p"], "G => p")
    g = builtin("CK").extend([extra], "CK+strip")
    nf = normalize_to_ck_plus_c(g)
    ax, _ = rule_to_axiom(extra)
    assert ax in nf.cset
    rng = random.Random(1)
    for _ in range(25):
        pi = random_proof(rng, g, rng.randint(3, 15))
        assert check_proof(g, pi).ok
        sim = nf.simulate(pi)
        assert check_proof(nf.calculus, sim).ok and sim.conclusion == pi.conclusion
        back = nf.unsimulate(sim)
        assert check_proof(g, back).ok and back.conclusion == pi.conclusion


def test_normal_form_rejects_non_constructive():
    g = builtin("CK").extend([rule("em", [], "G => p | ~p")], "CK+em")
    with pytest.raises(NotConstructiveCalculus):
        normalize_to_ck_plus_c(g)


def test_normal_form_requires_base_rules():
    lj = builtin("LJ")
    g = type(lj)("partial", lj.lang, tuple(r for r in lj.rules if r.name != "cut"))
    with pytest.raises(NotConstructiveCalculus):
        normalize_to_ck_plus_c(g)
