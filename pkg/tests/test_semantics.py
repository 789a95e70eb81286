import itertools
import random

import pytest
from hypothesis import given, settings

from modalproof.calculus import builtin, table_axiom
from modalproof.core import TOP_F, ModalProofError, Angle, AngledAtomPresent, Atom, Box, Dia, LanguageTag, atoms_of, parse_formula
from modalproof.semantics import OneNodeModel, classify_tness, eval_one_node, falsifying_valuation, frame_valid

from conftest import formulas, kripke_eval, table_one

P = parse_formula
IRR = ({0: [0]}, {0: []})
REF = ({0: [0]}, {0: [0]})


def test_dia_top_false_on_irreflexive():
    assert not eval_one_node(P("dia top"), OneNodeModel(False, frozenset()))


def test_box_bot_true_on_irreflexive():
    assert eval_one_node(P("box bot"), OneNodeModel(False, frozenset()))


@pytest.mark.parametrize("k,l,m,n", list(itertools.product(range(3), repeat=4)))
def test_ga_on_reflexive_node(k, l, m, n):
    assert frame_valid(table_axiom(f"ga_{k}_{l}_{m}_{n}"), True)
    # irreflexive validity exactly when k or m is nonzero, or the axiom is p -> p
    assert frame_valid(table_axiom(f"ga_{k}_{l}_{m}_{n}"), False) == (k != 0 or m != 0 or l == n == 0)


def test_d_axiom_fails_on_irreflexive():
    assert not frame_valid(P("box p -> dia p"), False)
    assert falsifying_valuation(P("box p -> dia p"), False) is not None


def test_top_valid_everywhere():
    assert frame_valid(TOP_F, False) and frame_valid(TOP_F, True)


def test_angled_atoms_rejected():
    with pytest.raises(AngledAtomPresent):
        eval_one_node(Angle(Atom("p")), OneNodeModel(False, frozenset()))


@settings(max_examples=300, deadline=None)
@given(formulas(max_leaves=20))
def test_matches_generic_kripke_oracle(f):
    names = sorted(a.name for a in atoms_of(f))
    for bits in itertools.product((False, True), repeat=len(names)):
        val = frozenset(n for n, b in zip(names, bits) if b)
        for refl, (worlds, rel) in ((False, IRR), (True, REF)):
            got = eval_one_node(f, OneNodeModel(refl, val))
            assert got == kripke_eval(f, worlds, rel, {0: val}, 0)


@settings(max_examples=200, deadline=None)
@given(formulas(max_leaves=12))
def test_modal_laws_on_one_node(f):
    names = sorted(a.name for a in atoms_of(f))
    for bits in itertools.product((False, True), repeat=len(names)):
        val = frozenset(n for n, b in zip(names, bits) if b)
        r = OneNodeModel(True, val)
        i = OneNodeModel(False, val)
        assert eval_one_node(Box(f), r) == eval_one_node(Dia(f), r) == eval_one_node(f, r)
        assert eval_one_node(Box(f), i) and not eval_one_node(Dia(f), i)


def test_fallible_node_must_be_reflexive():
    with pytest.raises(ModalProofError):
        OneNodeModel(False, frozenset(), fallible=True)


# ---------------------------------------------------------------------------
# T classes

def excluded(name: str) -> bool:
    """The axioms the T-free family leaves out."""
    if name in ("T_a", "T_b", "D_a", "D_b", "D", "den_0_a", "den_0_b"):
        return True
    if name.startswith("ga_"):
        k, l, m, n = (int(x) for x in name.split("_")[1:])
        return k == m == 0 and (l, n) != (0, 0)  # ga_0000 is p -> p
    return False


def test_single_axioms_tfree_exactly_outside_excluded_list():
    for name in table_one():
        v = classify_tness([table_axiom(name)], LanguageTag.Full)
        assert (v.kind == "TFree") == (not excluded(name)), name


def test_random_tfree_and_tfull_sets():
    rng = random.Random(0)
    allowed = [n for n in table_one() if not excluded(n)]
    # tra_0_a is top -> box p; with T_a it proves every atom, so it has no
    # reflexive model and is left out of the T-full pool
    everything = [n for n in table_one() if n != "tra_0_a"]
    t = [table_axiom("T_a"), table_axiom("T_b")]
    for _ in range(100):
        a = [table_axiom(n) for n in rng.sample(allowed, rng.randint(1, 6))]
        assert classify_tness(a, LanguageTag.Full).kind == "TFree"
        b = [table_axiom(n) for n in rng.sample(everything, rng.randint(0, 6))]
        assert classify_tness(b + t, LanguageTag.Full).kind == "TFull"


def test_empty_transitivity_axiom_breaks_t_fullness():
    t = [table_axiom("T_a"), table_axiom("T_b")]
    assert not frame_valid(table_axiom("tra_0_a"), True)
    assert classify_tness([table_axiom("tra_0_a")] + t, LanguageTag.Full).kind == "Neither"


def test_named_examples():
    assert classify_tness([P("dia box p -> box dia p")], LanguageTag.Full).kind == "TFree"
    full = [table_axiom(n) for n in ("T_a", "T_b", "4_a", "4_b")]
    assert classify_tness(full, LanguageTag.Full).kind == "TFull"
    v = classify_tness([table_axiom("D")], LanguageTag.Full)
    assert v.kind == "Neither" and v.axiom is table_axiom("D") and v.valuation is not None


def test_builtin_calculi():
    expect = {"CK": "TFree", "IK": "TFree", "CKT4": "TFull", "IKT4": "TFull", "CKD": "Neither", "CK4": "TFree"}
    for name, kind in expect.items():
        g = builtin(name)
        assert classify_tness(g.axioms(), g.lang).kind == kind, name


def test_fragments_need_only_their_t_axiom():
    assert classify_tness([table_axiom("T_a"), table_axiom("4_a")], LanguageTag.BoxOnly).kind == "TFull"
    assert classify_tness([table_axiom("T_b"), table_axiom("4_b")], LanguageTag.DiamondOnly).kind == "TFull"
    assert classify_tness([table_axiom("T_a")], LanguageTag.Full).kind == "Neither"


def test_renamed_t_axiom_counts():
    assert classify_tness([P("box q -> q"), P("q -> dia q")], LanguageTag.Full).kind == "TFull"
