import random

import pytest
from hypothesis import given, settings, strategies as st

from modalproof import build as B
from modalproof.calculus import (
    DagProof,
    EmptyMultiset,
    NegativeIndex,
    Proof,
    UnknownCalculus,
    add_axioms,
    builtin,
    check_proof,
    dump_calculus,
    dump_proof,
    expand_dag,
    hypothesis,
    instantiate,
    load_calculus,
    load_proof,
    postorder,
    print_meta_sequent,
    proof_from_json,
    proof_hash,
    proof_to_json,
    table_axiom,
    visser_rule,
)
from modalproof.core import (
    EMPTY,
    OR,
    And,
    Atom,
    FMultiset,
    LanguageViolation,
    Substitution,
    parse_formula,
    parse_sequent,
    print_sequent,
)
from modalproof.gen import mutate, random_proof

p, q, r, s = Atom("p"), Atom("q"), Atom("r"), Atom("s")


def test_instantiate_kbox():
    kbox = builtin("CK").rule("Kbox")
    prem, concl = instantiate(kbox, Substitution.make({"p": r}, {"G": [p, q]}))
    assert [print_sequent(x) for x in prem] == ["p, q => r"]
    assert print_sequent(concl) == "box p, box q => box r"


def test_instantiate_identity_on_top():
    _, concl = instantiate(builtin("LJ").rule("id"), Substitution.make({"p": parse_formula("top")}, {"G": []}))
    assert print_sequent(concl) == "top => top"


def test_instantiate_left_disjunction():
    lor = builtin("LJ").rule("Lor")
    sub = Substitution.make({"p": Atom("a"), "q": Atom("b")}, {"G": [s], "D": [Atom("c")]})
    prem, concl = instantiate(lor, sub)
    assert [print_sequent(x) for x in prem] == ["a, s => c", "b, s => c"]
    assert concl == parse_sequent("s, a | b => c")


def test_instantiate_respects_multiset_order():
    kbox = builtin("CK").rule("Kbox")
    a = instantiate(kbox, Substitution.make({"p": r}, {"G": [p, q, p]}))
    b = instantiate(kbox, Substitution.make({"p": r}, {"G": [q, p, p]}))
    assert a == b


def test_check_identity():
    assert check_proof(builtin("LJ"), B.idp(EMPTY, p)).ok


def test_check_rejects_mismatched_identity():
    good = B.idp(EMPTY, p)
    bad = Proof(parse_sequent("p => q"), good.rule, good.subst, (), None)
    v = check_proof(builtin("LJ"), bad)
    assert not v.ok and list(v.path) == []


def test_check_rejects_kbox_missing_box():
    child = B.weaken_to(B.idp(EMPTY, p), FMultiset([p, q]), p)
    good = B.kbox(child)
    assert check_proof(builtin("CK"), good).ok
    bad = Proof(parse_sequent("box p, q => box p"), good.rule, good.subst, good.children, None)
    assert not check_proof(builtin("CK"), bad).ok


def test_hypotheses_need_assumptions():
    t = parse_sequent("=> p")
    pi = B.ror1(hypothesis(0, t), q)
    assert check_proof(builtin("LJ"), pi, [t]).ok
    assert not check_proof(builtin("LJ"), pi).ok


def test_builtin_lj_has_fifteen_rules():
    assert len(builtin("LJ").rules) == 15


def test_builtin_pll():
    names = {x.name for x in builtin("PLL").rules}
    assert names == {x.name for x in builtin("LJ").rules} | {"DiaL", "T_b", "4_b"}


def test_builtin_ck_kdia_shape():
    kdia = builtin("CK").rule("Kdia")
    assert print_meta_sequent(kdia.premises[0]) == "G ; p => q"
    assert print_meta_sequent(kdia.conclusion) == "box G ; dia p => dia q"


def test_builtin_ik_axioms():
    ik = builtin("IK")
    assert set(ik.axioms()) == {table_axiom("dia_or"), table_axiom("box_imp"), table_axiom("dia_bot")}


def test_unknown_calculus():
    with pytest.raises(UnknownCalculus):
        builtin("NOPE")


def test_add_axioms():
    ck = builtin("CK")
    assert add_axioms(ck, [table_axiom("T_a"), table_axiom("T_b")]).axioms() == builtin("CKT").axioms()
    assert add_axioms(ck, []).rules == ck.rules
    with pytest.raises(LanguageViolation):
        add_axioms(builtin("CK_box"), [parse_formula("~dia bot")])


def test_visser_rules():
    v1 = visser_rule(1)
    assert [print_meta_sequent(m) for m in v1.premises] == ["=> ((p1 -> q1) -> p2 | p3) | r"]
    v0 = visser_rule(0)
    assert [print_meta_sequent(m) for m in v0.premises] == ["=> p | q"]
    (f,) = visser_rule(2).conclusion.succ

    def disjuncts(x):
        return disjuncts(x.left) + disjuncts(x.right) if x.kind == OR else [x]

    ds = disjuncts(f)
    assert len(ds) == 5 and ds[-1] is r
    with pytest.raises(NegativeIndex):
        visser_rule(-1)


def test_box_distribution():
    ck = builtin("CK")
    single = B.prove_box_distribution(FMultiset([p]))
    assert check_proof(ck, single).ok
    two = B.prove_box_distribution(FMultiset([p, q]))
    assert print_sequent(two.conclusion) == "box (p & q) => box p & box q"
    three = B.prove_box_distribution(FMultiset([p, q, r]))
    assert check_proof(ck, three).ok
    with pytest.raises(EmptyMultiset):
        B.prove_box_distribution(FMultiset())


def test_reflexive_implication():
    lj = builtin("LJ")
    pi = B.prove_reflexive_implication(p, EMPTY)
    assert print_sequent(pi.conclusion) == "=> p -> p" and check_proof(lj, pi).ok
    pi = B.prove_reflexive_implication(And(q, r), FMultiset([s]))
    assert print_sequent(pi.conclusion) == "s => q & r -> q & r" and check_proof(lj, pi).ok


@pytest.mark.parametrize("name", ["LJ", "CK", "IK", "PLL", "CKT4", "MIPC", "CK_box", "BLL"])
def test_random_proofs_check_and_mutants_fail(name):
    g = builtin(name)
    rng = random.Random(name)
    for _ in range(30):
        pi = random_proof(rng, g, rng.randint(3, 25))
        assert check_proof(g, pi).ok
        m, path, kind = mutate(rng, pi)
        assert not check_proof(g, m).ok, (kind, path)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_conjunction_combinators(seed, n):
    rng = random.Random(seed)
    fs = [random_proof(rng, builtin("LJ"), 3).goal or p for _ in range(n)]
    ctx = FMultiset([s])
    lj = builtin("LJ")
    intro = B.conj_intro_ids(ctx, fs)
    assert check_proof(lj, intro).ok
    for i in range(n):
        assert check_proof(lj, B.proj(ctx, fs, i)).ok


def test_proof_json_round_trip(tmp_path):
    pi = random_proof(random.Random(3), builtin("CK"), 15)
    path = tmp_path / "p.json"
    dump_proof(pi, str(path))
    back = load_proof(str(path))
    assert back.conclusion == pi.conclusion
    assert proof_hash(back) == proof_hash(pi)
    assert check_proof(builtin("CK"), back).ok
    # byte-identical re-serialization
    path2 = tmp_path / "q.json"
    dump_proof(back, str(path2))
    assert path.read_bytes() == path2.read_bytes()


def test_shared_nodes_rejected_then_expanded():
    i = B.idp(EMPTY, p)
    nodes = proof_to_json(B.rand(i, i))
    # point both children at the first node
    nodes[-1]["children"] = [nodes[0]["id"], nodes[0]["id"]]
    with pytest.raises(DagProof):
        proof_from_json(nodes)
    pi = proof_from_json(nodes, expand_shared=True)
    assert check_proof(builtin("LJ"), pi).ok
    assert len(expand_dag(nodes)) == 3


def test_calculus_json_round_trip(tmp_path):
    g = builtin("IK")
    path = tmp_path / "ik.json"
    dump_calculus(g, str(path))
    h = load_calculus(str(path))
    assert {x.name for x in h.rules} == {x.name for x in g.rules}
    assert set(h.axioms()) == set(g.axioms())


def test_proof_size_monotone():
    pi = random_proof(random.Random(7), builtin("CK"), 20)
    nodes = postorder(pi)
    assert len(nodes) >= 1
