import random
import time

import pytest
from hypothesis import given, settings

from modalproof.calculus import builtin, check_proof
from modalproof.classify import classify_formula, is_modal_horn, map_proof
from modalproof.core import (
    ATOM,
    BOT_F,
    EMPTY,
    TOP_F,
    And,
    Angle,
    AngledAtomPresent,
    Atom,
    Box,
    FMultiset,
    Imp,
    Sequent,
    apply_subst,
    atoms_of,
    parse_formula,
    print_formula,
)
from modalproof.gen import random_almost_positive, random_basic, random_constructive, random_formula, random_harrop, random_proof
from modalproof.translate import (
    NotHarrop,
    WrongClass,
    commute,
    harrop_decompose,
    prove_st_equivalence,
    prove_t_implies_angle,
    sigma_conclusion,
    subst_s,
    trans_t,
)

from conftest import formulas

P = parse_formula
CK = builtin("CK")
p, q = Atom("p"), Atom("q")


def test_t_examples():
    assert trans_t(p) is Angle(p)
    assert trans_t(BOT_F) is BOT_F
    assert trans_t(TOP_F) is Angle(TOP_F)
    assert trans_t(And(p, q)) is And(And(Angle(p), Angle(q)), Angle(And(p, q)))


def test_t_rejects_angles():
    with pytest.raises(AngledAtomPresent):
        trans_t(Angle(p))


def test_s_examples():
    assert subst_s(Angle(And(p, q))) is And(p, q)
    assert subst_s(p) is p
    assert subst_s(trans_t(Box(p))) is And(Box(p), Box(p))


def _angle_free_of_named_atoms(h):
    return all(a.kind != ATOM for a in atoms_of(h))


@settings(max_examples=300, deadline=None)
@given(formulas(max_leaves=15))
def test_s_after_t_is_ck_equivalent(a):
    down, up = prove_st_equivalence(a)
    st = subst_s(trans_t(a))
    assert down.conclusion == Sequent(FMultiset.of(st), FMultiset.of(a))
    assert up.conclusion == Sequent(FMultiset.of(a), FMultiset.of(st))
    assert check_proof(CK, down).ok and check_proof(CK, up).ok


def test_s_after_t_on_atoms_is_identity():
    assert subst_s(trans_t(p)) is p


@settings(max_examples=300, deadline=None)
@given(formulas(max_leaves=15))
def test_t_implies_angle(a):
    pi = prove_t_implies_angle(a)
    assert pi.conclusion == Sequent(FMultiset.of(trans_t(a)), FMultiset.of(Angle(a)))
    assert check_proof(CK, pi).ok


def test_t_implies_angle_shapes():
    assert prove_t_implies_angle(p).rule == "id"
    assert prove_t_implies_angle(And(p, q)).rule == "Land2"
    assert check_proof(CK, prove_t_implies_angle(P("box (p -> q)"))).ok


def test_t_runtime_is_quadratic():
    # |A^t| grows quadratically on right-nested conjunctions; time follows
    sizes, times = [], []
    for n in (50, 100, 200, 400):
        f = p
        for i in range(n):
            f = And(Atom(f"a{i}"), f)
        t0 = time.perf_counter()
        for _ in range(3):
            trans_t(f)
        times.append(time.perf_counter() - t0)
        sizes.append(f.size)
    from modalproof.bench import fit_degree

    assert fit_degree(list(zip(sizes, times))) <= 2.5


# ---------------------------------------------------------------------------
# Commutation


def test_commute_top():
    r = commute("Basic", TOP_F)
    assert list(r.horns) == [Angle(TOP_F)]


def test_commute_atom():
    r = commute("Basic", p, [P("q & r")])
    assert len(r.horns) == 0
    assert check_proof(CK, r.forward_proof).ok and check_proof(CK, r.backward_proof).ok


def test_commute_conjunction_member():
    b, c = P("q & r"), P("dia s")
    r = commute("Basic", And(p, q), [b, c])
    want = Imp(And(Angle(b), Angle(c)), Angle(And(b, c)))
    assert want in r.horns


def test_commute_rejects_wrong_class():
    with pytest.raises(WrongClass):
        commute("Basic", P("box p"))
    with pytest.raises(WrongClass):
        commute("Constructive", P("box p | q"))
    with pytest.raises(WrongClass):
        commute("AlmostPositive", P("(p -> q) -> r"))


GENS = {"Basic": random_basic, "AlmostPositive": random_almost_positive, "Constructive": random_constructive}


def check_commutation(theta, a, args):
    pat = [t for t in atoms_of(a) if t.kind == ATOM]
    r = commute(theta, a, args)
    amap = dict(zip(pat, args))
    inst = apply_subst(a, amap)
    inst_t = apply_subst(a, {k: trans_t(v) for k, v in amap.items()})
    for h in r.horns:
        assert is_modal_horn(h) and _angle_free_of_named_atoms(h), print_formula(h)
    assert (r.forward_proof is not None) == (theta != "Constructive")
    assert (r.backward_proof is not None) == (theta != "AlmostPositive")
    if r.forward_proof is not None:
        assert r.forward_proof.conclusion == Sequent(r.horns.add(trans_t(inst)), FMultiset.of(inst_t))
        assert check_proof(CK, r.forward_proof).ok
    if r.backward_proof is not None:
        extra = (inst_t,) if theta == "Basic" else (Angle(inst), inst_t)
        assert r.backward_proof.conclusion == Sequent(r.horns.add(*extra), FMultiset.of(trans_t(inst)))
        assert check_proof(CK, r.backward_proof).ok
    assert r.sigma_proof.conclusion == Sequent(EMPTY, FMultiset.of(sigma_conclusion(r.horns)))
    assert check_proof(CK, r.sigma_proof).ok


@pytest.mark.parametrize("theta", sorted(GENS))
def test_commute_random(theta):
    rng = random.Random(theta)
    for _ in range(40):
        a = GENS[theta](rng, rng.randint(1, 8))
        pat = [t for t in atoms_of(a) if t.kind == ATOM]
        check_commutation(theta, a, [random_formula(rng, rng.randint(1, 4)) for _ in pat])


# ---------------------------------------------------------------------------
# Harrop decomposition


def test_harrop_atom():
    assert list(harrop_decompose(p).gamma_a) == [Angle(p)]


def test_harrop_implication():
    b = P("r & s")
    d = harrop_decompose(Imp(b, q))
    assert set(d.gamma_a) == {Angle(Imp(b, q)), Imp(Angle(b), Angle(q))}


def test_harrop_box():
    assert set(harrop_decompose(Box(p)).gamma_a) == {Box(Angle(p)), Angle(Box(p))}


def test_harrop_rejects_non_harrop():
    with pytest.raises(NotHarrop):
        harrop_decompose(P("p | q"))


def _check_decomposition(a):
    d = harrop_decompose(a)
    for h in d.gamma_a:
        assert classify_formula(h).modalHorn and _angle_free_of_named_atoms(h)
    assert d.derivation_proof.conclusion == Sequent(d.gamma_a, FMultiset.of(trans_t(a)))
    for pi in (d.derivation_proof, d.equivalence_proof, d.to_formula_proof, d.from_formula_proof):
        assert check_proof(CK, pi).ok


def test_harrop_random():
    rng = random.Random(5)
    for _ in range(100):
        _check_decomposition(random_harrop(rng, rng.randint(1, 12)))


# ---------------------------------------------------------------------------
# Standard substitution on proofs


def test_substitution_commutes_with_proofs():
    rng = random.Random(11)
    ang = builtin("CK")
    for _ in range(60):
        pi = random_proof(rng, ang, rng.randint(3, 15))
        # rename atoms into angled atoms, then substitute back
        amap = {a: Angle(random_formula(rng, 3)) for a in {x for f in (*pi.ant, *pi.succ) for x in atoms_of(f)}}
        memo: dict = {}
        lifted = map_proof(pi, lambda f: apply_subst(f, amap, memo))
        assert check_proof(ang, lifted).ok
        smemo: dict = {}
        back = map_proof(lifted, lambda f: subst_s(f, smemo))
        assert check_proof(ang, back).ok
