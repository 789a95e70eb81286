import random

import pytest

from modalproof import build as B
from modalproof.calculus import add_axioms, builtin, check_proof, postorder, rule, rule_app, table_axiom
from modalproof.classify import classify_formula, horn_body_atoms, is_modal_horn, map_proof
from modalproof.core import EMPTY, Angle, Atom, Box, Dia, FMultiset, Imp, Sequent, Substitution, big_and, parse_formula
from modalproof.gen import random_proof
from modalproof.preserve import NotNormalForm, ProofInvalid, preserve
from modalproof.translate import subst_s, trans_t

from conftest import table_one

P = parse_formula
CK = builtin("CK")
p, q = Atom("p"), Atom("q")


def test_identity_axiom():
    res = preserve(CK, B.idp(FMultiset.of(q), p))
    assert list(res.sigma_pi) == [Angle(P("top"))]


def test_reflexive_implication_empty_context():
    res = preserve(CK, B.rimp(B.idp(EMPTY, p), p))
    assert res.sigma_pi == FMultiset.of(Angle(P("top")), Angle(Imp(p, p)))


def test_kdia_case():
    child = B.weaken_to(B.idp(EMPTY, p), FMultiset.of(p, q), p)
    pi = B.kdia(child, p)
    res = preserve(CK, pi)
    boxed = [h for h in res.sigma_pi if h.kind == Box(p).kind]
    imps = [h for h in res.sigma_pi if h.kind == Imp(p, p).kind]
    assert boxed == [Box(Angle(P("top")))]
    (h,) = imps
    assert h.right is Angle(Dia(p))
    assert sorted(map(str, horn_body_atoms(h.left))) == sorted(map(str, [Angle(Box(q)), Angle(Dia(p))]))


def _check_result(g, pi, res):
    assert all(is_modal_horn(h) for h in res.sigma_pi)
    t_ant = FMultiset(trans_t(f) for f in pi.ant)
    t_succ = FMultiset(trans_t(f) for f in pi.succ)
    assert res.translated_proof.conclusion == Sequent(res.sigma_pi + t_ant, t_succ)
    smemo: dict = {}
    want = big_and([subst_s(h, smemo) for h in res.sigma_pi])
    assert res.discharge_proof.conclusion == Sequent(EMPTY, FMultiset.of(want))
    assert check_proof(g, res.translated_proof).ok
    assert check_proof(g, res.discharge_proof).ok


CONSTRUCTIVE_TABLE = [n for n in table_one() if classify_formula(table_axiom(n)).constructive]


@pytest.mark.parametrize("seed", range(4))
def test_random_proofs_in_constructive_extensions(seed):
    rng = random.Random(seed)
    for _ in range(15):
        names = rng.sample(CONSTRUCTIVE_TABLE, rng.randint(0, 3))
        g = add_axioms(CK, [table_axiom(n) for n in names], names)
        pi = random_proof(rng, g, rng.randint(3, 20))
        _check_result(g, pi, preserve(g, pi))


def test_builtin_extensions():
    rng = random.Random(9)
    for name in ("IK", "CKT4", "MIPC", "CK4", "CKB"):
        g = builtin(name)
        for _ in range(10):
            pi = random_proof(rng, g, rng.randint(3, 20))
            _check_result(g, pi, preserve(g, pi))


def test_discharge_is_closed_under_s():
    # the discharge proof mentions no angled atoms at all
    rng = random.Random(4)
    pi = random_proof(rng, CK, 20)
    res = preserve(CK, pi)
    memo: dict = {}
    same = map_proof(res.discharge_proof, lambda f: subst_s(f, memo))
    assert same.conclusion == res.discharge_proof.conclusion
    assert check_proof(CK, same).ok


def test_rejects_invalid_proof():
    bad = B.idp(EMPTY, p)
    bad = type(bad)(Sequent(FMultiset.of(p), FMultiset.of(q)), bad.rule, bad.subst, (), None)
    with pytest.raises(ProofInvalid):
        preserve(CK, bad)


def test_rejects_non_normal_form():
    strip = rule("strip", ["G => box p"], "G => p")
    g = CK.extend([strip], "CK+strip")
    pi = rule_app(strip, Substitution.make({"p": p}, {"G": [Box(p)]}), [B.idp(EMPTY, Box(p))])
    assert check_proof(g, pi).ok
    with pytest.raises(NotNormalForm):
        preserve(g, pi)


def test_sigma_size_polynomial():
    from modalproof.bench import fit_degree
    from modalproof.corpus import kdia_tower, nested_and

    points = []
    for n in (4, 8, 16, 32):
        pi = B.rand(B.weaken_to(nested_and(n), kdia_tower(n).ant), kdia_tower(n))
        res = preserve(CK, pi)
        points.append((len(postorder(pi)), len(postorder(res.translated_proof)) + len(postorder(res.discharge_proof))))
    assert fit_degree(points) <= 4
