"""Extraction of a disjunct or an antecedent premise from a proof of
Gamma, {A_i -> B_i} => C | D, and the lifts that carry the extraction to the
box-only, diamond-only and propositional fragments."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import build as B
from .calculus import (
    KBOX,
    KDIA,
    LJ_RULES,
    P as _P,
    Calculus,
    Proof,
    add_axioms,
    builtin,
    check_proof,
    postorder,
    table_axiom,
)
from .classify import (
    NotConstructiveCalculus,
    is_harrop,
    map_proof,
    normalize_to_ck_plus_c,
)
from .core import (
    AND,
    BOT_F,
    BOX,
    DIA,
    EMPTY,
    IMP,
    OR,
    TOP_F,
    And,
    Angle,
    Box,
    Dia,
    FMultiset,
    Formula,
    Imp,
    LanguageTag,
    ModalProofError,
    Or,
    Sequent,
    big_and,
    print_formula,
    print_sequent,
)
from .hornsolve import NeitherTClass, NotValid, TTemplates, _lconj_tree, reduce, unit_propagate
from .preserve import NotNormalForm, ProofInvalid, _rule_kinds, preserve
from .semantics import T_A_NAME, T_B_NAME, classify_tness
from .translate import _t, harrop_decompose, prove_t_implies_angle, subst_s


class NotConstructive(ModalProofError):
    code = "NotConstructive"


class MalformedConclusion(ModalProofError):
    code = "MalformedConclusion"


class InternalValidityFailure(ModalProofError):
    code = "InternalValidityFailure"


class NotStrong(ModalProofError):
    code = "NotStrong"


class MissingTa(ModalProofError):
    code = "MissingTa"


# ---------------------------------------------------------------------------
# Input and output


@dataclass
class ExtractionInput:
    calculus: Calculus
    proof: Proof
    harrop_part: FMultiset
    implications: list  # of (A, B)
    disjuncts: tuple  # (C, D)


@dataclass(frozen=True)
class Branch:
    """Left (the formula C), Right (D) or Antecedent (A_index, counting from 1)."""

    kind: str
    formula: Formula
    index: int = 0

    def __str__(self) -> str:
        if self.kind == "Antecedent":
            return f"Antecedent({self.index}: {print_formula(self.formula)})"
        return f"{self.kind}({print_formula(self.formula)})"


@dataclass
class ExtractionTrace:
    """Intermediate objects of one run, kept for inspection and tests."""

    tclass: str
    calculus: Calculus
    sigma_pi: FMultiset
    lambda_gamma: FMultiset
    omega: list
    targets: list
    angled_proof: Proof | None = None


@dataclass
class ExtractionResult:
    branch: Branch
    proof: Proof
    trace: ExtractionTrace | None = field(default=None, repr=False)


def split_conclusion(
    g: Calculus,
    proof: Proof,
    implications: Sequence[Formula] | None = None,
) -> ExtractionInput:
    """Build the input from a proof of ... => C | D.

    Without an explicit list, Harrop antecedent members form Gamma and every
    other member must be an implication."""
    c = proof.conclusion
    goal = c.goal
    if goal is None or len(c.succ) != 1 or goal.kind != OR:
        raise MalformedConclusion(f"succedent of {print_sequent(c)} is not a disjunction")
    ant = c.ant
    if implications is None:
        imps = [f for f in ant if not is_harrop(f)]
    else:
        imps = list(implications)
    rest = ant
    for f in imps:
        if f not in rest:
            raise MalformedConclusion(f"{print_formula(f)} is not in the antecedent")
        if f.kind != IMP:
            raise MalformedConclusion(f"{print_formula(f)} is not an implication")
        rest = rest.remove(f)
    return ExtractionInput(g, proof, rest, [(f.left, f.right) for f in imps], (goal.left, goal.right))


# ---------------------------------------------------------------------------
# Bringing a calculus to base plus axioms


_NATIVE = {r.name: r for r in (*LJ_RULES, KBOX, KDIA)}


@dataclass
class _Work:
    cset: list
    calculus: Calculus
    simulate: Callable[[Proof], Proof]
    unsimulate: Callable[[Proof], Proof]


def _identity(pi: Proof) -> Proof:
    return pi


def _working_form(g: Calculus) -> _Work:
    """g itself when it is CK (optionally with diamond-left) plus axioms, else
    its normal form with the simulations."""
    if g.lang in (LanguageTag.Full, LanguageTag.FullPlus) and all(
        n in g.by_name and g.by_name[n] == r for n, r in _NATIVE.items()
    ):
        try:
            kinds = _rule_kinds(g)
        except NotNormalForm as e:
            if any(g.by_name[n].axiom_formula() is not None for n in g.by_name if n not in _NATIVE):
                raise NotConstructive(str(e)) from e
            kinds = None
        if kinds is not None:
            cset = [a for a in kinds.values() if a is not None]
            return _Work(cset, g, _identity, _identity)
    try:
        nf = normalize_to_ck_plus_c(g)
    except NotConstructiveCalculus as e:
        raise NotConstructive(str(e)) from e
    return _Work(nf.cset, nf.calculus, nf.simulate, nf.unsimulate)


# ---------------------------------------------------------------------------
# The pipeline


def _lambda_gamma(gamma: Sequence[Formula]):
    decs = [harrop_decompose(x) for x in gamma]
    lam = FMultiset([m for d in decs for m in d.gamma_a])
    return decs, lam


def _angled_sequent_proof(inp: ExtractionInput, translated: Proof, sigma: FMultiset, decs) -> Proof:
    """A proof of Sigma, Lambda_Gamma, {<A_i -> B_i>}, {<A_i> -> bot} => <C> | <D>
    from the translated proof of Sigma, Gamma^t, {(A_i -> B_i)^t} => (C | D)^t."""
    memo: dict = {}
    c, d = inp.disjuncts
    ct, dt = _t(c, memo), _t(d, memo)
    ac, ad = Angle(c), Angle(d)
    cd_t = _t(Or(c, d), memo)
    right = B.lor(
        B.ror1(prove_t_implies_angle(c), ad),
        B.ror2(prove_t_implies_angle(d), ac),
        ct,
        dt,
    )
    right = B.land1(right, cd_t.left, cd_t.right)
    pi = B.cut(translated, right)
    for dec in decs:
        pi = B.cut(dec.derivation_proof, pi)
    for a, b in inp.implications:
        at, bt = _t(a, memo), _t(b, memo)
        neg = Imp(Angle(a), BOT_F)
        body = B.limp(prove_t_implies_angle(a), B.lbot(EMPTY, bt), BOT_F)
        imp_t = B.rimp(B.weaken_to(body, FMultiset.of(at, neg), bt), at)
        both = B.rand(imp_t, B.idp(FMultiset.of(neg), Angle(Imp(a, b))))
        pi = B.cut(both, pi)
    lam = FMultiset([m for dec in decs for m in dec.gamma_a])
    ant = FMultiset(
        list(sigma)
        + list(lam)
        + [Angle(Imp(a, b)) for a, b in inp.implications]
        + [Imp(Angle(a), BOT_F) for a, _ in inp.implications]
    )
    return B.weaken_to(pi, ant, Or(ac, ad))


def _convert_tree(tree: Formula, pieces):
    """None or (O, proof of tree => O), where O keeps the tree shape over the
    reduced leaves; `pieces` yields the reduction of each leaf in order."""
    if tree.kind == AND:
        left = _convert_tree(tree.left, pieces)
        right = _convert_tree(tree.right, pieces)
        if left is None and right is None:
            return None
        if right is None:
            return left[0], B.land1(left[1], tree.left, tree.right)
        if left is None:
            return right[0], B.land2(right[1], tree.left, tree.right)
        return And(left[0], right[0]), B.rand(
            B.land1(left[1], tree.left, tree.right), B.land2(right[1], tree.left, tree.right)
        )
    return next(pieces)


def extract_visser_harrop(inp: ExtractionInput, check: bool = True, audit: bool = False) -> ExtractionResult:
    """A proof of Gamma, {A_i -> B_i} => X with X one of C, D or some A_i."""
    g = inp.calculus
    pi = inp.proof
    c, d = inp.disjuncts
    gamma = FMultiset(inp.harrop_part)
    imps = [Imp(a, b) for a, b in inp.implications]
    want = Sequent(FMultiset(list(gamma) + imps), FMultiset.of(Or(c, d)))
    if pi.conclusion != want:
        raise MalformedConclusion(f"proof ends in {print_sequent(pi.conclusion)}, expected {print_sequent(want)}")
    for x in gamma:
        if not is_harrop(x):
            raise MalformedConclusion(f"{print_formula(x)} is not Harrop")
    if check:
        v = check_proof(g, pi)
        if not v.ok:
            raise ProofInvalid(str(v))
    work = _working_form(g)
    verdict = classify_tness(work.cset, LanguageTag.Full)
    if verdict.kind == "Neither":
        raise NeitherTClass(str(verdict))
    gw = work.calculus
    pw = work.simulate(pi)

    # the side multiset Sigma with its discharge proof, and Lambda_Gamma
    try:
        pres = preserve(gw, pw, check=False, translated=audit)
    except NotNormalForm as e:
        raise NotConstructive(str(e)) from e
    sigma = pres.sigma_pi
    decs, lam = _lambda_gamma(list(gamma))
    blocks = [list(sigma)] + [list(dec.gamma_a) for dec in decs]
    if imps:
        blocks.append([Angle(f) for f in imps])
    h_tree = big_and([big_and(b) for b in blocks])
    leaves = [x for b in blocks for x in b]

    # reduction to an implicational Horn sequent and unit propagation
    targets = [Angle(a) for a, _ in inp.implications] + [Angle(c), Angle(d)]
    red = reduce(gw, verdict.kind, leaves, [], targets)
    conv = _convert_tree(h_tree, iter(red.pieces))
    omega = list(red.ordered)
    found = unit_propagate(omega, targets)
    if isinstance(found, NotValid):
        raise InternalValidityFailure(
            "reduced sequent has a countermodel: " + ", ".join(sorted(print_formula(a) for a in found.valuation))
        )
    if conv is None:
        beta = B.lw(found.proof, h_tree)
    else:
        o_tree, to_omega = conv
        tau = _lconj_tree(found.proof, o_tree)
        beta = B.cut(to_omega, B.lw(tau, h_tree))

    # standard substitution, then discharge of the conjunction of H^s
    smemo: dict = {}
    bs = map_proof(beta, lambda x: subst_s(x, smemo))
    ctx = want.ant
    parts = [B.weaken_to(pres.discharge_proof, ctx)]
    parts += [B.weaken_to(dec.from_formula_proof, ctx) for dec in decs]
    if imps:
        parts.append(B.rconj([B.idp(ctx.remove(f), f) for f in imps], ctx))
    disch = B.rconj(parts, ctx)
    goal = subst_s(found.target, smemo)
    assert bs.ant == FMultiset.of(disch.goal), "discharge shape mismatch"
    bs = B.cut(disch, B.weaken_to(bs, ctx.add(disch.goal), goal))
    out = work.unsimulate(bs)

    n = len(inp.implications)
    i = found.index
    if i <= n:
        branch = Branch("Antecedent", inp.implications[i - 1][0], i)
    elif i == n + 1:
        branch = Branch("Left", c)
    else:
        branch = Branch("Right", d)
    trace = ExtractionTrace(verdict.kind, gw, sigma, lam, omega, targets)
    if audit:
        trace.angled_proof = _angled_sequent_proof(inp, pres.translated_proof, sigma, decs)
    return ExtractionResult(branch, out, trace)


def extract_disjunction(g: Calculus, proof: Proof, check: bool = True) -> ExtractionResult:
    """A proof of => C or of => D from a proof of => C | D."""
    c = proof.conclusion
    if c.ant:
        raise MalformedConclusion(f"{print_sequent(c)} has a nonempty antecedent")
    inp = split_conclusion(g, proof, [])
    return extract(inp, check=check)


# ---------------------------------------------------------------------------
# Node-wise back translations


def _back_map(pi: Proof, fmap: Callable[[Formula], Formula], special: dict) -> Proof:
    """Apply fmap node-wise; rules in `special` are rebuilt by their handler
    from the node and its already translated children."""
    memo_f: dict = {}

    def f(x: Formula) -> Formula:
        r = memo_f.get(x)
        if r is None:
            r = memo_f[x] = fmap(x)
        return r

    memo: dict[int, Proof] = {}
    for n in postorder(pi):
        kids = [memo[id(k)] for k in n.children]
        h = special.get(n.rule)
        if h is not None:
            out = h(n, kids, f)
        else:
            one = map_proof(Proof(n.conclusion, n.rule, n.subst, (), n.hyp), f)
            out = Proof(one.conclusion, n.rule, one.subst, tuple(kids), n.hyp)
        memo[id(n)] = out
    return memo[id(pi)]


_BIN = {AND: And, OR: Or, IMP: Imp}


def _forget(box: Callable | None, dia: Callable | None) -> Callable[[Formula], Formula]:
    """Homomorphic map with custom clauses for box and diamond."""

    def go(x: Formula, memo: dict) -> Formula:
        r = memo.get(x)
        if r is not None:
            return r
        if x.kind == BOX and box is not None:
            r = box(go(x.left, memo))
        elif x.kind == DIA and dia is not None:
            r = dia(go(x.left, memo))
        elif x.kind == BOX:
            r = Box(go(x.left, memo))
        elif x.kind == DIA:
            r = Dia(go(x.left, memo))
        elif x.kind in _BIN:
            r = _BIN[x.kind](go(x.left, memo), go(x.right, memo))
        else:
            r = x
        memo[x] = r
        return r

    shared: dict = {}
    return lambda x: go(x, shared)


def f_i(a: Formula) -> Formula:
    """Forget diamonds as bot."""
    return _F_I(a)


def f_r(a: Formula) -> Formula:
    """Forget diamonds, keeping their argument."""
    return _F_R(a)


def gmap(a: Formula) -> Formula:
    """Forget boxes, keeping their argument."""
    return _G(a)


def hmap(a: Formula) -> Formula:
    """Boxed formulas become top and diamond formulas bot."""
    return _H(a)


_F_I = _forget(None, lambda a: BOT_F)
_F_R = _forget(None, lambda a: a)
_G = _forget(lambda a: a, None)
_H = _forget(lambda a: TOP_F, lambda a: BOT_F)


def _mapped_ant(n: Proof, f) -> FMultiset:
    return FMultiset(f(x) for x in n.ant)


def _mapped_goal(n: Proof, f) -> Formula | None:
    return f(n.goal) if n.goal is not None else None


def _refl_axiom(n: Proof, kids, f) -> Proof:
    """=> A -> A for a T axiom instance whose modality is forgotten."""
    x = f(n.goal.left)
    return B.rimp(B.idp(EMPTY, x), x)


def _require_strong(g: Calculus, base: str) -> None:
    b = builtin(base)
    for r in b.rules:
        if r.name not in g.by_name or g.by_name[r.name] != r:
            raise NotStrong(f"{g.name} lacks the rule {r.name} of {base}")


def _lift(g: Calculus, rules: Sequence, axioms: Sequence[str], tag: str) -> Calculus:
    full = g.with_lang(LanguageTag.Full, g.name)
    ext = full.extend(rules, full.name)
    if axioms:
        ext = add_axioms(ext, [table_axiom(a) for a in axioms], list(axioms))
    return ext.with_lang(LanguageTag.Full, f"{g.name}[{tag}]")


@dataclass
class Lift:
    """An extension of a fragment calculus to the full language together
    with the node-wise translation of its proofs back into g."""

    g: Calculus
    g_ext: Calculus
    fmap: Callable[[Formula], Formula]
    back: Callable[[Proof], Proof]
    variant: str


def lift_box_fragment(g: Calculus, reflexive: bool = False) -> Lift:
    """g plus Kdia (and T_b when reflexive); back forgets diamonds."""
    if g.lang != LanguageTag.BoxOnly:
        raise NotStrong(f"{g.name} is not a box-only calculus")
    _require_strong(g, "CK_box")
    if reflexive:
        tt = TTemplates(g)
        if T_A_NAME not in tt.found:
            raise MissingTa(f"{g.name} has no T_a axiom")
        ext = _lift(g, [KDIA], [T_B_NAME], "r")
        fm = f_r

        def kdia(n: Proof, kids, f) -> Proof:
            (child,) = kids
            pi = child
            for gam in n.subst.ctx["G"]:
                x = f(gam)
                pi = B.cut(tt.proof(T_A_NAME, x), pi)
            return B.weaken_to(pi, _mapped_ant(n, f), _mapped_goal(n, f))

        special = {"Kdia": kdia, T_B_NAME: _refl_axiom}
    else:
        ext = _lift(g, [KDIA], [], "i")
        fm = f_i

        def kdia(n: Proof, kids, f) -> Proof:
            ant = _mapped_ant(n, f)
            return B.lbot(ant.remove(BOT_F), BOT_F)

        special = {"Kdia": kdia}
    return Lift(g, ext, fm, lambda pi: _back_map(pi, fm, special), "r" if reflexive else "i")


def lift_diamond_fragment(g: Calculus, reflexive: bool = False) -> Lift:
    """g plus Kbox, Kdia (and T_a when reflexive); back forgets boxes."""
    if g.lang != LanguageTag.DiamondOnly:
        raise NotStrong(f"{g.name} is not a diamond-only calculus")
    _require_strong(g, "BLL")
    ext = _lift(g, [KBOX, KDIA], [T_A_NAME] if reflexive else [], "r" if reflexive else "i")

    def kbox(n: Proof, kids, f) -> Proof:
        (child,) = kids
        return child

    def kdia(n: Proof, kids, f) -> Proof:
        (child,) = kids
        return B.dial(child, f(n.subst.atoms[_P]))

    special = {"Kbox": kbox, "Kdia": kdia, T_A_NAME: _refl_axiom}
    return Lift(g, ext, gmap, lambda pi: _back_map(pi, gmap, special), "r" if reflexive else "i")


def lift_prop_fragment(g: Calculus) -> Lift:
    """g plus Kbox, Kdia; back sends boxes to top and diamonds to bot."""
    if g.lang != LanguageTag.Propositional:
        raise NotStrong(f"{g.name} is not a propositional calculus")
    _require_strong(g, "LJ")
    ext = _lift(g, [KBOX, KDIA], [], "m")

    def kbox(n: Proof, kids, f) -> Proof:
        return B.rtop(_mapped_ant(n, f))

    def kdia(n: Proof, kids, f) -> Proof:
        ant = _mapped_ant(n, f)
        return B.lbot(ant.remove(BOT_F), BOT_F)

    special = {"Kbox": kbox, "Kdia": kdia}
    return Lift(g, ext, hmap, lambda pi: _back_map(pi, hmap, special), "m")


def lift_for(g: Calculus) -> Lift | None:
    """The lift matching g's language and T class (None for the full language)."""
    if g.lang in (LanguageTag.Full, LanguageTag.FullPlus):
        return None
    if g.lang == LanguageTag.Propositional:
        return lift_prop_fragment(g)
    cset = g.axioms()
    v = classify_tness(cset, g.lang)
    if v.kind == "Neither":
        raise NeitherTClass(str(v))
    refl = v.kind == "TFull"
    if g.lang == LanguageTag.BoxOnly:
        return lift_box_fragment(g, refl)
    return lift_diamond_fragment(g, refl)


def extract_fragment(inp: ExtractionInput, check: bool = True, audit: bool = False) -> ExtractionResult:
    """Lift to the full language, extract there and translate the proof back."""
    g = inp.calculus
    lift = lift_for(g)
    if lift is None:
        return extract_visser_harrop(inp, check=check, audit=audit)
    if check:
        v = check_proof(g, inp.proof)
        if not v.ok:
            raise ProofInvalid(str(v))
    lifted = ExtractionInput(lift.g_ext, inp.proof, inp.harrop_part, inp.implications, inp.disjuncts)
    res = extract_visser_harrop(lifted, check=False, audit=audit)
    back = lift.back(res.proof)
    return ExtractionResult(res.branch, back, res.trace)


def extract(inp: ExtractionInput, check: bool = True, audit: bool = False) -> ExtractionResult:
    """Dispatch on the language of the calculus."""
    return extract_fragment(inp, check=check, audit=audit)


__all__ = [
    "ExtractionInput",
    "ExtractionResult",
    "ExtractionTrace",
    "Branch",
    "Lift",
    "split_conclusion",
    "extract",
    "extract_visser_harrop",
    "extract_disjunction",
    "extract_fragment",
    "lift_box_fragment",
    "lift_diamond_fragment",
    "lift_prop_fragment",
    "lift_for",
    "f_i",
    "f_r",
    "gmap",
    "hmap",
    "NotConstructive",
    "MalformedConclusion",
    "InternalValidityFailure",
    "NotStrong",
    "MissingTa",
]
