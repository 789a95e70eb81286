"""Proof-producing unit propagation for implicational Horn sequents, flattening
of modality-free modal Horn formulas, the modality-forgetting map, and the
reduction of modal Horn sequents in T-free / T-full calculi to implicational
Horn sequents."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

from . import build as B
from .calculus import Calculus, Proof
from .classify import (
    horn_body_atoms,
    is_implicational_horn,
    is_modal_horn,
    subst_proof,
)
from .core import (
    AND,
    ANGLE,
    ATOM,
    BOT,
    BOT_F,
    BOX,
    DIA,
    EMPTY,
    IMP,
    M_BOX,
    M_DIA,
    OR,
    TOP,
    And,
    Box,
    Dia,
    FMultiset,
    Formula,
    Imp,
    ModalProofError,
    Or,
    big_and,
    print_formula,
)
from .semantics import T_A_NAME, T_B_NAME, _is_t_axiom

if os.environ.get("MODALPROOF_PURE"):
    from ._hornpy import propagate as _propagate

    KERNEL = "python"
else:
    try:
        from ._horncore import propagate as _propagate

        KERNEL = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        from ._hornpy import propagate as _propagate

        KERNEL = "python"

from ._hornpy import propagate as propagate_python  # noqa: E402


class NotHorn(ModalProofError):
    code = "NotHorn"


class NotModalityFreeHorn(ModalProofError):
    code = "NotModalityFreeHorn"


class NotModalHorn(ModalProofError):
    code = "NotModalHorn"


class NotTFull(ModalProofError):
    code = "NotTFull"


class NeitherTClass(ModalProofError):
    code = "NeitherTClass"


@dataclass
class Found:
    """Target number `index` (counting from 1) with a proof of gamma => target."""

    index: int
    proof: Proof
    target: Formula


@dataclass
class NotValid:
    """The atoms true in a classical countermodel (all others false)."""

    valuation: frozenset


def _is_atomic(f: Formula) -> bool:
    return f.kind in (ATOM, ANGLE)


# ---------------------------------------------------------------------------
# Unit propagation


def _encode(gamma: Sequence[Formula], targets: Sequence[Formula]):
    ids: dict[Formula, int] = {}
    names: list[Formula] = []

    def idx(a: Formula) -> int:
        if a.kind == BOT:
            return -1
        i = ids.get(a)
        if i is None:
            i = ids[a] = len(names)
            names.append(a)
        return i

    units: list[int] = []
    bodies: list[list[int]] = []
    heads: list[int] = []
    clause_of: list[int] = []
    for k, f in enumerate(gamma):
        if not is_implicational_horn(f):
            raise NotHorn(print_formula(f))
        if f.kind == IMP:
            seen: list[int] = []
            for a in horn_body_atoms(f.left):
                i = idx(a)
                if i not in seen:
                    seen.append(i)
            bodies.append(seen)
            heads.append(idx(f.right))
            clause_of.append(k)
        else:
            units.append(idx(f))
    for t in targets:
        if not _is_atomic(t):
            raise NotHorn(f"target {print_formula(t)} is not an atom")
        idx(t)
    tpos = [-1] * len(names)
    for j, t in enumerate(targets):
        if tpos[ids[t]] < 0:
            tpos[ids[t]] = j
    return names, units, bodies, heads, clause_of, tpos


def _body_proof(ctx: FMultiset, body: Formula) -> Proof:
    """ctx => body for a conjunction tree of atoms all in ctx."""
    if body.kind == AND:
        return B.rand(_body_proof(ctx, body.left), _body_proof(ctx, body.right))
    return B.idp(ctx.remove(body), body)


def _chain_proof(gamma: Sequence[Formula], fired: list[Formula], last: Formula, goal: Formula) -> Proof:
    """gamma => goal by cuts on the heads of the fired clauses (in order),
    ending with the unit `last` (an atom equal to goal, or bot)."""
    deltas = [FMultiset(gamma)]
    for c in fired:
        deltas.append(deltas[-1].add(c.right))
    final = deltas[-1]
    if last.kind == BOT:
        acc = B.lbot(final.remove(BOT_F), goal)
    else:
        acc = B.idp(final.remove(last), last)
    for k in range(len(fired) - 1, -1, -1):
        c = fired[k]
        ctx = deltas[k].remove(c)
        step = B.limp(_body_proof(ctx, c.left), B.idp(ctx, c.right), c.right)
        acc = B.cut(step, acc)
    return acc


def unit_propagate(gamma: Sequence[Formula] | FMultiset, targets: Sequence[Formula], kernel=None) -> Found | NotValid:
    """Decide gamma => t_1 | ... | t_n for implicational Horn gamma and atoms t_i.

    Units are taken first-in first-out; on taking bot the first target is
    returned, on taking a target that target is returned."""
    gamma = list(gamma)
    targets = list(targets)
    names, units, bodies, heads, clause_of, tpos = _encode(gamma, targets)
    status, tgt, fired, processed = (kernel or _propagate)(len(names), units, bodies, heads, tpos)
    if status == 2:
        return NotValid(frozenset(names[u] for u in processed))
    fired_f = [gamma[clause_of[c]] for c in fired]
    if status == 1:
        if not targets:
            raise NotHorn("bot derived but no target to report")
        return Found(1, _chain_proof(gamma, fired_f, BOT_F, targets[0]), targets[0])
    t = targets[tgt]
    return Found(tgt + 1, _chain_proof(gamma, fired_f, t, t), t)


def derive_bot_or(gamma: Sequence[Formula], goal: Formula) -> Proof | None:
    """A proof of gamma => goal (goal an atom or bot) by unit propagation."""
    gamma = list(gamma)
    targets = [] if goal.kind == BOT else [goal]
    names, units, bodies, heads, clause_of, tpos = _encode(gamma, targets)
    status, tgt, fired, _ = _propagate(len(names), units, bodies, heads, tpos)
    if status == 2:
        return None
    fired_f = [gamma[clause_of[c]] for c in fired]
    return _chain_proof(gamma, fired_f, BOT_F if status == 1 else goal, goal)


# ---------------------------------------------------------------------------
# Stages of the algorithm and their equivalence proofs


@dataclass
class HornState:
    """The unit queue V, the processed units W, and the remaining clauses T."""

    V: list = field(default_factory=list)
    W: list = field(default_factory=list)
    T: list = field(default_factory=list)

    def formulas(self) -> list[Formula]:
        return list(self.V) + list(self.W) + list(self.T)


def horn_stages(gamma: Sequence[Formula], targets: Sequence[Formula]) -> list[HornState]:
    """The state at the start of every stage, computed literally on formulas
    (a reference run, quadratic in the input)."""
    for f in gamma:
        if not is_implicational_horn(f):
            raise NotHorn(print_formula(f))
    V = [f for f in gamma if f.kind != IMP]
    T = [f for f in gamma if f.kind == IMP]
    W: list[Formula] = []
    out = [HornState(list(V), list(W), list(T))]
    while V:
        u = V[0]
        if u.kind == BOT or u in targets:
            break
        newT: list[Formula] = []
        moved: list[Formula] = []
        for phi in T:
            body = horn_body_atoms(phi.left)
            if phi.right is u:
                continue
            if u in body:
                rest = [a for a in body if a is not u]
                if rest:
                    moved.append(Imp(big_and(rest), phi.right))
                else:
                    V.append(phi.right)
            else:
                newT.append(phi)
        T = newT + moved
        V = V[1:]
        if u not in W:
            W.append(u)
        out.append(HornState(list(V), list(W), list(T)))
    return out


def _lconj_tree(pi: Proof, tree: Formula) -> Proof:
    """From ctx, leaves(tree) => D obtain ctx, tree => D."""
    if tree.kind != AND:
        return pi
    pi = _lconj_tree(pi, tree.left)
    pi = _lconj_tree(pi, tree.right)
    return B.pack(pi, tree.left, tree.right)


def horn_entails(gamma: Sequence[Formula], psi: Formula) -> Proof | None:
    """A proof of gamma => psi for implicational Horn gamma and psi."""
    if psi in gamma:
        return B.idp(FMultiset(gamma).remove(psi), psi)
    if psi.kind == IMP:
        body = horn_body_atoms(psi.left)
        pi = derive_bot_or(list(gamma) + body, psi.right)
        if pi is None:
            return None
        return B.rimp(_lconj_tree(pi, psi.left), psi.left)
    return derive_bot_or(gamma, psi)


def stage_equivalence(a: Sequence[Formula], b: Sequence[Formula]) -> tuple[Proof, Proof]:
    """Proofs of conj(a) => conj(b) and conj(b) => conj(a)."""

    def one(src: Sequence[Formula], dst: Sequence[Formula]) -> Proof:
        src = list(src)
        pis = []
        for psi in dst:
            pi = horn_entails(src, psi)
            if pi is None:
                raise ModalProofError(f"stage invariant broken at {print_formula(psi)}")
            pis.append(B.weaken_to(pi, FMultiset(src)))
        pi = B.rconj(pis, FMultiset(src))
        return B.lconj(pi, src)

    return one(a, b), one(b, a)


# ---------------------------------------------------------------------------
# Flattening


@dataclass
class Flattened:
    formula: Formula
    to_flat: Proof
    from_flat: Proof

    @property
    def equiv_proof(self) -> Proof:
        """=> (f -> f') & (f' -> f)."""
        f = self.from_flat.goal
        g = self.to_flat.goal
        return B.rand(B.rimp(self.to_flat, f), B.rimp(self.from_flat, g))


def _modality_free(f: Formula) -> bool:
    return not f.mask & (M_BOX | M_DIA)


def flatten_modal_horn(f: Formula) -> Flattened:
    """b1 -> (b2 -> ... -> s) becomes conj(atoms of b1, b2, ...) -> s, with
    LJ proofs f => f' and f' => f."""
    if not (is_modal_horn(f) and _modality_free(f)):
        raise NotModalityFreeHorn(print_formula(f))
    bodies: list[Formula] = []
    g = f
    while g.kind == IMP:
        bodies.append(g.left)
        g = g.right
    head = g
    if len(bodies) <= 1:
        return Flattened(f, B.idp(EMPTY, f), B.idp(EMPTY, f))
    atoms: list[Formula] = []
    for b in bodies:
        atoms.extend(horn_body_atoms(b))
    flat_body = big_and(atoms)
    fp = Imp(flat_body, head)
    # f, atoms => head
    ctx = FMultiset(atoms)
    chain = [f]
    for b in bodies[:-1]:
        chain.append(chain[-1].right)
    acc = B.idp(ctx, head)
    for k in range(len(bodies) - 1, -1, -1):
        acc = B.limp(_body_proof(ctx, bodies[k]), acc, chain[k].right)
    to_flat = B.rimp(B.lconj(acc, atoms), flat_body)
    # f', b1, ..., bm (each as its leaves) => head
    back = B.limp(_body_proof(ctx, flat_body), B.idp(ctx, head), head)
    for k in range(len(bodies) - 1, -1, -1):
        back = B.rimp(_lconj_tree(back, bodies[k]), bodies[k])
    return Flattened(fp, to_flat, back)


# ---------------------------------------------------------------------------
# Forgetting modalities


def forgetful_f(a: Formula, memo: dict | None = None) -> Formula:
    """Erase every box and diamond."""
    memo = {} if memo is None else memo
    r = memo.get(a)
    if r is not None:
        return r
    k = a.kind
    if k in (BOX, DIA):
        r = forgetful_f(a.left, memo)
    elif k in (AND, OR, IMP):
        ctor = {AND: And, OR: Or, IMP: Imp}[k]
        r = ctor(forgetful_f(a.left, memo), forgetful_f(a.right, memo))
    else:
        r = a
    memo[a] = r
    return r


def prove_trim(f: Formula, box_rule: str = "Kbox", dia_rule: str = "Kdia") -> tuple[Formula, Proof, Proof]:
    """The top-trimmed form tf of f (see semantics) with proofs f => tf and tf => f."""
    k = f.kind
    if k in (AND, OR, IMP):
        a, fa, ba = prove_trim(f.left, box_rule, dia_rule)
        b, fb, bb = prove_trim(f.right, box_rule, dia_rule)
        l, r = f.left, f.right
        if k == AND and a.kind == TOP:
            need_l = B.cut(B.rtop(EMPTY), ba)
            return b, B.land2(fb, l, r), B.rand(B.lw(need_l, b), bb)
        if k == AND and b.kind == TOP:
            need_r = B.cut(B.rtop(EMPTY), bb)
            return a, B.land1(fa, l, r), B.rand(ba, B.lw(need_r, a))
        if k == IMP and a.kind == TOP:
            need_l = B.cut(B.rtop(EMPTY), ba)
            return b, B.limp(need_l, fb, r), B.rimp(B.lw(bb, l), l)
        if k == AND:
            tf = And(a, b)
            return tf, B.rand(B.land1(fa, l, r), B.land2(fb, l, r)), B.rand(B.land1(ba, a, b), B.land2(bb, a, b))
        if k == OR:
            tf = Or(a, b)
            return (
                tf,
                B.lor(B.ror1(fa, b), B.ror2(fb, a), l, r),
                B.lor(B.ror1(ba, r), B.ror2(bb, l), a, b),
            )
        tf = Imp(a, b)
        return tf, B.rimp(B.limp(ba, fb, r), a), B.rimp(B.limp(fa, bb, b), l)
    if k == BOX:
        a, fa, ba = prove_trim(f.left, box_rule, dia_rule)
        if a is f.left:
            return f, B.idp(EMPTY, f), B.idp(EMPTY, f)
        return Box(a), B.kbox(fa), B.kbox(ba)
    if k == DIA:
        a, fa, ba = prove_trim(f.left, box_rule, dia_rule)
        if a is f.left:
            return f, B.idp(EMPTY, f), B.idp(EMPTY, f)
        mono = B.kdia if dia_rule == "Kdia" else B.dial
        return Dia(a), mono(fa, f.left), mono(ba, a)
    return f, B.idp(EMPTY, f), B.idp(EMPTY, f)


class TTemplates:
    """Proofs of box B => B and B => dia B from the T axioms of a calculus."""

    def __init__(self, g: Calculus):
        self.g = g
        self.found: dict[str, tuple[str, Formula, Formula, Proof]] = {}
        dia_rule = "Kdia" if "Kdia" in g.by_name else "DiaL"
        for r in g.rules:
            a = r.axiom_formula()
            if a is None:
                continue
            for which in (T_A_NAME, T_B_NAME):
                if which not in self.found and _is_t_axiom(a, which):
                    tf, fwd, _ = prove_trim(a, "Kbox", dia_rule)
                    x = tf.right if which == T_A_NAME else tf.left
                    self.found[which] = (r.name, a, x, fwd)
        self.memo: dict = {}

    def has(self, which: str) -> bool:
        return which in self.found

    def proof(self, which: str, b: Formula) -> Proof:
        """box b => b (T_a) or b => dia b (T_b)."""
        key = (which, b)
        p = self.memo.get(key)
        if p is not None:
            return p
        if which not in self.found:
            raise NotTFull(f"no {which} axiom in {self.g.name}")
        name, a, x, fwd = self.found[which]
        inst = B.axiom(name, a, {x: b})
        imp_goal = B.cut(inst, subst_proof(fwd, {x: b}))
        if which == T_A_NAME:
            use = B.limp(B.idp(EMPTY, Box(b)), B.idp(EMPTY, b), b)
        else:
            use = B.limp(B.idp(EMPTY, b), B.idp(EMPTY, Dia(b)), Dia(b))
        p = B.cut(imp_goal, use)
        self.memo[key] = p
        return p


def prove_forget(g: Calculus, a: Formula, templates: TTemplates | None = None) -> Proof:
    """A g-proof of a => forgetful_f(a) for modal Horn a in a calculus with T
    axioms."""
    if not is_modal_horn(a):
        raise NotModalHorn(print_formula(a))
    tt = templates or TTemplates(g)
    fmemo: dict = {}
    memo: dict = {}

    def body_back(x: Formula) -> Proof:
        """f(x) => x for a conjunction tree of dia^n atoms."""
        if x.kind == AND:
            fl, fr = forgetful_f(x.left, fmemo), forgetful_f(x.right, fmemo)
            return B.rand(B.land1(body_back(x.left), fl, fr), B.land2(body_back(x.right), fl, fr))
        depth = 0
        y = x
        while y.kind == DIA:
            depth += 1
            y = y.left
        acc = B.idp(EMPTY, y)
        cur = y
        for _ in range(depth):
            acc = B.cut(acc, B.weaken_to(tt.proof(T_B_NAME, cur), FMultiset.of(y, cur)))
            cur = Dia(cur)
        return acc

    def go(x: Formula) -> Proof:
        p = memo.get(x)
        if p is not None:
            return p
        k = x.kind
        if k in (ATOM, ANGLE, BOT):
            p = B.idp(EMPTY, x)
        elif k == BOX:
            p = B.cut(tt.proof(T_A_NAME, x.left), go(x.left))
        else:
            fb = forgetful_f(x.left, fmemo)
            fh = forgetful_f(x.right, fmemo)
            inner = B.limp(body_back(x.left), go(x.right), x.right)
            p = B.rimp(inner, fb)
            assert p.goal is Imp(fb, fh)
        memo[x] = p
        return p

    return go(a)


# ---------------------------------------------------------------------------
# Reduction


class ReductionResult:
    """Sigma' in the order of the input, per-member proofs, and the targets.

    `pieces[k]` is None when the k-th input member is dropped, otherwise the
    pair (member of Sigma', proof of sigma_k => that member). The proof of
    Sigma => conj(Sigma') is assembled on first access."""

    def __init__(self, sigma: list, pieces: list, targets: list):
        self.sigma = sigma
        self.pieces = pieces
        self.ordered = [p[0] for p in pieces if p is not None]
        self.sigma_prime = FMultiset(self.ordered)
        self.targets = targets
        self._deriv: Proof | None = None

    @property
    def derivation_proof(self) -> Proof:
        if self._deriv is None:
            ctx = FMultiset(self.sigma)
            pis = [B.weaken_to(p[1], ctx) for p in self.pieces if p is not None]
            self._deriv = B.rconj(pis, ctx)
        return self._deriv


def reduce_member(g: Calculus, tclass: str, s: Formula, templates: TTemplates | None = None):
    """None or (F, proof of s => F) for one modal Horn member s."""
    if not is_modal_horn(s):
        raise NotHorn(print_formula(s))
    if tclass == "TFree":
        if not _modality_free(s):
            return None
        fl = flatten_modal_horn(s)
        return fl.formula, fl.to_flat
    if tclass == "TFull":
        tt = templates or TTemplates(g)
        fs = forgetful_f(s)
        fl = flatten_modal_horn(fs)
        pi = prove_forget(g, s, tt)
        return fl.formula, B.cut(pi, B.weaken_to(fl.to_flat, FMultiset.of(s, fs)))
    raise NeitherTClass(str(tclass))


def reduce(
    g: Calculus,
    tclass: str,
    sigma: Sequence[Formula] | FMultiset,
    negated_atoms: Sequence[Formula] = (),
    targets: Sequence[Formula] = (),
) -> ReductionResult:
    """Implicational Horn Sigma' with a g-proof of Sigma => conj(Sigma').

    TFree keeps the modality-free members; TFull forgets all modalities. The
    reduced sequent has targets p_1..p_n followed by the negated atoms."""
    sigma = list(sigma)
    if tclass not in ("TFree", "TFull"):
        raise NeitherTClass(str(tclass))
    tt = TTemplates(g) if tclass == "TFull" else None
    cache: dict = {}
    pieces = []
    for s in sigma:
        if s not in cache:
            cache[s] = reduce_member(g, tclass, s, tt)
        pieces.append(cache[s])
    return ReductionResult(sigma, pieces, list(targets) + list(negated_atoms))
