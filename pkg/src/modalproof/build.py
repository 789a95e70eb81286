"""Proof-building combinators.

Each combinator emits one rule application (or a short fixed chain) and fills
in the substitution the checker expects. Binary rules weaken their premises
to a common context when the contexts differ.
"""

from __future__ import annotations

from collections import Counter
from typing import Sequence

from .calculus import P, Q, Proof, RuleSchema, Calculus
from .core import (
    BOT_F,
    EMPTY,
    TOP_F,
    And,
    Box,
    Dia,
    FMultiset,
    Formula,
    Imp,
    Or,
    Sequent,
    Substitution,
    atoms_of,
    big_and,
    big_or,
)


def _S(atoms: dict, G: FMultiset, D: FMultiset | None = None) -> Substitution:
    ctx = {"G": G} if D is None else {"G": G, "D": D}
    return Substitution(atoms, ctx)


def _ms(f: Formula | None) -> FMultiset:
    return EMPTY if f is None else FMultiset((f,), _sorted=True)


def msdiff(a: FMultiset, b: FMultiset) -> list[Formula]:
    """Members of a not covered by b (multiset difference a minus b)."""
    have = Counter(id(f) for f in b)
    out = []
    for f in a:
        if have[id(f)] > 0:
            have[id(f)] -= 1
        else:
            out.append(f)
    return out


def msmax(a: FMultiset, b: FMultiset) -> FMultiset:
    extra = msdiff(b, a)
    return a.add(*extra) if extra else a


# ---------------------------------------------------------------------------
# Single rule applications


def idp(ctx: FMultiset, a: Formula) -> Proof:
    """ctx, a => a."""
    return Proof(Sequent(ctx.add(a), _ms(a)), "id", _S({P: a}, ctx))


def lbot(ctx: FMultiset, goal: Formula | None = None) -> Proof:
    """ctx, bot => goal."""
    d = _ms(goal)
    return Proof(Sequent(ctx.add(BOT_F), d), "Lbot", _S({}, ctx, d))


def rtop(ctx: FMultiset) -> Proof:
    return Proof(Sequent(ctx, _ms(TOP_F)), "Rtop", _S({}, ctx))


def lw(pi: Proof, a: Formula) -> Proof:
    return Proof(Sequent(pi.ant.add(a), pi.succ), "Lw", _S({P: a}, pi.ant, pi.succ), (pi,))


def weaken(pi: Proof, fs) -> Proof:
    for f in fs:
        pi = lw(pi, f)
    return pi


def weaken_to(pi: Proof, ant: FMultiset, goal: Formula | None = None) -> Proof:
    """Weaken pi (left, and right if its succedent is empty) to ant => goal."""
    extra = msdiff(ant, pi.ant)
    if len(extra) != len(ant) - len(pi.ant):
        raise ValueError("target antecedent does not contain the proof's antecedent")
    if goal is not None and not pi.succ:
        pi = rw(pi, goal)
    return weaken(pi, extra)


def rw(pi: Proof, a: Formula) -> Proof:
    if pi.succ:
        raise ValueError("Rw needs an empty succedent")
    return Proof(Sequent(pi.ant, _ms(a)), "Rw", _S({P: a}, pi.ant), (pi,))


def lc(pi: Proof, a: Formula) -> Proof:
    g = pi.ant.remove(a, a)
    return Proof(Sequent(g.add(a), pi.succ), "Lc", _S({P: a}, g, pi.succ), (pi,))


def _align(pis: Sequence[Proof], ctxs: Sequence[FMultiset]) -> tuple[list[Proof], FMultiset]:
    g = ctxs[0]
    for c in ctxs[1:]:
        if c != g:
            g = msmax(g, c)
    out = []
    for pi, c in zip(pis, ctxs):
        out.append(pi if c == g else weaken(pi, msdiff(g, c)))
    return out, g


def _align_succ(p1: Proof, p2: Proof) -> tuple[Proof, Proof]:
    if p1.succ == p2.succ:
        return p1, p2
    if not p1.succ:
        return rw(p1, p2.goal), p2
    if not p2.succ:
        return p1, rw(p2, p1.goal)
    raise ValueError("succedents differ")


def cut(p1: Proof, p2: Proof) -> Proof:
    """From G => a and G, a => D infer G => D."""
    a = p1.goal
    (p1, p2), g = _align([p1, p2], [p1.ant, p2.ant.remove(a)])
    return Proof(Sequent(g, p2.succ), "cut", _S({P: a}, g, p2.succ), (p1, p2))


def land1(pi: Proof, a: Formula, b: Formula) -> Proof:
    g = pi.ant.remove(a)
    return Proof(Sequent(g.add(And(a, b)), pi.succ), "Land1", _S({P: a, Q: b}, g, pi.succ), (pi,))


def land2(pi: Proof, a: Formula, b: Formula) -> Proof:
    g = pi.ant.remove(b)
    return Proof(Sequent(g.add(And(a, b)), pi.succ), "Land2", _S({P: a, Q: b}, g, pi.succ), (pi,))


def rand(p1: Proof, p2: Proof) -> Proof:
    a, b = p1.goal, p2.goal
    (p1, p2), g = _align([p1, p2], [p1.ant, p2.ant])
    return Proof(Sequent(g, _ms(And(a, b))), "Rand", _S({P: a, Q: b}, g), (p1, p2))


def lor(p1: Proof, p2: Proof, a: Formula, b: Formula) -> Proof:
    p1, p2 = _align_succ(p1, p2)
    (p1, p2), g = _align([p1, p2], [p1.ant.remove(a), p2.ant.remove(b)])
    return Proof(Sequent(g.add(Or(a, b)), p1.succ), "Lor", _S({P: a, Q: b}, g, p1.succ), (p1, p2))


def ror1(pi: Proof, b: Formula) -> Proof:
    a = pi.goal
    return Proof(Sequent(pi.ant, _ms(Or(a, b))), "Ror1", _S({P: a, Q: b}, pi.ant), (pi,))


def ror2(pi: Proof, a: Formula) -> Proof:
    b = pi.goal
    return Proof(Sequent(pi.ant, _ms(Or(a, b))), "Ror2", _S({P: a, Q: b}, pi.ant), (pi,))


def limp(p1: Proof, p2: Proof, b: Formula) -> Proof:
    """From G => a and G, b => D infer G, a -> b => D."""
    a = p1.goal
    (p1, p2), g = _align([p1, p2], [p1.ant, p2.ant.remove(b)])
    return Proof(Sequent(g.add(Imp(a, b)), p2.succ), "Limp", _S({P: a, Q: b}, g, p2.succ), (p1, p2))


def rimp(pi: Proof, a: Formula) -> Proof:
    b = pi.goal
    g = pi.ant.remove(a)
    return Proof(Sequent(g, _ms(Imp(a, b))), "Rimp", _S({P: a, Q: b}, g), (pi,))


def kbox(pi: Proof) -> Proof:
    """From G => a infer box G => box a."""
    a = pi.goal
    if a is None:
        raise ValueError("Kbox needs a succedent formula")
    return Proof(Sequent(pi.ant.boxed(), _ms(Box(a))), "Kbox", _S({P: a}, pi.ant), (pi,))


def kdia(pi: Proof, a: Formula) -> Proof:
    """From G, a => b infer box G, dia a => dia b."""
    b = pi.goal
    g = pi.ant.remove(a)
    return Proof(Sequent(g.boxed().add(Dia(a)), _ms(Dia(b))), "Kdia", _S({P: a, Q: b}, g), (pi,))


def dial(pi: Proof, a: Formula) -> Proof:
    """From G, a => b infer G, dia a => dia b."""
    b = pi.goal
    g = pi.ant.remove(a)
    return Proof(Sequent(g.add(Dia(a)), _ms(Dia(b))), "DiaL", _S({P: a, Q: b}, g), (pi,))


def axiom(name: str, schema: Formula, atom_map: dict | None = None) -> Proof:
    """An instance (=> A(phi)) of the axiom rule `name` with formula `schema`."""
    from .core import apply_subst

    amap = {a: a for a in atoms_of(schema)}
    if atom_map:
        amap.update(atom_map)
    inst = apply_subst(schema, amap)
    return Proof(Sequent(EMPTY, _ms(inst)), name, Substitution(amap, {}))


def axiom_of(g: Calculus, name: str, atom_map: dict | None = None) -> Proof:
    r: RuleSchema = g.rule(name)
    a = r.axiom_formula()
    if a is None:
        raise ValueError(f"{name} is not an axiom of the form => A")
    return axiom(name, a, atom_map)


# ---------------------------------------------------------------------------
# Short chains


def pack(pi: Proof, a: Formula, b: Formula) -> Proof:
    """From G, a, b => D infer G, a & b => D (three nodes)."""
    pi = land1(pi, a, b)
    pi = land2(pi, a, b)
    return lc(pi, And(a, b))


def lconj(pi: Proof, fs: Sequence[Formula]) -> Proof:
    """Replace the antecedent members fs by their right-nested conjunction."""
    fs = list(fs)
    if not fs:
        return lw(pi, TOP_F)
    acc = fs[-1]
    for f in reversed(fs[:-1]):
        pi = pack(pi, f, acc)
        acc = And(f, acc)
    return pi


def rconj(proofs: Sequence[Proof], ctx: FMultiset | None = None) -> Proof:
    """From G => f_i infer G => f_1 & (f_2 & ...); empty gives Rtop."""
    proofs = list(proofs)
    if not proofs:
        return rtop(ctx if ctx is not None else EMPTY)
    acc = proofs[-1]
    for pi in reversed(proofs[:-1]):
        acc = rand(pi, acc)
    return acc


def proj(ctx: FMultiset, fs: Sequence[Formula], i: int) -> Proof:
    """ctx, conj(fs) => fs[i]."""
    fs = list(fs)
    tails = [big_and(fs[k:]) for k in range(len(fs))]
    if i == len(fs) - 1:
        pi = idp(ctx, fs[i])
    else:
        pi = land1(idp(ctx, fs[i]), fs[i], tails[i + 1])
    for k in range(i - 1, -1, -1):
        pi = land2(pi, fs[k], tails[k + 1])
    return pi


def inj(pi: Proof, fs: Sequence[Formula], i: int) -> Proof:
    """From G => fs[i] infer G => disj(fs)."""
    fs = list(fs)
    tails = [big_or(fs[k:]) for k in range(len(fs))]
    if i < len(fs) - 1:
        pi = ror1(pi, tails[i + 1])
    for k in range(i - 1, -1, -1):
        pi = ror2(pi, fs[k])
    return pi


def ldisj(proofs: Sequence[Proof], fs: Sequence[Formula], ctx: FMultiset | None = None,
          goal: Formula | None = None) -> Proof:
    """From G, fs[i] => D infer G, disj(fs) => D; empty gives Lbot."""
    fs = list(fs)
    proofs = list(proofs)
    if not fs:
        return lbot(ctx if ctx is not None else EMPTY, goal)
    acc = proofs[-1]
    for k in range(len(fs) - 2, -1, -1):
        acc = lor(proofs[k], acc, fs[k], big_or(fs[k + 1:]))
    return acc


def unpack_conj(ctx: FMultiset, fs: Sequence[Formula], pi: Proof) -> Proof:
    """From ctx, fs... => D (fs as separate members) obtain ctx, conj(fs) => D
    by projections and cuts; leaves pi's other members in place."""
    return lconj(pi, fs)


def conj_intro_ids(ctx: FMultiset, fs: Sequence[Formula]) -> Proof:
    """ctx, fs... => conj(fs) by identities and Rand."""
    full = ctx.add(*fs) if fs else ctx
    pis = [idp(full.remove(f), f) for f in fs]
    return rconj(pis, full)


def regroup(src: Sequence[Formula], dst: Sequence[Formula], ctx: FMultiset = EMPTY) -> Proof:
    """ctx, conj(src) => conj(dst) when dst is a sub-multiset of src."""
    pi = conj_intro_ids(EMPTY, dst)
    extra = msdiff(FMultiset(src), FMultiset(dst))
    pi = weaken(pi, extra)
    pi = lconj(pi, src)
    return weaken(pi, ctx)


def mp(pa: Proof, imp: Formula, rest: Proof) -> Proof:
    """From G => a and G, b => D infer G, a -> b => D."""
    return limp(pa, rest, imp.right)


def chain_cut(first: Proof, *rest: Proof) -> Proof:
    """Compose G => a1, G, a1 => a2, ... by cuts."""
    acc = first
    for pi in rest:
        acc = cut(acc, pi)
    return acc


# ---------------------------------------------------------------------------
# Named constructions


def prove_box_distribution(gamma: FMultiset) -> Proof:
    """box conj(G) => conj(box g for g in G), in Kbox plus LJ.

    The conjunction on the right follows G's member order."""
    items = list(gamma)
    if not items:
        from .calculus import EmptyMultiset

        raise EmptyMultiset("box distribution needs a non-empty multiset")
    pis = [kbox(proj(EMPTY, items, i)) for i in range(len(items))]
    return rconj(pis)


def prove_box_gather(gamma: FMultiset) -> Proof:
    """conj(box g for g in G) => box conj(G)."""
    items = list(gamma)
    pi = kbox(conj_intro_ids(EMPTY, items))
    return lconj(pi, [Box(g) for g in items])


def prove_reflexive_implication(a: Formula, context: FMultiset = EMPTY) -> Proof:
    """context => a -> a via id, Rimp and weakenings."""
    return weaken(rimp(idp(EMPTY, a), a), context)


def prove_lemma_equiv(a: Formula, ctx: FMultiset = EMPTY) -> Proof:
    """ctx, a => a."""
    return idp(ctx, a)
