"""Scaling families of proofs and the extraction corpus with known branches."""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import build as B
from .calculus import Calculus, Proof, builtin
from .classify import is_harrop
from .core import (
    BOT_F,
    EMPTY,
    IMP,
    Atom,
    Box,
    Dia,
    FMultiset,
    Formula,
    Imp,
    LanguageTag,
    ModalProofError,
    Or,
    big_and,
)
from .extract import ExtractionInput
from .gen import horn_chain, random_formula, random_proof
from .hornsolve import derive_bot_or
from .semantics import classify_tness, falsifying_valuation


class UnknownGenerator(ModalProofError):
    code = "UnknownGenerator"


# ---------------------------------------------------------------------------
# Scaling families


def nested_and(n: int) -> Proof:
    """=> ((T & T) & ...) & T by n right-conjunction steps (2n + 1 nodes)."""
    pi = B.rtop(EMPTY)
    for _ in range(n):
        pi = B.rand(pi, B.rtop(EMPTY))
    return pi


def nested_and_or(n: int) -> Proof:
    """=> F_n | bot where F_n alternates n conjunction and disjunction steps."""
    pi = B.rtop(EMPTY)
    for k in range(n):
        pi = B.rand(pi, B.rtop(EMPTY)) if k % 2 == 0 else B.ror1(pi, BOT_F)
    return B.ror1(pi, BOT_F)


def kdia_tower(n: int) -> Proof:
    """dia^n p => dia^n p by n applications of Kdia to the identity."""
    p = Atom("p")
    pi = B.idp(EMPTY, p)
    a = p
    for _ in range(n):
        pi = B.kdia(pi, a)
        a = Dia(a)
    return pi


def horn_chain_proof(n: int) -> Proof:
    """p0, p0 -> p1, ..., p(n-1) -> pn => pn by unit propagation."""
    gamma = horn_chain(n)
    pi = derive_bot_or(gamma, gamma[-1].right if n else gamma[0])
    assert pi is not None
    return pi


GENERATORS = {
    "nested-and": nested_and,
    "nested-and-or": nested_and_or,
    "kdia-tower": kdia_tower,
    "horn-chain": horn_chain_proof,
}


def build_corpus_proof(name: str, n: int) -> Proof:
    gen = GENERATORS.get(name)
    if gen is None:
        raise UnknownGenerator(f"unknown generator {name}; known: {', '.join(sorted(GENERATORS))}")
    if n < 0:
        raise ValueError("size must be nonnegative")
    return gen(n)


# ---------------------------------------------------------------------------
# Extraction corpus


@dataclass
class CorpusInstance:
    """An extraction input whose provable branch is unique by construction.

    `expected` is "Left", "Right" or "Antecedent"; `index` is the position of
    the provable premise (counting from 1) for the antecedent case. Every
    other branch is refuted by a one-node countermodel on `reflexive`."""

    name: str
    inp: ExtractionInput
    expected: str
    index: int = 0
    reflexive: bool = False


CORPUS_CALCULI = (("CK", 9), ("IK", 9), ("CKT4", 9), ("MIPC", 9), ("CK_box", 8), ("PLL", 8), ("LJ", 8))


def _frame(g: Calculus) -> bool:
    """The one-node frame on which every theorem of g holds (True = reflexive)."""
    if g.lang == LanguageTag.Propositional:
        return False
    return classify_tness(g.axioms(), g.lang).kind == "TFull"


def refuted(ctx, x: Formula, reflexive: bool) -> bool:
    """Some valuation on the one-node frame makes ctx true and x false."""
    return falsifying_valuation(Imp(big_and(list(ctx)), x), reflexive) is not None


def _theorem(rng: random.Random, g: Calculus, steps: int) -> Proof:
    """A proof of => X with X random, closed by implication introductions."""
    for _ in range(200):
        pi = random_proof(rng, g, steps, max_ctx=4, max_formula=18)
        if pi.goal is None:
            continue
        for a in list(pi.ant):
            pi = B.rimp(pi, a)
        return pi
    raise RuntimeError("no theorem found")  # pragma: no cover


def _refuted_formula(rng, g: Calculus, ctx, refl: bool, atoms) -> Formula:
    for _ in range(500):
        x = random_formula(rng, rng.randint(1, 4), g.lang, atoms)
        if refuted(ctx, x, refl):
            return x
    return Atom("fresh")


def _family_dp(rng, g: Calculus, refl: bool, i: int) -> CorpusInstance:
    th = _theorem(rng, g, 8)
    c = th.goal
    d = _refuted_formula(rng, g, [], refl, ("p", "q", "r"))
    if rng.random() < 0.5:
        pi = B.ror1(th, d)
        inp = ExtractionInput(g, pi, EMPTY, [], (c, d))
        return CorpusInstance(f"{g.name}-dp-{i}", inp, "Left", 0, refl)
    pi = B.ror2(th, d)
    inp = ExtractionInput(g, pi, EMPTY, [], (d, c))
    return CorpusInstance(f"{g.name}-dp-{i}", inp, "Right", 0, refl)


def _family_context(rng, g: Calculus, refl: bool, i: int) -> CorpusInstance:
    """A random proof Gamma, I => X with Harrop Gamma and implications I."""
    for _ in range(500):
        pi = random_proof(rng, g, 10, max_ctx=4, max_formula=18)
        if pi.goal is None or not pi.ant:
            continue
        ant = list(pi.ant)
        gamma = [f for f in ant if is_harrop(f)]
        imps = [f for f in ant if not is_harrop(f)]
        if any(f.kind != IMP for f in imps):
            continue
        if not refuted(ant, BOT_F, refl):
            continue  # inconsistent context
        if any(not refuted(ant, f.left, refl) for f in imps):
            continue
        d = _refuted_formula(rng, g, ant, refl, ("p", "q", "r", "s"))
        if not refuted(ant, d, refl):
            continue
        x = pi.goal
        left = rng.random() < 0.5
        out = B.ror1(pi, d) if left else B.ror2(pi, d)
        inp = ExtractionInput(g, out, FMultiset(gamma), [(f.left, f.right) for f in imps], (x, d) if left else (d, x))
        return CorpusInstance(f"{g.name}-ctx-{i}", inp, "Left" if left else "Right", 0, refl)
    raise RuntimeError("no context instance found")  # pragma: no cover


def _harrop_atoms(rng, g: Calculus, n: int) -> list[Formula]:
    pool = [Atom("p"), Atom("q"), Imp(Atom("p"), Atom("q"))]
    if g.lang in (LanguageTag.Full, LanguageTag.BoxOnly):
        pool += [Box(Atom("q")), Box(Imp(Atom("q"), Atom("r")))]
    return [rng.choice(pool) for _ in range(n)]


def _family_antecedent(rng, g: Calculus, refl: bool, i: int) -> CorpusInstance:
    """Gamma, ..., A -> (c | d), ... => c | d with A a theorem and c, d fresh."""
    c, d = Atom("c"), Atom("d")
    cd = Or(c, d)
    for _ in range(200):
        th = _theorem(rng, g, 6)
        a = th.goal
        gamma = _harrop_atoms(rng, g, rng.randint(0, 2))
        others = []
        for _ in range(rng.randint(0, 2)):
            x = _refuted_formula(rng, g, gamma, refl, ("p", "q", "r"))
            others.append(Imp(x, random_formula(rng, 2, g.lang, ("p", "q"))))
        k = rng.randint(0, len(others))
        imps = others[:k] + [Imp(a, cd)] + others[k:]
        ant = gamma + imps
        if not refuted(ant, c, refl) or not refuted(ant, d, refl):
            continue
        if any(not refuted(ant, f.left, refl) for f in others):
            continue
        pi = B.limp(th, B.idp(EMPTY, cd), cd)
        pi = B.weaken_to(pi, FMultiset(ant), cd)
        inp = ExtractionInput(g, pi, FMultiset(gamma), [(f.left, f.right) for f in imps], (c, d))
        return CorpusInstance(f"{g.name}-ant-{i}", inp, "Antecedent", k + 1, refl)
    raise RuntimeError("no antecedent instance found")  # pragma: no cover


_FAMILIES = (_family_dp, _family_context, _family_antecedent)


def extraction_corpus(seed: int = 0) -> list[CorpusInstance]:
    """60 instances over CK, IK, CKT4, MIPC, CK_box, PLL and LJ."""
    rng = random.Random(seed)
    out: list[CorpusInstance] = []
    for name, count in CORPUS_CALCULI:
        g = builtin(name)
        refl = _frame(g)
        for i in range(count):
            out.append(_FAMILIES[i % 3](rng, g, refl, i))
    return out


def _closed(pi: Proof) -> Proof:
    for a in list(pi.ant):
        pi = B.rimp(pi, a)
    return pi


def fragment_detours(rng: random.Random, lift, count: int, steps: int = 12) -> list[Proof]:
    """Proofs in lift.g_ext of fragment-language sequents that pass through
    the extension: a closed g_ext theorem X proved with at least one rule
    outside g is cut against a weakened g-proof of a fragment sequent."""
    from .calculus import rules_used
    from .core import check_lang

    base = {r.name for r in lift.g.rules}
    out: list[Proof] = []
    for _ in range(200 * count):
        if len(out) == count:
            break
        th = random_proof(rng, lift.g_ext, rng.randint(3, steps), max_ctx=3, max_formula=14)
        if th.goal is None or not (set(rules_used(th)) - base):
            continue
        th = _closed(th)
        rho = random_proof(rng, lift.g, rng.randint(2, steps), max_ctx=3, max_formula=14)
        try:
            for f in (*rho.ant, *([rho.goal] if rho.goal is not None else [])):
                check_lang(f, lift.g.lang)
        except ModalProofError:
            continue
        if rho.goal is None:
            continue
        out.append(B.cut(B.weaken_to(th, rho.ant, th.goal), B.lw(rho, th.goal)))
    return out


def pi_ladder(n: int) -> Proof:
    """The extraction scaling family: n nested conjunction and disjunction
    steps around => T | bot."""
    return nested_and_or(n)


__all__ = [
    "UnknownGenerator",
    "GENERATORS",
    "build_corpus_proof",
    "nested_and",
    "nested_and_or",
    "kdia_tower",
    "horn_chain_proof",
    "CorpusInstance",
    "extraction_corpus",
    "refuted",
    "pi_ladder",
    "fragment_detours",
    "CORPUS_CALCULI",
]
