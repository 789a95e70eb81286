"""Random generators: formulas of each syntactic class, valid proofs in a given
calculus, single-node proof mutations and Horn instances."""

from __future__ import annotations

import random
from typing import Callable, Sequence

from . import build as B
from .calculus import Calculus, Proof, postorder
from .core import (
    BOT_F,
    TOP_F,
    And,
    Atom,
    Box,
    Dia,
    FMultiset,
    Formula,
    Imp,
    LanguageTag,
    Or,
    Sequent,
    big_and,
)

DEFAULT_ATOMS = ("p", "q", "r", "s")


def _atoms(names: Sequence[str]) -> list[Formula]:
    return [Atom(n) for n in names]


def random_formula(
    rng: random.Random,
    size: int,
    lang: LanguageTag = LanguageTag.Full,
    atoms: Sequence[str] = DEFAULT_ATOMS,
) -> Formula:
    """A random formula with roughly `size` connectives and leaves in lang."""
    ats = _atoms(atoms)
    unary: list[Callable[[Formula], Formula]] = []
    if lang in (LanguageTag.Full, LanguageTag.BoxOnly, LanguageTag.FullPlus):
        unary.append(Box)
    if lang in (LanguageTag.Full, LanguageTag.DiamondOnly, LanguageTag.FullPlus):
        unary.append(Dia)

    def go(n: int) -> Formula:
        if n <= 1:
            x = rng.random()
            if x < 0.08:
                return TOP_F
            if x < 0.14:
                return BOT_F
            return rng.choice(ats)
        if unary and rng.random() < 0.25:
            return rng.choice(unary)(go(n - 1))
        k = rng.randint(1, n - 1)
        return rng.choice((And, Or, Imp))(go(k), go(n - 1 - k) if n - 1 - k > 0 else go(1))

    return go(max(1, size))


def _leaf(rng: random.Random, ats: list[Formula], consts: bool = True) -> Formula:
    x = rng.random()
    if consts and x < 0.08:
        return TOP_F
    if consts and x < 0.14:
        return BOT_F
    return rng.choice(ats)


def random_basic(rng: random.Random, size: int, atoms: Sequence[str] = DEFAULT_ATOMS, dia: bool = True) -> Formula:
    ats = _atoms(atoms)

    def go(n: int) -> Formula:
        if n <= 1:
            return _leaf(rng, ats)
        if dia and rng.random() < 0.3:
            return Dia(go(n - 1))
        k = rng.randint(1, n - 1)
        return rng.choice((And, Or))(go(k), go(max(1, n - 1 - k)))

    return go(max(1, size))


def random_almost_positive(rng: random.Random, size: int, atoms: Sequence[str] = DEFAULT_ATOMS) -> Formula:
    ats = _atoms(atoms)

    def go(n: int) -> Formula:
        if n <= 1:
            return _leaf(rng, ats)
        x = rng.random()
        if x < 0.2:
            return rng.choice((Box, Dia))(go(n - 1))
        k = rng.randint(1, n - 1)
        if x < 0.45:
            return Imp(random_basic(rng, k, atoms), go(max(1, n - 1 - k)))
        return rng.choice((And, Or))(go(k), go(max(1, n - 1 - k)))

    return go(max(1, size))


def random_constructive(rng: random.Random, size: int, atoms: Sequence[str] = DEFAULT_ATOMS) -> Formula:
    ats = _atoms(atoms)

    def go(n: int) -> Formula:
        if n <= 1:
            return _leaf(rng, ats)
        x = rng.random()
        if x < 0.15:
            return random_basic(rng, n, atoms)
        if x < 0.35:
            return Box(go(n - 1))
        k = rng.randint(1, n - 1)
        if x < 0.7:
            return Imp(random_almost_positive(rng, k, atoms), go(max(1, n - 1 - k)))
        return And(go(k), go(max(1, n - 1 - k)))

    return go(max(1, size))


def random_harrop(rng: random.Random, size: int, atoms: Sequence[str] = DEFAULT_ATOMS) -> Formula:
    ats = _atoms(atoms)

    def go(n: int) -> Formula:
        if n <= 1:
            return _leaf(rng, ats)
        x = rng.random()
        if x < 0.2:
            return Box(go(n - 1))
        k = rng.randint(1, n - 1)
        if x < 0.6:
            return Imp(random_formula(rng, k, LanguageTag.Full, atoms), go(max(1, n - 1 - k)))
        return And(go(k), go(max(1, n - 1 - k)))

    return go(max(1, size))


# ---------------------------------------------------------------------------
# Random proofs


def _axiom_rules(g: Calculus) -> list:
    return [r for r in g.rules if r.axiom_formula() is not None]


def random_proof(
    rng: random.Random,
    g: Calculus,
    steps: int = 12,
    atoms: Sequence[str] = DEFAULT_ATOMS,
    max_ctx: int = 6,
    max_formula: int = 40,
) -> Proof:
    """A proof valid in g built by `steps` random rule applications.

    Conclusions are computed by the builder, so validity holds by construction
    (the checker is still the judge in tests)."""
    lang = g.lang
    names = g.by_name
    small = lambda n=2: random_formula(rng, rng.randint(1, n), lang, atoms)  # noqa: E731
    axioms = _axiom_rules(g)

    def leaf() -> Proof:
        x = rng.random()
        ctx = FMultiset(small() for _ in range(rng.randint(0, 2)))
        if axioms and x < 0.25:
            r = rng.choice(axioms)
            a = r.axiom_formula()
            amap = {t: small() for t in r.placeholders()}
            return B.axiom(r.name, a, amap)
        if x < 0.35:
            return B.lbot(ctx, small())
        if x < 0.42:
            return B.rtop(ctx)
        return B.idp(ctx, small(3))

    pool: list[Proof] = [leaf() for _ in range(3)]

    def ok(pi: Proof) -> bool:
        if len(pi.ant) > max_ctx:
            return False
        return all(f.size <= max_formula for f in pi.conclusion.formulas())

    def step() -> Proof | None:
        pi = rng.choice(pool)
        ant = pi.ant.items
        goal = pi.goal
        ops = ["leaf", "lw", "ror", "rand", "limp", "cut", "lor"]
        if ant:
            ops += ["land", "rimp", "lc", "land"]
        if "Kbox" in names and goal is not None:
            ops.append("kbox")
        if "Kdia" in names and goal is not None and ant:
            ops.append("kdia")
        if "DiaL" in names and goal is not None and ant:
            ops.append("dial")
        op = rng.choice(ops)
        if op == "leaf":
            return leaf()
        if op == "lw":
            return B.lw(pi, small())
        if op == "land":
            a = rng.choice(ant)
            b = small()
            return B.land1(pi, a, b) if rng.random() < 0.5 else B.land2(pi, b, a)
        if op == "rimp":
            if goal is None:
                return None
            return B.rimp(pi, rng.choice(ant))
        if op == "lc":
            a = rng.choice(ant)
            return B.lc(B.lw(pi, a), a)
        if op == "ror":
            if goal is None:
                return None
            return B.ror1(pi, small()) if rng.random() < 0.5 else B.ror2(pi, small())
        if op == "rand":
            other = rng.choice(pool)
            if goal is None or other.goal is None:
                return None
            return B.rand(pi, other)
        if op == "limp":
            other = rng.choice(pool)
            if goal is None or not other.ant:
                return None
            return B.limp(pi, other, rng.choice(other.ant.items))
        if op == "cut":
            if goal is None:
                return None
            cands = [q for q in pool if goal in q.ant]
            other = rng.choice(cands) if cands else B.lw(rng.choice(pool), goal)
            return B.cut(pi, other)
        if op == "lor":
            if not ant:
                a = small()
                pi = B.lw(pi, a)
            else:
                a = rng.choice(ant)
            same = [q for q in pool if q.succ == pi.succ and q.ant]
            if same and rng.random() < 0.6:
                other = rng.choice(same)
                b = rng.choice(other.ant.items)
            else:
                b = small()
                other = B.lw(pi, b)
            return B.lor(pi, other, a, b)
        if op == "kbox":
            return B.kbox(pi)
        if op == "kdia":
            return B.kdia(pi, rng.choice(ant))
        if op == "dial":
            return B.dial(pi, rng.choice(ant))
        return None  # pragma: no cover

    made = 0
    tries = 0
    while made < steps and tries < steps * 20:
        tries += 1
        new = step()
        if new is None or not ok(new):
            continue
        pool.append(new)
        made += 1
    return max(pool, key=lambda p: len(postorder(p)))


# ---------------------------------------------------------------------------
# Mutations


MUTANT_ATOM = Atom("mutant_atom")


def node_at(root: Proof, path: Sequence[int]) -> Proof:
    n = root
    for i in path:
        n = n.children[i]
    return n


def all_paths(root: Proof, limit: int = 100000) -> list[tuple[int, ...]]:
    """Tree positions in the proof (shared nodes are listed once per position)."""
    out: list[tuple[int, ...]] = []
    stack: list[tuple[Proof, tuple[int, ...]]] = [(root, ())]
    while stack and len(out) < limit:
        n, p = stack.pop()
        out.append(p)
        for i, c in enumerate(n.children):
            stack.append((c, p + (i,)))
    return out


def replace_at(root: Proof, path: Sequence[int], new: Proof) -> Proof:
    if not path:
        return new
    i = path[0]
    kids = list(root.children)
    kids[i] = replace_at(kids[i], path[1:], new)
    return Proof(root.conclusion, root.rule, root.subst, tuple(kids), root.hyp)


def mutate(rng: random.Random, root: Proof) -> tuple[Proof, tuple[int, ...], str]:
    """Change one node of the proof so that the result no longer checks."""
    path = rng.choice(all_paths(root))
    n = node_at(root, path)
    kind = rng.choice(("ant", "succ", "rule"))
    c = n.conclusion
    if kind == "ant":
        new = Proof(Sequent(c.ant.add(MUTANT_ATOM), c.succ), n.rule, n.subst, n.children, n.hyp)
    elif kind == "succ":
        succ = FMultiset.of(MUTANT_ATOM) if not c.succ else FMultiset.of(And(c.goal, MUTANT_ATOM))
        new = Proof(Sequent(c.ant, succ), n.rule, n.subst, n.children, n.hyp)
    else:
        # a rule whose premise count differs from the node's
        other = {0: "cut", 1: "Rand"}.get(len(n.children), "Lw")
        new = Proof(c, other, n.subst, n.children, n.hyp)
    return replace_at(root, path, new), tuple(path), kind


# ---------------------------------------------------------------------------
# Horn instances


def random_horn_clauses(
    rng: random.Random,
    n_atoms: int,
    n_clauses: int,
    max_body: int = 3,
    unit_rate: float = 0.2,
    bot_rate: float = 0.05,
    prefix: str = "a",
) -> list[Formula]:
    """Random implicational Horn formulas: atoms, bot, or conj(atoms) -> head."""
    ats = [Atom(f"{prefix}{i}") for i in range(n_atoms)]
    out: list[Formula] = []
    for _ in range(n_clauses):
        x = rng.random()
        if x < bot_rate:
            out.append(BOT_F)
        elif x < bot_rate + unit_rate:
            out.append(rng.choice(ats))
        else:
            body = [rng.choice(ats) for _ in range(rng.randint(1, max_body))]
            head = BOT_F if rng.random() < bot_rate else rng.choice(ats)
            out.append(Imp(big_and(body), head))
    return out


def horn_chain(n: int) -> list[Formula]:
    """p0, p0 -> p1, ..., p(n-1) -> pn."""
    ps = [Atom(f"p{i}") for i in range(n + 1)]
    return [ps[0]] + [Imp(ps[i], ps[i + 1]) for i in range(n)]


def random_general_rule(rng: random.Random, max_size: int = 40, bias: float = 0.6, name: str = "R"):
    """A random single-conclusion rule in the general left/right form with one
    shared context G. With probability `bias` each slot is drawn from the class
    the constructive templates ask for, so both verdicts occur often."""
    from .calculus import rule
    from .core import print_formula

    budget = [max_size]

    def pick(gen_ok) -> Formula:
        size = rng.randint(1, max(1, min(6, budget[0] - 1)))
        f = gen_ok(rng, size) if rng.random() < bias else random_formula(rng, size)
        budget[0] -= f.size
        return f

    def seq(ant: list[Formula], succ: str) -> str:
        lhs = "G" + (" ; " + ", ".join(print_formula(f) for f in ant) if ant else "")
        return f"{lhs} => {succ}".rstrip()

    basic, ap, cons = random_basic, random_almost_positive, random_constructive
    left = rng.random() < 0.5
    prems: list[str] = []
    for _ in range(rng.randint(0, 2)):
        if budget[0] < 4:
            break
        phis = [pick(basic) for _ in range(rng.randint(0, 1))]
        psi = [pick(ap)] if rng.random() < 0.8 else []
        prems.append(seq(phis, " ".join(print_formula(f) for f in psi)))
    if left:
        for _ in range(rng.randint(0, 2)):
            if budget[0] < 2:
                break
            prems.append(seq([pick(basic) for _ in range(rng.randint(1, 2))], "D"))
        eta = [pick(cons) for _ in range(rng.randint(1, 2))] if budget[0] > 1 else []
        concl = seq(eta, "D")
    else:
        theta = [pick(basic) for _ in range(rng.randint(0, 1))] if budget[0] > 2 else []
        eta = [pick(ap)] if budget[0] > 1 else []
        concl = seq(theta, " ".join(print_formula(f) for f in eta))
    return rule(name, prems, concl)


__all__ = [
    "random_general_rule",
    "random_formula",
    "random_basic",
    "random_almost_positive",
    "random_constructive",
    "random_harrop",
    "random_proof",
    "mutate",
    "replace_at",
    "all_paths",
    "node_at",
    "random_horn_clauses",
    "horn_chain",
]
