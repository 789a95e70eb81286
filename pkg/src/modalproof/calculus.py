"""Rule schemas, calculi, proof objects, the checker and the builtin catalog."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import (
    BOT_F,
    EMPTY,
    M_ANGLE,
    TOP_F,
    And,
    Atom,
    Box,
    Dia,
    FMultiset,
    Formula,
    Imp,
    LanguageTag,
    ModalProofError,
    Neg,
    Or,
    Sequent,
    Substitution,
    UnboundVariable,
    atoms_of,
    big_and,
    big_or,
    boxes,
    check_lang,
    dias,
    parse_formula,
    parse_sequent,
    print_formula,
    print_sequent,
)


class UnknownCalculus(ModalProofError):
    code = "UnknownCalculus"


class NegativeIndex(ModalProofError):
    code = "NegativeIndex"


class EmptyMultiset(ModalProofError):
    code = "EmptyMultiset"


class DagProof(ModalProofError):
    """A serialized proof shares a node between two parents."""

    code = "DagProof"


class ProofFormatError(ModalProofError):
    code = "ProofFormatError"


# ---------------------------------------------------------------------------
# Meta-sequents and rules


@dataclass(frozen=True)
class MetaSequent:
    """Context slots plus placeholder formulas on the left; a context variable
    or at most one placeholder formula on the right."""

    slots: tuple[tuple[str, bool], ...]
    formulas: tuple[Formula, ...]
    succ: str | tuple[Formula, ...]

    def placeholders(self) -> list[Formula]:
        out: list[Formula] = []
        fs = list(self.formulas) + (list(self.succ) if isinstance(self.succ, tuple) else [])
        for f in fs:
            for a in atoms_of(f):
                if a not in out:
                    out.append(a)
        return out

    def context_vars(self) -> list[str]:
        out = [v for v, _ in self.slots]
        if isinstance(self.succ, str):
            out.append(self.succ)
        return out

    def __str__(self) -> str:
        return print_meta_sequent(self)


@dataclass(frozen=True)
class RuleSchema:
    name: str
    premises: tuple[MetaSequent, ...]
    conclusion: MetaSequent

    @property
    def is_axiom(self) -> bool:
        return not self.premises

    def placeholders(self) -> list[Formula]:
        out: list[Formula] = []
        for m in (*self.premises, self.conclusion):
            for a in m.placeholders():
                if a not in out:
                    out.append(a)
        return out

    def context_vars(self) -> list[str]:
        out: list[str] = []
        for m in (*self.premises, self.conclusion):
            for v in m.context_vars():
                if v not in out:
                    out.append(v)
        return out

    def axiom_formula(self) -> Formula | None:
        """A when the rule is the bare axiom (=> A), else None."""
        c = self.conclusion
        if self.premises or c.slots or c.formulas or not isinstance(c.succ, tuple) or len(c.succ) != 1:
            return None
        return c.succ[0]

    def mask(self) -> int:
        m = 0
        for ms in (*self.premises, self.conclusion):
            for f in ms.formulas:
                m |= f.mask
            if isinstance(ms.succ, tuple):
                for f in ms.succ:
                    m |= f.mask
        return m

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "premises": [print_meta_sequent(m) for m in self.premises],
            "conclusion": print_meta_sequent(self.conclusion),
        }


_CTX_VAR = re.compile(r"^(box\s+)?([A-Z][A-Za-z0-9_]*)$")


def parse_meta_sequent(text: str, lang: LanguageTag = LanguageTag.FullPlus) -> MetaSequent:
    """Parse `G ; box H ; A, B => D`; uppercase names are context variables."""
    if "=>" not in text:
        raise ProofFormatError(f"meta-sequent without '=>': {text!r}")
    left, right = text.split("=>", 1)
    slots: list[tuple[str, bool]] = []
    formulas: list[Formula] = []
    for group in left.split(";"):
        group = group.strip()
        if not group:
            continue
        m = _CTX_VAR.match(group)
        if m:
            slots.append((m.group(2), bool(m.group(1))))
            continue
        for part in group.split(","):
            part = part.strip()
            if not part:
                continue
            m = _CTX_VAR.match(part)
            if m:
                slots.append((m.group(2), bool(m.group(1))))
            else:
                formulas.append(parse_formula(part, lang))
    right = right.strip()
    succ: str | tuple[Formula, ...]
    if not right:
        succ = ()
    elif re.fullmatch(r"[A-Z][A-Za-z0-9_]*", right):
        succ = right
    else:
        succ = (parse_formula(right, lang),)
    return MetaSequent(tuple(slots), tuple(formulas), succ)


def print_meta_sequent(m: MetaSequent) -> str:
    groups = [("box " if boxed else "") + v for v, boxed in m.slots]
    if m.formulas:
        groups.append(", ".join(print_formula(f) for f in m.formulas))
    left = " ; ".join(groups)
    if isinstance(m.succ, str):
        right = m.succ
    else:
        right = ", ".join(print_formula(f) for f in m.succ)
    return f"{left} => {right}".strip()


def rule(name: str, premises: Sequence[str], conclusion: str) -> RuleSchema:
    """Build a rule schema from meta-sequent strings."""
    return RuleSchema(
        name,
        tuple(parse_meta_sequent(p) for p in premises),
        parse_meta_sequent(conclusion),
    )


def axiom_rule(a: Formula, name: str | None = None) -> RuleSchema:
    """The zero-premise schema (=> a)."""
    return RuleSchema(name or f"ax[{print_formula(a)}]", (), MetaSequent((), (), (a,)))


def _inst_meta(m: MetaSequent, s: Substitution, memo: dict) -> Sequent:
    ant = EMPTY
    for v, boxed in m.slots:
        try:
            c = s.ctx[v]
        except KeyError:
            raise UnboundVariable(f"context variable {v} unbound") from None
        ant = ant + (c.boxed() if boxed else c)
    if m.formulas:
        ant = ant + FMultiset(_inst_formula(f, s, memo) for f in m.formulas)
    if isinstance(m.succ, str):
        try:
            succ = s.ctx[m.succ]
        except KeyError:
            raise UnboundVariable(f"context variable {m.succ} unbound") from None
    else:
        succ = FMultiset(_inst_formula(f, s, memo) for f in m.succ)
    return Sequent(ant, succ)


def _inst_formula(f: Formula, s: Substitution, memo: dict) -> Formula:
    def look(a: Formula) -> Formula:
        r = s.atoms.get(a)
        if r is None:
            raise UnboundVariable(f"placeholder {print_formula(a)} unbound")
        return r

    from .core import map_atoms

    return map_atoms(f, look, memo)


def instantiate(r: RuleSchema, s: Substitution) -> tuple[list[Sequent], Sequent]:
    """Slot-wise substitution into premises and conclusion."""
    memo: dict = {}
    prem = [_inst_meta(m, s, memo) for m in r.premises]
    return prem, _inst_meta(r.conclusion, s, memo)


# ---------------------------------------------------------------------------
# Calculi


@dataclass(frozen=True)
class Calculus:
    name: str
    lang: LanguageTag
    rules: tuple[RuleSchema, ...]
    by_name: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        d = {}
        for r in self.rules:
            if r.name in d:
                raise ValueError(f"duplicate rule name {r.name}")
            d[r.name] = r
        object.__setattr__(self, "by_name", d)

    def __contains__(self, name: str) -> bool:
        return name in self.by_name

    def rule(self, name: str) -> RuleSchema:
        return self.by_name[name]

    def axioms(self) -> list[Formula]:
        return [a for a in (r.axiom_formula() for r in self.rules) if a is not None]

    def extend(self, rules: Iterable[RuleSchema], name: str | None = None) -> "Calculus":
        new = list(self.rules)
        for r in rules:
            if r.name in self.by_name:
                if self.by_name[r.name] != r:
                    raise ValueError(f"rule name clash {r.name}")
                continue
            new.append(r)
        return Calculus(name or self.name, self.lang, tuple(new))

    def with_lang(self, lang: LanguageTag, name: str | None = None) -> "Calculus":
        return Calculus(name or self.name, lang, self.rules)

    def to_json(self) -> dict:
        return {"name": self.name, "lang": self.lang.value, "rules": [r.to_json() for r in self.rules]}


def add_axioms(g: Calculus, axioms: Iterable[Formula], names: Iterable[str] | None = None) -> Calculus:
    """G plus one (=> A) schema per axiom; axioms must lie in g's language."""
    axioms = list(axioms)
    names = list(names) if names is not None else [None] * len(axioms)
    rules = []
    for a, n in zip(axioms, names):
        check_lang(a, g.lang)
        rules.append(axiom_rule(a, n))
    if not rules:
        return g
    return g.extend(rules, g.name + "+" + ",".join(r.name for r in rules))


def calculus_from_json(d: dict) -> Calculus:
    lang = LanguageTag(d.get("lang", "Full"))
    rules = []
    for r in d["rules"]:
        sch = RuleSchema(
            r["name"],
            tuple(parse_meta_sequent(p) for p in r.get("premises", [])),
            parse_meta_sequent(r["conclusion"]),
        )
        if sch.mask() & lang.forbidden & ~M_ANGLE:
            check_lang(Formula_of_mask(sch.mask()), lang)
        rules.append(sch)
    return Calculus(d.get("name", "user"), lang, tuple(rules))


def Formula_of_mask(mask: int) -> Formula:
    """A witness formula carrying the modal connectives in mask."""
    from .core import M_BOX, M_DIA

    f = Atom("p")
    if mask & M_BOX:
        f = Box(f)
    if mask & M_DIA:
        f = Dia(f)
    return f


# ---------------------------------------------------------------------------
# The builtin catalog

LJ_RULES = (
    rule("id", [], "G ; p => p"),
    rule("Lbot", [], "G ; bot => D"),
    rule("Rtop", [], "G => top"),
    rule("Lw", ["G => D"], "G ; p => D"),
    rule("Rw", ["G =>"], "G => p"),
    rule("Lc", ["G ; p, p => D"], "G ; p => D"),
    rule("cut", ["G => p", "G ; p => D"], "G => D"),
    rule("Land1", ["G ; p => D"], "G ; p & q => D"),
    rule("Land2", ["G ; q => D"], "G ; p & q => D"),
    rule("Rand", ["G => p", "G => q"], "G => p & q"),
    rule("Lor", ["G ; p => D", "G ; q => D"], "G ; p | q => D"),
    rule("Ror1", ["G => p"], "G => p | q"),
    rule("Ror2", ["G => q"], "G => p | q"),
    rule("Limp", ["G => p", "G ; q => D"], "G ; p -> q => D"),
    rule("Rimp", ["G ; p => q"], "G => p -> q"),
)

KBOX = rule("Kbox", ["G => p"], "box G => box p")
KDIA = rule("Kdia", ["G ; p => q"], "box G ; dia p => dia q")
DIAL = rule("DiaL", ["G ; p => q"], "G ; dia p => dia q")

LJ_NAMES = frozenset(r.name for r in LJ_RULES)
P, Q, R = Atom("p"), Atom("q"), Atom("r")


def _bd(n: int) -> Formula:
    f = BOT_F
    for i in range(n):
        pi = Atom(f"p{i}")
        f = Or(pi, Box(Or(Dia(Neg(pi)), f)))
    return f


def table_axiom(name: str) -> Formula:
    """A modal axiom by its conventional name, e.g. `T_a`, `den_2_b`,
    `4_1_3_a`, `ga_1_0_1_1`, `tra_2_a`, `bw_1`, `bd_2`, `dot2`, `dia_or`."""
    p, q = P, Q
    fixed = {
        "K_a": Imp(Box(Imp(p, q)), Imp(Box(p), Box(q))),
        "K_b": Imp(Box(Imp(p, q)), Imp(Dia(p), Dia(q))),
        "dia_bot": Neg(Dia(BOT_F)),
        "dia_or": Imp(Dia(Or(p, q)), Or(Dia(p), Dia(q))),
        "box_imp": Imp(Imp(Dia(p), Box(q)), Box(Imp(p, q))),
        "D": Imp(Box(p), Dia(p)),
        "D_a": Imp(Box(BOT_F), BOT_F),
        "D_b": Imp(TOP_F, Dia(TOP_F)),
        "T_a": Imp(Box(p), p),
        "T_b": Imp(p, Dia(p)),
        "4_a": Imp(Box(p), Box(Box(p))),
        "4_b": Imp(Dia(Dia(p)), Dia(p)),
        "B_a": Imp(Dia(Box(p)), p),
        "B_b": Imp(p, Box(Dia(p))),
        "5_a": Imp(Dia(Box(p)), Box(p)),
        "5_b": Imp(Dia(p), Box(Dia(p))),
        "c_a": Imp(p, Box(p)),
        "c_b": Imp(Dia(p), p),
        "ga": Imp(Dia(Box(p)), Box(Dia(p))),
        "dot2": Imp(Dia(And(p, Box(q))), Box(Or(p, Dia(q)))),
        "d1": Imp(Neg(Dia(p)), Box(Neg(p))),
        "d2": Imp(Box(Neg(p)), Neg(Dia(p))),
        "d3": Imp(Dia(Neg(p)), Neg(Box(p))),
        "H": Imp(p, Box(Imp(Dia(p), p))),
        "dir": Imp(Dia(And(Box(p), q)), Box(Or(Dia(p), q))),
        "M_dia": Imp(Imp(p, q), Imp(Dia(p), Dia(q))),
    }
    if name in fixed:
        return fixed[name]
    parts = name.split("_")
    try:
        if parts[0] == "den" and len(parts) == 3:
            n = int(parts[1])
            if parts[2] == "a":
                return Imp(boxes(p, n + 1), boxes(p, n))
            return Imp(dias(p, n), dias(p, n + 1))
        if parts[0] == "4" and len(parts) == 4:
            n, m = int(parts[1]), int(parts[2])
            if not 0 <= n < m:
                raise ValueError(name)
            if parts[3] == "a":
                return Imp(boxes(p, n), boxes(p, m))
            return Imp(dias(p, m), dias(p, n))
        if parts[0] == "tra" and len(parts) == 3:
            n = int(parts[1])
            if parts[2] == "a":
                return Imp(big_and(boxes(p, i) for i in range(1, n + 1)), boxes(p, n + 1))
            return Imp(dias(p, n + 1), big_or(dias(p, i) for i in range(n + 1)))
        if parts[0] == "ga" and len(parts) == 5:
            k, l, m, n = (int(x) for x in parts[1:])
            return Imp(dias(boxes(p, l), k), boxes(dias(p, n), m))
        if parts[0] == "bw" and len(parts) == 2:
            r = int(parts[1])
            if r < 1:
                raise ValueError(name)
            ps = [Atom(f"p{i}") for i in range(r + 1)]
            body = big_and(Dia(x) for x in ps)
            head = big_or(
                Dia(And(ps[i], Or(ps[j], Dia(ps[j]))))
                for i in range(r + 1)
                for j in range(r + 1)
                if i != j
            )
            return Imp(body, head)
        if parts[0] == "bd" and len(parts) == 2:
            n = int(parts[1])
            pn = Atom(f"p{n}")
            return Imp(Dia(And(Box(pn), _bd(n))), pn)
    except ValueError:
        pass
    raise UnknownCalculus(f"unknown axiom name {name}")


_BASES = {
    "LJ": (LanguageTag.Propositional, ()),
    "CK": (LanguageTag.Full, (KBOX, KDIA)),
    "CK_box": (LanguageTag.BoxOnly, (KBOX,)),
    "BLL": (LanguageTag.DiamondOnly, (DIAL,)),
}

_NAMED = {
    "IK": ("CK", ["dia_or", "box_imp", "dia_bot"]),
    "PLL": ("BLL", ["T_b", "4_b"]),
    "CKT4": ("CK", ["T_a", "T_b", "4_a", "4_b"]),
    "MIPC": ("CK", ["dia_or", "box_imp", "dia_bot", "T_a", "T_b", "4_a", "4_b", "5_a", "5_b"]),
}


def _letter_axioms(letters: str) -> list[str]:
    out = []
    for ch in letters:
        if ch not in "TB45D":
            raise UnknownCalculus(ch)
        out += ["D"] if ch == "D" else [f"{ch}_a", f"{ch}_b"]
    return out


def builtin(name: str) -> Calculus:
    """A catalog calculus: LJ, CK, CK_box, BLL, PLL, IK, CKT4, MIPC, CKX / IKX
    for X over T, B, 4, 5, D, or `BASE+ax1,ax2` with axiom names."""
    if "+" in name:
        base, extra = name.split("+", 1)
        g = builtin(base)
        names = [x.strip() for x in extra.split(",") if x.strip()]
        return add_axioms(g, [table_axiom(n) for n in names], names).with_lang(g.lang, name)
    if name in _BASES:
        lang, extra_rules = _BASES[name]
        return Calculus(name, lang, LJ_RULES + extra_rules)
    if name in _NAMED:
        base, axs = _NAMED[name]
        g = builtin(base)
        return Calculus(name, g.lang, add_axioms(g, [table_axiom(a) for a in axs], axs).rules)
    m = re.fullmatch(r"(CK|IK)([TB45D]+)", name)
    if m:
        g = builtin("CK")
        axs = (_NAMED["IK"][1] if m.group(1) == "IK" else []) + _letter_axioms(m.group(2))
        return Calculus(name, g.lang, add_axioms(g, [table_axiom(a) for a in axs], axs).rules)
    raise UnknownCalculus(f"unknown calculus {name}")


CATALOG = ("LJ", "CK", "CK_box", "BLL", "PLL", "IK", "CKT4", "MIPC", "CKT", "CK4", "CKB", "CK5", "CKD", "IKT4")


def visser_rule(n: int) -> RuleSchema:
    """Visser's rule V_n; V_0 is the disjunction property, whose conclusion
    `=> p` stands for either disjunct."""
    if n < 0:
        raise NegativeIndex(str(n))
    if n == 0:
        return RuleSchema("V0", (MetaSequent((), (), (Or(P, Q),)),), MetaSequent((), (), (P,)))
    ps = [Atom(f"p{i}") for i in range(1, n + 3)]
    qs = [Atom(f"q{i}") for i in range(1, n + 1)]
    hyp = big_and(Imp(ps[i], qs[i]) for i in range(n))
    premise = Or(Imp(hyp, Or(ps[n], ps[n + 1])), R)
    conclusion = big_or([Imp(hyp, ps[j]) for j in range(n + 2)] + [R])
    return RuleSchema(f"V{n}", (MetaSequent((), (), (premise,)),), MetaSequent((), (), (conclusion,)))


# ---------------------------------------------------------------------------
# Proofs


class Proof:
    """A proof node: a hypothesis reference or a rule application.

    Nodes are immutable. Sharing a node object between parents in memory is
    allowed and denotes duplication in the tree."""

    __slots__ = ("conclusion", "rule", "subst", "children", "hyp")

    def __init__(
        self,
        conclusion: Sequent,
        rule: str | None = None,
        subst: Substitution | None = None,
        children: tuple["Proof", ...] = (),
        hyp: int | None = None,
    ):
        self.conclusion = conclusion
        self.rule = rule
        self.subst = subst
        self.children = tuple(children)
        self.hyp = hyp

    @property
    def ant(self) -> FMultiset:
        return self.conclusion.ant

    @property
    def succ(self) -> FMultiset:
        return self.conclusion.succ

    @property
    def goal(self) -> Formula | None:
        return self.conclusion.goal

    def __repr__(self) -> str:
        j = f"hyp {self.hyp}" if self.rule is None else self.rule
        return f"Proof({print_sequent(self.conclusion)!r} by {j})"


def hypothesis(index: int, s: Sequent) -> Proof:
    return Proof(s, None, None, (), index)


def rule_app(r: RuleSchema, s: Substitution, children: Sequence[Proof] = ()) -> Proof:
    """Apply a rule by substitution; the conclusion is computed by instantiation."""
    _, concl = instantiate(r, s)
    return Proof(concl, r.name, s, tuple(children))


def postorder(root: Proof) -> list[Proof]:
    """Distinct nodes, children before parents."""
    out: list[Proof] = []
    seen: set[int] = set()
    stack: list[tuple[Proof, bool]] = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            out.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for c in reversed(node.children):
            if id(c) not in seen:
                stack.append((c, False))
    return out


def tree_count(root: Proof) -> int:
    """Number of nodes of the tree the proof denotes."""
    cnt: dict[int, int] = {}
    for n in postorder(root):
        cnt[id(n)] = 1 + sum(cnt[id(c)] for c in n.children)
    return cnt[id(root)]


def proof_size(root: Proof) -> int:
    """Sum of sequent sizes over the tree."""
    sz: dict[int, int] = {}
    for n in postorder(root):
        sz[id(n)] = n.conclusion.size + sum(sz[id(c)] for c in n.children)
    return sz[id(root)]


def rules_used(root: Proof) -> set[str]:
    return {n.rule for n in postorder(root) if n.rule is not None}


@dataclass(frozen=True)
class Verdict:
    ok: bool
    path: tuple[int, ...] = ()
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "Valid"
        return f"Invalid(path={list(self.path)}, {self.reason})"


VALID = Verdict(True)


def _node_error(g: Calculus, n: Proof, assumptions: Sequence[Sequent]) -> str | None:
    c = n.conclusion
    if len(c.succ) > 1:
        return "multi-conclusion sequent"
    forbid = g.lang.forbidden & ~M_ANGLE
    for f in c.formulas():
        if f.mask & forbid:
            return f"formula {print_formula(f)} outside {g.lang.value}"
    if n.rule is None:
        if n.hyp is None:
            return "node has neither rule nor hypothesis"
        if n.children:
            return "hypothesis with children"
        if not 0 <= n.hyp < len(assumptions):
            return f"hypothesis index {n.hyp} out of range"
        if assumptions[n.hyp] != c:
            return f"hypothesis {n.hyp} mismatch"
        return None
    r = g.by_name.get(n.rule)
    if r is None:
        return f"unknown rule {n.rule}"
    if n.subst is None:
        return "missing substitution"
    for v in r.context_vars():
        if v in n.subst.ctx and r.conclusion.succ == v and len(n.subst.ctx[v]) > 1:
            return f"succedent context {v} has more than one formula"
    try:
        prem, concl = instantiate(r, n.subst)
    except UnboundVariable as e:
        return str(e)
    for s in prem:
        if len(s.succ) > 1:
            return "multi-conclusion premise"
    if len(prem) != len(n.children):
        return f"{n.rule} expects {len(prem)} premises, got {len(n.children)}"
    if concl != c:
        return f"conclusion mismatch: expected {print_sequent(concl)}"
    for i, (s, ch) in enumerate(zip(prem, n.children)):
        if s != ch.conclusion:
            return f"premise {i} mismatch: expected {print_sequent(s)}"
    return None


def check_proof(g: Calculus, proof: Proof, assumptions: Sequence[Sequent] = ()) -> Verdict:
    """Valid iff every node is a matching hypothesis or a correct rule instance."""
    parent: dict[int, tuple[Proof, int]] = {}
    seen: set[int] = set()
    stack: list[tuple[Proof, bool]] = [(proof, False)]
    while stack:
        node, done = stack.pop()
        if done:
            err = _node_error(g, node, assumptions)
            if err is not None:
                path: list[int] = []
                cur = node
                while id(cur) in parent:
                    cur, i = parent[id(cur)]
                    path.append(i)
                return Verdict(False, tuple(reversed(path)), err)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for i, c in enumerate(node.children):
            if id(c) not in seen:
                parent.setdefault(id(c), (node, i))
                stack.append((c, False))
    return VALID


# ---------------------------------------------------------------------------
# JSON I/O


def _subst_json(s: Substitution | None) -> dict:
    if s is None:
        return {}
    return {
        "atoms": {print_formula(k): print_formula(v) for k, v in s.atoms.items()},
        "ctx": {k: [print_formula(f) for f in v] for k, v in s.ctx.items()},
    }


def _subst_from_json(d: dict) -> Substitution:
    atoms = {parse_formula(k): parse_formula(v) for k, v in d.get("atoms", {}).items()}
    ctx = {k: FMultiset(parse_formula(x) for x in v) for k, v in d.get("ctx", {}).items()}
    return Substitution(atoms, ctx)


def proof_to_json(root: Proof) -> list[dict]:
    """Node array in tree form (shared nodes duplicated), root last.
    Each node carries the sha256 of its subtree."""
    nodes: list[dict] = []
    texts: dict[int, tuple] = {}

    def encode(n: Proof) -> tuple:
        t = texts.get(id(n))
        if t is None:
            t = (print_sequent(n.conclusion), _subst_json(n.subst))
            texts[id(n)] = t
        return t

    stack: list[tuple[Proof, bool, list]] = [(root, False, [])]
    results: list[tuple[int, str]] = []
    while stack:
        node, done, kids = stack.pop()
        if not done:
            stack.append((node, True, kids))
            for c in reversed(node.children):
                stack.append((c, False, []))
            continue
        child_refs = [results.pop() for _ in node.children][::-1]
        concl, sj = encode(node)
        entry: dict = {"id": len(nodes)}
        if node.rule is None:
            entry["hyp"] = node.hyp
        else:
            entry["rule"] = node.rule
            entry["subst"] = sj
        entry["children"] = [cid for cid, _ in child_refs]
        entry["conclusion"] = concl
        hsrc = json.dumps(
            [entry.get("rule"), entry.get("hyp"), sj, concl, [h for _, h in child_refs]],
            sort_keys=True,
            ensure_ascii=False,
        )
        entry["hash"] = hashlib.sha256(hsrc.encode()).hexdigest()
        nodes.append(entry)
        results.append((entry["id"], entry["hash"]))
    return nodes


def proof_hash(root: Proof) -> str:
    return proof_to_json(root)[-1]["hash"]


def proof_from_json(nodes: list[dict], expand_shared: bool = False) -> Proof:
    """Rebuild a proof from its node array. Nodes referenced by two parents
    are rejected unless `expand_shared` is set, which duplicates them."""
    built: dict = {}
    uses: dict = {}
    for d in nodes:
        for c in d.get("children", []):
            uses[c] = uses.get(c, 0) + 1
    if not expand_shared:
        shared = [k for k, v in uses.items() if v > 1]
        if shared:
            raise DagProof(f"node {shared[0]} has more than one parent")
    for d in nodes:
        try:
            concl = parse_sequent(d["conclusion"])
            kids = tuple(built[c] for c in d.get("children", []))
        except KeyError as e:
            raise ProofFormatError(f"node {d.get('id')}: unknown child or field {e}") from None
        if "hyp" in d and d["hyp"] is not None:
            p = Proof(concl, None, None, kids, int(d["hyp"]))
        else:
            p = Proof(concl, d["rule"], _subst_from_json(d.get("subst", {})), kids)
        built[d["id"]] = p
    if not nodes:
        raise ProofFormatError("empty proof")
    return built[nodes[-1]["id"]]


def expand_dag(nodes: list[dict]) -> list[dict]:
    """Duplicate shared nodes so every node has one parent (no feasibility bound)."""
    return proof_to_json(proof_from_json(nodes, expand_shared=True))


def dump_proof(root: Proof, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(proof_to_json(root), fh, ensure_ascii=False, indent=1)
        fh.write("\n")


def load_proof(path: str) -> Proof:
    with open(path, encoding="utf-8") as fh:
        return proof_from_json(json.load(fh))


def dump_calculus(g: Calculus, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(g.to_json(), fh, ensure_ascii=False, indent=1)
        fh.write("\n")


def load_calculus(path: str) -> Calculus:
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    if isinstance(d, str):
        return builtin(d)
    if "builtin" in d:
        return builtin(d["builtin"])
    return calculus_from_json(d)

