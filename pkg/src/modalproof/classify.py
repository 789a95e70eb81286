"""Formula classes, rule classification, the rule/axiom correspondence and
normalization of constructive calculi to a base calculus plus axioms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import build as B
from .calculus import (
    KBOX,
    KDIA,
    LJ_RULES,
    Calculus,
    MetaSequent,
    Proof,
    RuleSchema,
    axiom_rule,
    builtin,
    hypothesis,
    instantiate,
    postorder,
)
from .core import (
    AND,
    ANGLE,
    ATOM,
    BOT,
    BOX,
    DIA,
    IMP,
    OR,
    TOP,
    And,
    FMultiset,
    Formula,
    Imp,
    LanguageTag,
    ModalProofError,
    Sequent,
    Substitution,
    apply_subst,
    big_and,
    big_or,
    print_formula,
)


class NotInRuleClass(ModalProofError):
    code = "NotInRuleClass"


class MultiConclusion(ModalProofError):
    code = "MultiConclusion"


class Mismatch(ModalProofError):
    code = "Mismatch"


class NotConstructiveCalculus(ModalProofError):
    code = "NotConstructiveCalculus"


# ---------------------------------------------------------------------------
# Formula classes

_BASIC: dict = {}
_AP: dict = {}
_CONS: dict = {}
_HARROP: dict = {}
_MHORN: dict = {}


def is_basic(f: Formula) -> bool:
    """Atoms and constants closed under and, or, dia."""
    r = _BASIC.get(f)
    if r is None:
        k = f.kind
        if k in (ATOM, ANGLE, TOP, BOT):
            r = True
        elif k in (AND, OR):
            r = is_basic(f.left) and is_basic(f.right)
        elif k == DIA:
            r = is_basic(f.left)
        else:
            r = False
        _BASIC[f] = r
    return r


def is_almost_positive(f: Formula) -> bool:
    r = _AP.get(f)
    if r is None:
        k = f.kind
        if is_basic(f):
            r = True
        elif k in (AND, OR):
            r = is_almost_positive(f.left) and is_almost_positive(f.right)
        elif k in (BOX, DIA):
            r = is_almost_positive(f.left)
        elif k == IMP:
            r = is_basic(f.left) and is_almost_positive(f.right)
        else:
            r = False
        _AP[f] = r
    return r


def is_constructive(f: Formula) -> bool:
    r = _CONS.get(f)
    if r is None:
        k = f.kind
        if is_basic(f):
            r = True
        elif k == AND:
            r = is_constructive(f.left) and is_constructive(f.right)
        elif k == BOX:
            r = is_constructive(f.left)
        elif k == IMP:
            r = is_almost_positive(f.left) and is_constructive(f.right)
        else:
            r = False
        _CONS[f] = r
    return r


def is_harrop(f: Formula) -> bool:
    r = _HARROP.get(f)
    if r is None:
        k = f.kind
        if k in (ATOM, ANGLE, TOP, BOT):
            r = True
        elif k == AND:
            r = is_harrop(f.left) and is_harrop(f.right)
        elif k == BOX:
            r = is_harrop(f.left)
        elif k == IMP:
            r = is_harrop(f.right)
        else:
            r = False
        _HARROP[f] = r
    return r


def _dia_atom(f: Formula) -> bool:
    while f.kind == DIA:
        f = f.left
    return f.kind in (ATOM, ANGLE)


def is_horn_body(f: Formula, modal: bool) -> bool:
    """A conjunction tree of (dia^n of) atoms."""
    stack = [f]
    while stack:
        g = stack.pop()
        if g.kind == AND:
            stack.append(g.left)
            stack.append(g.right)
        elif not (_dia_atom(g) if modal else g.kind in (ATOM, ANGLE)):
            return False
    return True


def horn_body_atoms(f: Formula) -> list[Formula]:
    """Leaves of a conjunction tree, left to right."""
    out: list[Formula] = []
    stack = [f]
    while stack:
        g = stack.pop()
        if g.kind == AND:
            stack.append(g.right)
            stack.append(g.left)
        else:
            out.append(g)
    return out


def is_modal_horn(f: Formula) -> bool:
    r = _MHORN.get(f)
    if r is None:
        k = f.kind
        if k in (ATOM, ANGLE, BOT):
            r = True
        elif k == BOX:
            r = is_modal_horn(f.left)
        elif k == IMP:
            r = is_horn_body(f.left, True) and is_modal_horn(f.right)
        else:
            r = False
        _MHORN[f] = r
    return r


def is_implicational_horn(f: Formula) -> bool:
    k = f.kind
    if k in (ATOM, ANGLE, BOT):
        return True
    if k == IMP:
        return f.right.kind in (ATOM, ANGLE, BOT) and is_horn_body(f.left, False)
    return False


def _children(f: Formula) -> list[Formula]:
    if f.kind in (AND, OR, IMP):
        return [f.left, f.right]
    if f.kind in (BOX, DIA):
        return [f.left]
    return []


def _reqs(cls: str, f: Formula) -> list | None:
    """(child index, child, class name) requirements of the closure clause
    for f's main connective; None if the connective is excluded."""
    k = f.kind
    if cls == "basic":
        if k in (AND, OR):
            return [(0, f.left, "basic"), (1, f.right, "basic")]
        if k == DIA:
            return [(0, f.left, "basic")]
        return None
    if cls == "almostPositive":
        if k in (AND, OR):
            return [(0, f.left, cls), (1, f.right, cls)]
        if k in (BOX, DIA):
            return [(0, f.left, cls)]
        if k == IMP:
            return [(0, f.left, "basic"), (1, f.right, cls)]
        return None
    if cls == "constructive":
        if k == AND:
            return [(0, f.left, cls), (1, f.right, cls)]
        if k == BOX:
            return [(0, f.left, cls)]
        if k == IMP:
            return [(0, f.left, "almostPositive"), (1, f.right, cls)]
        return None
    if cls == "harrop":
        if k == AND:
            return [(0, f.left, cls), (1, f.right, cls)]
        if k == BOX:
            return [(0, f.left, cls)]
        if k == IMP:
            return [(1, f.right, cls)]
        return None
    if cls == "modalHorn":
        if k == BOX:
            return [(0, f.left, cls)]
        if k == IMP:
            return [(0, f.left, "modalBody"), (1, f.right, cls)]
        return None
    if cls == "implicationalHorn":
        if k == IMP:
            return [(0, f.left, "body"), (1, f.right, "head")]
        return None
    return None


_PRED = {
    "basic": is_basic,
    "almostPositive": is_almost_positive,
    "constructive": is_constructive,
    "harrop": is_harrop,
    "modalHorn": is_modal_horn,
    "implicationalHorn": is_implicational_horn,
}

_LEAF_PRED = {
    "modalBody": lambda g: is_horn_body(g, True),
    "body": lambda g: is_horn_body(g, False),
    "head": lambda g: g.kind in (ATOM, ANGLE, BOT),
}


def witness_path(f: Formula, cls: str) -> tuple[int, ...] | None:
    """Child-index path to the innermost subformula where class `cls` breaks."""
    if _PRED[cls](f):
        return None
    path: list[int] = []
    cur, cur_cls = f, cls
    while True:
        reqs = _reqs(cur_cls, cur)
        if reqs is None:
            return tuple(path)
        for idx, g, c in reqs:
            ok = _LEAF_PRED[c](g) if c in _LEAF_PRED else _PRED[c](g)
            if not ok:
                path.append(idx)
                if c in _LEAF_PRED:
                    return tuple(path)
                cur, cur_cls = g, c
                break
        else:
            return tuple(path)


@dataclass(frozen=True)
class FormulaClassVerdict:
    basic: bool
    almostPositive: bool
    constructive: bool
    harrop: bool
    modalHorn: bool
    implicationalHorn: bool
    witness: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {
            "basic": self.basic,
            "almostPositive": self.almostPositive,
            "constructive": self.constructive,
            "harrop": self.harrop,
            "modalHorn": self.modalHorn,
            "implicationalHorn": self.implicationalHorn,
            "witness": {k: list(v) for k, v in self.witness.items()},
        }


def classify_formula(f: Formula) -> FormulaClassVerdict:
    vals = {name: pred(f) for name, pred in _PRED.items()}
    wit = {name: witness_path(f, name) for name, v in vals.items() if not v}
    return FormulaClassVerdict(witness=wit, **vals)


def subformula_at(f: Formula, path: Sequence[int]) -> Formula:
    for i in path:
        f = _children(f)[i]
    return f


# ---------------------------------------------------------------------------
# Rule shapes


@dataclass(frozen=True)
class RuleShape:
    """A rule read in the general left/right form with one shared context."""

    side: str  # "left" or "right"
    ctx: str | None
    delta: str | None
    i_prem: tuple[tuple[tuple[Formula, ...], tuple[Formula, ...]], ...]
    j_prem: tuple[tuple[Formula, ...], ...]
    ant: tuple[Formula, ...]  # eta for left rules, theta for right rules
    succ: tuple[Formula, ...]  # eta for right rules; empty for left rules
    order: tuple[tuple[str, int], ...]  # premise order as ("I"|"J", index)


def _check_single(r: RuleSchema) -> None:
    for m in (*r.premises, r.conclusion):
        if isinstance(m.succ, tuple) and len(m.succ) > 1:
            raise MultiConclusion(r.name)


def rule_shape(r: RuleSchema) -> RuleShape:
    """Read r in the general form; NotInRuleClass otherwise."""
    _check_single(r)
    metas = (*r.premises, r.conclusion)
    ctx: str | None = None
    for m in metas:
        if any(boxed for _, boxed in m.slots):
            raise NotInRuleClass(f"{r.name}: boxed context")
        if len(m.slots) > 1:
            raise NotInRuleClass(f"{r.name}: more than one context slot")
    slot_vars = {m.slots[0][0] if m.slots else None for m in metas}
    if len(slot_vars) != 1:
        raise NotInRuleClass(f"{r.name}: context differs between meta-sequents")
    ctx = slot_vars.pop()
    if ctx is None and r.premises:
        raise NotInRuleClass(f"{r.name}: no context variable")
    c = r.conclusion
    if isinstance(c.succ, str):
        delta = c.succ
        if delta == ctx:
            raise NotInRuleClass(f"{r.name}: context reused as succedent")
        i_prem, j_prem, order = [], [], []
        for m in r.premises:
            if isinstance(m.succ, str):
                if m.succ != delta:
                    raise NotInRuleClass(f"{r.name}: unknown succedent variable")
                order.append(("J", len(j_prem)))
                j_prem.append(m.formulas)
            else:
                order.append(("I", len(i_prem)))
                i_prem.append((m.formulas, m.succ))
        return RuleShape("left", ctx, delta, tuple(i_prem), tuple(j_prem), c.formulas, (), tuple(order))
    i_prem, order = [], []
    for m in r.premises:
        if isinstance(m.succ, str):
            raise NotInRuleClass(f"{r.name}: succedent variable absent from the conclusion")
        order.append(("I", len(i_prem)))
        i_prem.append((m.formulas, m.succ))
    return RuleShape("right", ctx, None, tuple(i_prem), (), c.formulas, c.succ, tuple(order))


@dataclass(frozen=True)
class RuleClassVerdict:
    kind: str  # LeftConstructive | RightConstructive | ConstructiveAxiom | ModalK | NotConstructive
    reason: str = ""

    @property
    def constructive(self) -> bool:
        return self.kind in ("LeftConstructive", "RightConstructive", "ConstructiveAxiom")

    def __str__(self) -> str:
        return self.kind if not self.reason else f"{self.kind}({self.reason})"


def _same_schema(a: RuleSchema, b: RuleSchema) -> bool:
    return a.premises == b.premises and a.conclusion == b.conclusion


def _rename_ctx(r: RuleSchema) -> RuleSchema:
    """Rename context variables to G, D in order of appearance."""
    names: dict[str, str] = {}
    for v in r.context_vars():
        names.setdefault(v, "G" if not names else ("D" if len(names) == 1 else f"X{len(names)}"))

    def ren(m: MetaSequent) -> MetaSequent:
        succ = names[m.succ] if isinstance(m.succ, str) else m.succ
        return MetaSequent(tuple((names[v], b) for v, b in m.slots), m.formulas, succ)

    return RuleSchema(r.name, tuple(ren(m) for m in r.premises), ren(r.conclusion))


def is_modal_k(r: RuleSchema) -> str | None:
    rr = _rename_ctx(r)
    for k in (KBOX, KDIA):
        if _same_schema(rr, k):
            return k.name
    return None


def classify_rule(r: RuleSchema) -> RuleClassVerdict:
    """Match r against the left/right constructive templates, or K literally."""
    _check_single(r)
    if is_modal_k(r):
        return RuleClassVerdict("ModalK")
    try:
        sh = rule_shape(r)
    except NotInRuleClass as e:
        return RuleClassVerdict("NotConstructive", f"not in the general rule form: {e}")
    return _classify_shape(sh, bool(r.premises))


def _first(fs, pred) -> Formula | None:
    for f in fs:
        if not pred(f):
            return f
    return None


def _classify_shape(sh: RuleShape, has_premises: bool) -> RuleClassVerdict:
    for phis, psis in sh.i_prem:
        bad = _first(phis, is_basic)
        if bad is not None:
            return RuleClassVerdict("NotConstructive", f"premise antecedent {print_formula(bad)} is not basic")
        bad = _first(psis, is_almost_positive)
        if bad is not None:
            return RuleClassVerdict("NotConstructive", f"premise succedent {print_formula(bad)} is not almost positive")
    bad = _first(sh.ant, is_almost_positive)
    if bad is not None:
        return RuleClassVerdict("NotConstructive", f"conclusion antecedent {print_formula(bad)} is not almost positive")
    if sh.side == "left":
        pred = is_basic if len(sh.j_prem) > 1 else is_constructive
        what = "basic" if len(sh.j_prem) > 1 else "constructive"
        for thetas in sh.j_prem:
            bad = _first(thetas, pred)
            if bad is not None:
                return RuleClassVerdict("NotConstructive", f"premise antecedent {print_formula(bad)} is not {what}")
        kind = "LeftConstructive"
    else:
        bad = _first(sh.succ, is_constructive)
        if bad is not None:
            return RuleClassVerdict("NotConstructive", f"conclusion succedent {print_formula(bad)} is not constructive")
        kind = "RightConstructive"
    return RuleClassVerdict("ConstructiveAxiom" if not has_premises else kind)


# ---------------------------------------------------------------------------
# The rule/axiom correspondence


def ax_of_shape(sh: RuleShape) -> Formula:
    imps = [Imp(big_and(phis), big_or(psis)) for phis, psis in sh.i_prem]
    left = And(big_and(imps), big_and(sh.ant))
    if sh.side == "left":
        return Imp(left, big_or(big_and(t) for t in sh.j_prem))
    return Imp(left, big_or(sh.succ))


def lj_plus(rules: Sequence[RuleSchema], lang: LanguageTag = LanguageTag.Full) -> Calculus:
    base = Calculus("LJ", lang, LJ_RULES)
    return base.extend(rules, "LJ+" + ",".join(r.name for r in rules))


def _i_premise_proof(ctx: FMultiset, phis, psis) -> Proof:
    """ctx, F, phis => psis in LJ, where F = conj(phis) -> disj(psis)."""
    left = B.conj_intro_ids(ctx, list(phis))
    psi = big_or(psis)
    full = ctx.add(*phis) if phis else ctx
    right = B.idp(full, psi) if psis else B.lbot(full, None)
    return B.limp(left, right, psi)


def rule_to_axiom(r: RuleSchema) -> tuple[Formula, Proof]:
    """Ax_R and a proof of (=> Ax_R) in LJ + r."""
    sh = rule_shape(r)
    ax = ax_of_shape(sh)
    imps = [Imp(big_and(phis), big_or(psis)) for phis, psis in sh.i_prem]
    gamma = FMultiset(imps)
    if sh.side == "left":
        target = big_or(big_and(t) for t in sh.j_prem)
    else:
        target = big_or(sh.succ)
    kids: list[Proof] = []
    for kind, idx in sh.order:
        if kind == "I":
            phis, psis = sh.i_prem[idx]
            f_i = imps[idx]
            kids.append(_i_premise_proof(gamma.remove(f_i), phis, psis))
        else:
            thetas = sh.j_prem[idx]
            pi = B.conj_intro_ids(gamma, list(thetas))
            pi = B.inj(pi, [big_and(t) for t in sh.j_prem], idx)
            kids.append(pi)
    ctx: dict = {}
    if sh.ctx is not None:
        ctx[sh.ctx] = gamma
    if sh.delta is not None:
        ctx[sh.delta] = FMultiset((target,))
    s = Substitution({a: a for a in r.placeholders()}, ctx)
    _, concl = instantiate(r, s)
    pi = Proof(concl, r.name, s, tuple(kids))
    if sh.side == "right" and not sh.succ:
        pi = B.rw(pi, target)
    pi = B.lconj(pi, list(sh.ant))
    pi = B.lconj(pi, imps)
    pi = B.pack(pi, big_and(imps), big_and(sh.ant))
    pi = B.rimp(pi, And(big_and(imps), big_and(sh.ant)))
    assert pi.goal is ax
    return ax, pi


def axiom_name(ax: Formula) -> str:
    return f"ax[{print_formula(ax)}]"


def axiom_to_rule_proof(ax: Formula, r: RuleSchema, instance, ax_name: str | None = None) -> Proof:
    """Deduction of the instance conclusion from its premises in LJ + (=> ax).

    `instance` is the Substitution that produced the instance, or a tuple
    (premises, conclusion, substitution)."""
    s = instance if isinstance(instance, Substitution) else instance[2]
    sh = rule_shape(r)
    if ax_of_shape(sh) is not ax:
        raise Mismatch(f"{print_formula(ax)} is not the axiom of {r.name}")
    prem, concl = instantiate(r, s)
    memo: dict = {}

    def inst(f: Formula) -> Formula:
        return apply_subst(f, s.atoms, memo)

    gamma = s.ctx.get(sh.ctx, FMultiset()) if sh.ctx is not None else FMultiset()
    i_inst = [([inst(f) for f in phis], [inst(f) for f in psis]) for phis, psis in sh.i_prem]
    j_inst = [[inst(f) for f in t] for t in sh.j_prem]
    ant = [inst(f) for f in sh.ant]
    imps = [Imp(big_and(ph), big_or(ps)) for ph, ps in i_inst]
    x = And(big_and(imps), big_and(ant))
    th = big_or(big_and(t) for t in j_inst) if sh.side == "left" else big_or(inst(f) for f in sh.succ)
    amap = {a: s.atoms[a] for a in r.placeholders()}
    ax_pi = B.axiom(ax_name or axiom_name(ax), ax, amap)
    assert ax_pi.goal is Imp(x, th)
    # X => Th
    x_th = B.cut(ax_pi, B.limp(B.idp(FMultiset(), x), B.idp(FMultiset(), th), th))
    # hypotheses by premise order
    hyps = {}
    for pos, (kind, idx) in enumerate(sh.order):
        hyps[(kind, idx)] = hypothesis(pos, prem[pos])
    pieces = []
    for idx, (ph, ps) in enumerate(i_inst):
        pi = B.lconj(hyps[("I", idx)], ph)
        if not ps:
            pi = B.rw(pi, big_or(ps))
        pieces.append(B.rimp(pi, big_and(ph)))
    g_imps = B.rconj(pieces, gamma)
    g_eta = B.rand(B.weaken(g_imps, ant), B.conj_intro_ids(gamma, ant))
    one = B.cut(g_eta, x_th)
    if sh.side == "left":
        delta = s.ctx[sh.delta]
        goal = delta.items[0] if delta.items else None
        branches = [B.lconj(hyps[("J", idx)], t) for idx, t in enumerate(j_inst)]
        two = B.ldisj(branches, [big_and(t) for t in j_inst], gamma, goal)
        out = B.cut(one, two)
    else:
        if sh.succ:
            out = one
        else:
            out = B.cut(one, B.lbot(one.ant, None))
    return B.weaken_to(out, concl.ant) if out.ant != concl.ant else out


# ---------------------------------------------------------------------------
# Grafting and node-wise maps


def graft(pi: Proof, plugs: Sequence[Proof]) -> Proof:
    """Replace hypothesis leaves with index i by plugs[i]."""
    memo: dict[int, Proof] = {}
    for n in postorder(pi):
        if n.rule is None:
            memo[id(n)] = plugs[n.hyp]
        else:
            kids = tuple(memo[id(c)] for c in n.children)
            memo[id(n)] = n if all(a is b for a, b in zip(kids, n.children)) else Proof(n.conclusion, n.rule, n.subst, kids)
    return memo[id(pi)]


def map_proof(pi: Proof, fmap: Callable[[Formula], Formula]) -> Proof:
    """Apply a formula map node-wise (to conclusions and substitution values).

    Correct for maps that commute with every connective, such as atom
    substitutions."""
    fm: dict = {}

    def f(x: Formula) -> Formula:
        r = fm.get(x)
        if r is None:
            r = fmap(x)
            fm[x] = r
        return r

    msm: dict = {}

    def ms(m: FMultiset) -> FMultiset:
        r = msm.get(m)
        if r is None:
            r = FMultiset(f(x) for x in m)
            msm[m] = r
        return r

    memo: dict[int, Proof] = {}
    for n in postorder(pi):
        c = Sequent(ms(n.conclusion.ant), ms(n.conclusion.succ))
        s = None
        if n.subst is not None:
            s = Substitution({k: f(v) for k, v in n.subst.atoms.items()}, {k: ms(v) for k, v in n.subst.ctx.items()})
        memo[id(n)] = Proof(c, n.rule, s, tuple(memo[id(k)] for k in n.children), n.hyp)
    return memo[id(pi)]


def subst_proof(pi: Proof, atom_map: dict) -> Proof:
    memo: dict = {}
    return map_proof(pi, lambda x: apply_subst(x, atom_map, memo))


# ---------------------------------------------------------------------------
# Normalization


_BASE_FOR = {
    LanguageTag.Full: "CK",
    LanguageTag.BoxOnly: "CK_box",
    LanguageTag.DiamondOnly: "BLL",
    LanguageTag.Propositional: "LJ",
}


@dataclass
class NormalForm:
    """A calculus rewritten as base + axioms, with translators both ways."""

    cset: list[Formula]
    calculus: Calculus
    simulate: Callable[[Proof], Proof]
    unsimulate: Callable[[Proof], Proof]
    ax_names: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.cset, self.simulate, self.unsimulate))


def base_rule_names(lang: LanguageTag) -> set[str]:
    return {r.name for r in builtin(_BASE_FOR[lang]).rules}


def normalize_to_ck_plus_c(g: Calculus) -> NormalForm:
    """cset = {Ax_R : R a constructive non-base rule of g} (bare axioms kept
    as they are) with simulations between g and base + cset."""
    lang = g.lang if g.lang in _BASE_FOR else LanguageTag.Full
    base = builtin(_BASE_FOR[lang])
    for r in base.rules:
        if r.name not in g.by_name or not _same_schema(g.by_name[r.name], r):
            raise NotConstructiveCalculus(f"base rule {r.name} of {base.name} missing (strength not witnessed)")
    extra = [r for r in g.rules if r.name not in base.by_name]
    cset: list[Formula] = []
    names: list[str] = []
    templates: dict[str, tuple[Formula, str]] = {}
    back: dict[str, tuple[RuleSchema, Proof, Formula]] = {}
    for r in extra:
        if is_modal_k(r):
            if lang == LanguageTag.Full or (lang == LanguageTag.BoxOnly and is_modal_k(r) == "Kbox"):
                raise NotConstructiveCalculus(f"{r.name} duplicates a base modal rule")
            raise NotConstructiveCalculus(f"{r.name}: modal rule not allowed over {lang.value}")
        v = classify_rule(r)
        if not v.constructive:
            raise NotConstructiveCalculus(f"{r.name}: {v}")
        a = r.axiom_formula()
        if a is not None:
            cset.append(a)
            names.append(r.name)
            continue
        ax, pox = rule_to_axiom(r)
        name = axiom_name(ax)
        if name in base.by_name or name in names:
            name = f"{name}#{r.name}"
        cset.append(ax)
        names.append(name)
        templates[r.name] = (ax, name)
        back[name] = (r, pox, ax)
    target_rules = list(base.rules) + [axiom_rule(a, n) for a, n in zip(cset, names)]
    target = Calculus(base.name + ("+" + ",".join(names) if names else ""), g.lang, tuple(target_rules))

    def simulate(pi: Proof) -> Proof:
        memo: dict[int, Proof] = {}
        for n in postorder(pi):
            kids = tuple(memo[id(c)] for c in n.children)
            if n.rule in templates:
                ax, name = templates[n.rule]
                r = g.by_name[n.rule]
                ded = axiom_to_rule_proof(ax, r, n.subst, name)
                memo[id(n)] = graft(ded, kids)
            else:
                memo[id(n)] = Proof(n.conclusion, n.rule, n.subst, kids, n.hyp)
        return memo[id(pi)]

    def unsimulate(pi: Proof) -> Proof:
        memo: dict[int, Proof] = {}
        for n in postorder(pi):
            kids = tuple(memo[id(c)] for c in n.children)
            if n.rule in back:
                r, pox, ax = back[n.rule]
                memo[id(n)] = subst_proof(pox, dict(n.subst.atoms))
            else:
                memo[id(n)] = Proof(n.conclusion, n.rule, n.subst, kids, n.hyp)
        return memo[id(pi)]

    nf = NormalForm(cset, target, simulate, unsimulate, dict(zip(names, cset)))
    return nf
