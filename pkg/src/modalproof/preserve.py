"""Transform a proof of Omega => Lambda in CK plus constructive axioms into a
proof of Sigma, Omega^t => Lambda^t, where Sigma is a multiset of modal Horn
formulas over angled atoms whose standard substitution instance is provable."""

from __future__ import annotations

from dataclasses import dataclass

from . import build as B
from .calculus import (
    DIAL,
    KBOX,
    KDIA,
    LJ_RULES,
    P,
    Q,
    Calculus,
    Proof,
    check_proof,
    postorder,
)
from .classify import is_constructive
from .core import (
    BOT_F,
    EMPTY,
    And,
    Angle,
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
from .translate import ANGLE_TOP, _t, commute_members, prove_t_implies_angle, sigma_of


class NotNormalForm(ModalProofError):
    code = "NotNormalForm"


class ProofInvalid(ModalProofError):
    code = "ProofInvalid"


@dataclass
class PreservationResult:
    sigma_pi: FMultiset
    translated_proof: Proof | None
    discharge_proof: Proof


_BASE = {r.name: r for r in (*LJ_RULES, KBOX, KDIA, DIAL)}
_RIGHT = {"Rand", "Ror1", "Ror2", "Rimp", "Kbox", "Kdia", "DiaL"}


def _rule_kinds(g: Calculus) -> dict[str, Formula | None]:
    """Map each rule name of g to None (base rule) or its axiom formula."""
    out: dict[str, Formula | None] = {}
    for r in g.rules:
        base = _BASE.get(r.name)
        if base is not None and base.premises == r.premises and base.conclusion == r.conclusion:
            out[r.name] = None
            continue
        a = r.axiom_formula()
        if a is None:
            raise NotNormalForm(f"rule {r.name} is neither a base rule nor an axiom")
        if not is_constructive(a):
            raise NotNormalForm(f"axiom {r.name}: {print_formula(a)} is not constructive")
        out[r.name] = a
    return out


class _Preserver:
    def __init__(self, g: Calculus, build: bool = True):
        self.g = g
        self.build = build
        self.kinds = _rule_kinds(g)
        self.tmemo: dict = {}
        self.lemma: dict = {}
        self.memo: dict[int, tuple[list, Proof]] = {}

    def t(self, f: Formula) -> Formula:
        return _t(f, self.tmemo)

    def tms(self, m: FMultiset) -> list[Formula]:
        return [self.t(f) for f in m]

    def L(self, f: Formula) -> Proof:
        p = self.lemma.get(f)
        if p is None:
            p = self.lemma[f] = prove_t_implies_angle(f)
        return p

    def head_member(self, node: Proof) -> tuple[Formula, Proof]:
        """The added implication F = conj <omega> -> <X> with its s-proof."""
        omega = node.ant.items
        ax = Angle(node.goal)
        if not omega:
            return ax, node
        f = Imp(big_and([Angle(w) for w in omega]), ax)
        return f, B.rimp(B.lconj(node, omega), big_and(omega))

    def head(self, node: Proof) -> tuple[tuple[Formula, Proof], Proof]:
        """The member from head_member and a proof of F, Omega^t => <X>."""
        omega = node.ant.items
        ax = Angle(node.goal)
        if not omega:
            return (ax, node), B.idp(EMPTY, ax)
        f, rho = self.head_member(node)
        get = B.rconj([B.weaken_to(self.L(w), FMultiset(self.tms(node.ant))) for w in omega])
        return (f, rho), B.limp(get, B.idp(EMPTY, ax), ax)

    def run(self, root: Proof) -> tuple[list, Proof]:
        for n in postorder(root):
            if id(n) not in self.memo:
                self.memo[id(n)] = self.node(n)
        return self.memo[id(root)]

    def node(self, n: Proof) -> tuple[list, Proof]:
        if n.rule is None:
            raise ProofInvalid("hypothesis leaves are not supported")
        kind = self.kinds.get(n.rule, None)
        if n.rule not in self.kinds:
            raise NotNormalForm(f"unknown rule {n.rule}")
        if not self.build:
            return self.members_only(n, kind), None
        if kind is not None:
            return self.axiom(n, kind)
        kids = [self.memo[id(c)] for c in n.children]
        r = n.rule
        s = n.subst.atoms if n.subst is not None else {}
        p = s.get(P)
        q = s.get(Q)
        if r in ("id", "Lbot", "Rtop"):
            members = [(ANGLE_TOP, B.rtop(EMPTY))]
            ctx = FMultiset(self.tms(n.ant))
            if r == "id":
                pi = B.idp(ctx.remove(self.t(p)), self.t(p))
            elif r == "Lbot":
                pi = B.lbot(ctx.remove(BOT_F), self.t(n.goal) if n.goal is not None else None)
            else:
                pi = B.idp(ctx, ANGLE_TOP)
            return self.finish(n, members, pi)
        if r in ("Lw", "Rw", "Lc"):
            (m1, c1), = kids
            if r == "Lw":
                pi = B.lw(c1, self.t(p))
            elif r == "Rw":
                pi = B.rw(c1, self.t(p))
            else:
                pi = B.lc(c1, self.t(p))
            return self.finish(n, m1, pi)
        if r == "cut":
            (m1, c1), (m2, c2) = kids
            return self.finish(n, m1 + m2, B.cut(c1, c2))
        if r in ("Land1", "Land2"):
            (m1, c1), = kids
            pt, qt = self.t(p), self.t(q)
            pi = (B.land1 if r == "Land1" else B.land2)(c1, pt, qt)
            pi = B.land1(pi, And(pt, qt), Angle(And(p, q)))
            return self.finish(n, m1, pi)
        if r == "Lor":
            (m1, c1), (m2, c2) = kids
            pt, qt = self.t(p), self.t(q)
            pi = B.lor(c1, c2, pt, qt)
            pi = B.land1(pi, Or(pt, qt), Angle(Or(p, q)))
            return self.finish(n, m1 + m2, pi)
        if r == "Limp":
            (m1, c1), (m2, c2) = kids
            pt, qt = self.t(p), self.t(q)
            pi = B.limp(c1, c2, qt)
            pi = B.land1(pi, Imp(pt, qt), Angle(Imp(p, q)))
            return self.finish(n, m1 + m2, pi)
        if r in _RIGHT:
            return self.right(n, r, kids, p, q)
        raise NotNormalForm(f"unsupported rule {r}")  # pragma: no cover

    def members_only(self, n: Proof, kind: Formula | None) -> list:
        """The same side multiset as node() without the translated proof."""
        if kind is not None:
            amap = dict(n.subst.atoms) if n.subst is not None else {}
            return commute_members("Constructive", kind, amap).members + [(Angle(n.goal), n)]
        r = n.rule
        if r in ("id", "Lbot", "Rtop"):
            return [(ANGLE_TOP, B.rtop(EMPTY))]
        kids = [self.memo[id(c)][0] for c in n.children]
        if r in _RIGHT:
            if r in ("Kbox", "Kdia"):
                members = [(Box(f), B.kbox(rho)) for f, rho in kids[0]]
            else:
                members = [m for k in kids for m in k]
            return members + [self.head_member(n)]
        return [m for k in kids for m in k]

    def right(self, n: Proof, r: str, kids, p, q) -> tuple[list, Proof]:
        member, hd = self.head(n)
        if r == "Rand":
            (m1, c1), (m2, c2) = kids
            members = m1 + m2
            main = B.rand(c1, c2)
        elif r in ("Ror1", "Ror2"):
            (m1, c1), = kids
            members = m1
            main = B.ror1(c1, self.t(q)) if r == "Ror1" else B.ror2(c1, self.t(p))
        elif r == "Rimp":
            (m1, c1), = kids
            members = m1
            main = B.rimp(c1, self.t(p))
        elif r == "Kbox":
            (m1, c1), = kids
            members = [(Box(f), B.kbox(rho)) for f, rho in m1]
            main = B.kbox(c1)
            for gam in n.subst.ctx["G"]:
                main = B.land1(main, Box(self.t(gam)), Angle(Box(gam)))
        elif r == "Kdia":
            (m1, c1), = kids
            members = [(Box(f), B.kbox(rho)) for f, rho in m1]
            main = B.kdia(c1, self.t(p))
            for gam in n.subst.ctx["G"]:
                main = B.land1(main, Box(self.t(gam)), Angle(Box(gam)))
            main = B.land1(main, Dia(self.t(p)), Angle(Dia(p)))
        else:  # DiaL
            (m1, c1), = kids
            members = m1
            main = B.dial(c1, self.t(p))
            main = B.land1(main, Dia(self.t(p)), Angle(Dia(p)))
        members = members + [member]
        return self.finish(n, members, B.rand(main, hd))

    def axiom(self, n: Proof, c: Formula) -> tuple[list, Proof]:
        amap = dict(n.subst.atoms) if n.subst is not None else {}
        res = commute_members("Constructive", c, amap)
        x = n.goal
        inst = B.axiom(n.rule, c, {k: self.t(v) for k, v in amap.items()})
        members = res.members + [(Angle(x), n)]
        pi = B.cut(inst, res.bwd)
        return self.finish(n, members, pi)

    def finish(self, n: Proof, members: list, pi: Proof) -> tuple[list, Proof]:
        ant = FMultiset([f for f, _ in members] + self.tms(n.ant))
        goal = self.t(n.goal) if n.goal is not None else None
        return members, B.weaken_to(pi, ant, goal)


def preserve(g: Calculus, proof: Proof, check: bool = True, translated: bool = True) -> PreservationResult:
    """Sigma_pi, a g-proof of Sigma_pi, Omega^t => Lambda^t, and a g-proof of
    => conj(Sigma_pi^s).

    With translated=False the middle proof is not built (it is None)."""
    if check:
        v = check_proof(g, proof)
        if not v.ok:
            raise ProofInvalid(str(v))
    pres = _Preserver(g, translated)
    members, pi = pres.run(proof)
    sigma, discharge = sigma_of(members)
    return PreservationResult(sigma, pi, discharge)
