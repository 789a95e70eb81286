"""The angled-atom translation t, the standard substitution s, commutation of
t with basic / almost positive / constructive patterns, and the Horn
decomposition of Harrop formulas. Every emitted proof is a CK proof."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import build as B
from .calculus import Proof
from .classify import is_almost_positive, is_basic, is_constructive, is_harrop
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
    M_ANGLE,
    OR,
    TOP,
    TOP_F,
    And,
    Angle,
    AngledAtomPresent,
    Box,
    Dia,
    FMultiset,
    Formula,
    Imp,
    ModalProofError,
    Or,
    apply_subst,
    atoms_of,
    big_and,
    map_atoms,
    print_formula,
)


class WrongClass(ModalProofError):
    code = "WrongClass"

    def __init__(self, theta: str, a: Formula):
        super().__init__(f"{print_formula(a)} is not in class {theta}")
        self.theta = theta
        self.formula = a


class NotHarrop(ModalProofError):
    code = "NotHarrop"


ANGLE_TOP = Angle(TOP_F)


# ---------------------------------------------------------------------------
# t and s


def _no_angles(a: Formula) -> None:
    if a.mask & M_ANGLE:
        raise AngledAtomPresent(print_formula(a))


def trans_t(a: Formula, memo: dict | None = None) -> Formula:
    """The translation t into the language with angled atoms."""
    _no_angles(a)
    return _t(a, {} if memo is None else memo)


def _t(a: Formula, memo: dict) -> Formula:
    r = memo.get(a)
    if r is not None:
        return r
    k = a.kind
    if k == BOT:
        r = BOT_F
    elif k in (TOP, ATOM):
        r = Angle(a)
    elif k in (AND, OR, IMP):
        ctor = {AND: And, OR: Or, IMP: Imp}[k]
        r = And(ctor(_t(a.left, memo), _t(a.right, memo)), Angle(a))
    elif k == BOX:
        r = And(Box(_t(a.left, memo)), Angle(a))
    elif k == DIA:
        r = And(Dia(_t(a.left, memo)), Angle(a))
    else:  # pragma: no cover
        raise AngledAtomPresent(print_formula(a))
    memo[a] = r
    return r


def _unangle(a: Formula) -> Formula:
    return a.left if a.kind == ANGLE else a


def subst_s(a: Formula, memo: dict | None = None) -> Formula:
    """The standard substitution: each angled atom becomes its payload."""
    if not a.mask & M_ANGLE:
        return a
    return map_atoms(a, _unangle, memo)


def subst_s_multiset(m: FMultiset) -> FMultiset:
    memo: dict = {}
    return FMultiset(subst_s(f, memo) for f in m)


def prove_t_implies_angle(a: Formula) -> Proof:
    """A CK proof of a^t => <a>."""
    at = trans_t(a)
    if a.kind == BOT:
        return B.lbot(EMPTY, Angle(a))
    if at.kind == ANGLE:
        return B.idp(EMPTY, at)
    return B.land2(B.idp(EMPTY, at.right), at.left, at.right)


def prove_st_equivalence(a: Formula) -> tuple[Proof, Proof]:
    """CK proofs of s(a^t) => a and a => s(a^t)."""
    memo: dict = {}

    def st(x: Formula) -> Formula:
        return subst_s(trans_t(x, memo))

    def rec(x: Formula) -> tuple[Proof, Proof]:
        k = x.kind
        if k in (ATOM, TOP, BOT):
            i = B.idp(EMPTY, x)
            return i, i
        y = st(x)
        down = B.land2(B.idp(EMPTY, x), y.left, x)
        if k in (BOX, DIA):
            d, u = rec(x.body)
            inner = B.kbox(u) if k == BOX else B.kdia(u, x.body)
        else:
            (dl, ul), (_, ur) = rec(x.left), rec(x.right)
            sl, sr = ul.goal, ur.goal
            if k == AND:
                inner = B.rand(B.land1(ul, x.left, x.right), B.land2(ur, x.left, x.right))
            elif k == OR:
                inner = B.lor(B.ror1(ul, sr), B.ror2(ur, sl), x.left, x.right)
            else:  # x.left -> x.right becomes sl -> sr
                body = B.limp(B.weaken_to(dl, FMultiset.of(sl), x.left), B.weaken_to(ur, FMultiset.of(sl, x.right), sr), x.right)
                inner = B.rimp(body, sl)
        up = B.rand(inner, B.idp(EMPTY, x))
        return down, up

    return rec(a)


# ---------------------------------------------------------------------------
# Commutation


@dataclass
class CommutationResult:
    horns: FMultiset
    forward_proof: Proof | None
    backward_proof: Proof | None
    sigma_proof: Proof


class _Res:
    __slots__ = ("members", "fwd", "bwd")

    def __init__(self, members: list, fwd: Proof | None, bwd: Proof | None):
        self.members = members
        self.fwd = fwd
        self.bwd = bwd

    def horns(self) -> list[Formula]:
        return [f for f, _ in self.members]


def _rho_refl(x: Formula) -> Proof:
    return B.rimp(B.idp(EMPTY, x), x)


def _W(pi: Proof, ant: Sequence[Formula], goal: Formula | None = None) -> Proof:
    return B.weaken_to(pi, FMultiset(ant), goal)


def sigma_of(members: Sequence[tuple[Formula, Proof]]) -> tuple[FMultiset, Proof]:
    """The multiset of members and a proof of => conj of their s-images,
    in the multiset's canonical member order."""
    ms = FMultiset(f for f, _ in members)
    pool: dict[int, list[Proof]] = defaultdict(list)
    for f, rho in members:
        pool[id(f)].append(rho)
    rhos = [pool[id(f)].pop() for f in ms]
    return ms, B.rconj(rhos, EMPTY)


def sigma_conclusion(horns: FMultiset) -> Formula:
    memo: dict = {}
    return big_and(subst_s(h, memo) for h in horns)


class _Commuter:
    """Recursive construction of the Horn sets and proofs for a fixed
    argument assignment."""

    def __init__(self, args: Mapping[Formula, Formula]):
        self.args = dict(args)
        self.args_t = {p: trans_t(phi) for p, phi in self.args.items()}
        self.tmemo: dict = {}
        self.imemo: dict = {}
        self.itmemo: dict = {}
        self.cache: dict = {}
        self.lemma: dict = {}

    def X(self, a: Formula) -> Formula:
        return apply_subst(a, self.args, self.imemo)

    def Xt(self, a: Formula) -> Formula:
        return _t(self.X(a), self.tmemo)

    def Y(self, a: Formula) -> Formula:
        return apply_subst(a, self.args_t, self.itmemo)

    def L(self, a: Formula) -> Proof:
        x = self.X(a)
        pi = self.lemma.get(x)
        if pi is None:
            pi = self.lemma[x] = prove_t_implies_angle(x)
        return pi

    def run(self, theta: str, a: Formula) -> _Res:
        key = (theta, a)
        r = self.cache.get(key)
        if r is None:
            r = {"Phi": self.phi, "Pi": self.pi, "Upsilon": self.upsilon}[theta](a)
            self.cache[key] = r
        return r

    # (i) basic formulas: both directions
    def phi(self, a: Formula) -> _Res:
        if not is_basic(a):
            raise WrongClass("Basic", a)
        k = a.kind
        x, xt, y = self.X(a), self.Xt(a), self.Y(a)
        if k in (ATOM, ANGLE, BOT):
            return _Res([], B.idp(EMPTY, xt), B.idp(EMPTY, xt))
        if k == TOP:
            fwd = B.rtop(FMultiset.of(ANGLE_TOP, ANGLE_TOP))
            bwd = B.lw(B.idp(EMPTY, ANGLE_TOP), TOP_F)
            return _Res([(ANGLE_TOP, B.rtop(EMPTY))], fwd, bwd)
        ax = Angle(x)
        if k == AND:
            rb, rc = self.phi(a.left), self.phi(a.right)
            xb, xc = self.X(a.left), self.X(a.right)
            xbt, xct = self.Xt(a.left), self.Xt(a.right)
            yb, yc = self.Y(a.left), self.Y(a.right)
            f = Imp(And(Angle(xb), Angle(xc)), ax)
            members = rb.members + rc.members + [(f, _rho_refl(x))]
            th = [h for h, _ in members]
            # forward
            p = B.rand(rb.fwd, rc.fwd)
            p = _W(p, th + [xbt, xct])
            p = B.pack(p, xbt, xct)
            p = B.land1(p, And(xbt, xct), ax)
            fwd = _W(p, th + [xt], y)
            # backward
            p1 = B.rand(rb.bwd, rc.bwd)
            lb = B.cut(rb.bwd, self.L(a.left))
            lc = B.cut(rc.bwd, self.L(a.right))
            p2 = B.limp(B.rand(lb, lc), B.idp(EMPTY, ax), ax)
            p = B.rand(p1, p2)
            p = _W(p, th + [yb, yc])
            p = B.pack(p, yb, yc)
            bwd = _W(p, th + [y], xt)
            return _Res(members, fwd, bwd)
        if k == OR:
            rb, rc = self.phi(a.left), self.phi(a.right)
            xb, xc = self.X(a.left), self.X(a.right)
            xbt, xct = self.Xt(a.left), self.Xt(a.right)
            yb, yc = self.Y(a.left), self.Y(a.right)
            f1 = Imp(Angle(xb), ax)
            f2 = Imp(Angle(xc), ax)
            rho1 = B.rimp(B.ror1(B.idp(EMPTY, xb), xc), xb)
            rho2 = B.rimp(B.ror2(B.idp(EMPTY, xc), xb), xc)
            members = rb.members + rc.members + [(f1, rho1), (f2, rho2)]
            th = [h for h, _ in members]
            p = B.lor(B.ror1(rb.fwd, yc), B.ror2(rc.fwd, yb), xbt, xct)
            p = B.land1(p, Or(xbt, xct), ax)
            fwd = _W(p, th + [xt], y)
            cb = B.rand(
                B.ror1(rb.bwd, xct),
                B.limp(B.cut(rb.bwd, self.L(a.left)), B.idp(EMPTY, ax), ax),
            )
            cc = B.rand(
                B.ror2(rc.bwd, xbt),
                B.limp(B.cut(rc.bwd, self.L(a.right)), B.idp(EMPTY, ax), ax),
            )
            p = B.lor(cb, cc, yb, yc)
            bwd = _W(p, th + [y], xt)
            return _Res(members, fwd, bwd)
        if k == DIA:
            rb = self.phi(a.left)
            xb, xbt, yb = self.X(a.left), self.Xt(a.left), self.Y(a.left)
            f = Imp(Dia(Angle(xb)), ax)
            members = [(Box(h), B.kbox(r)) for h, r in rb.members] + [(f, _rho_refl(x))]
            th = [h for h, _ in members]
            p = B.kdia(rb.fwd, xbt)
            p = B.land1(p, Dia(xbt), ax)
            fwd = _W(p, th + [xt], y)
            k9 = B.kdia(rb.bwd, yb)
            ang = B.cut(k9, B.kdia(self.L(a.left), xbt))
            p2 = B.limp(ang, B.idp(EMPTY, ax), ax)
            p = B.rand(k9, p2)
            bwd = _W(p, th + [y], xt)
            return _Res(members, fwd, bwd)
        raise WrongClass("Basic", a)  # pragma: no cover

    # (ii) almost positive formulas: forward direction
    def pi(self, a: Formula) -> _Res:
        if is_basic(a):
            r = self.phi(a)
            return _Res(r.members, r.fwd, None)
        if not is_almost_positive(a):
            raise WrongClass("AlmostPositive", a)
        k = a.kind
        xt, y = self.Xt(a), self.Y(a)
        ax = Angle(self.X(a))
        if k in (AND, OR):
            rb, rc = self.pi(a.left), self.pi(a.right)
            xbt, xct = self.Xt(a.left), self.Xt(a.right)
            yb, yc = self.Y(a.left), self.Y(a.right)
            members = rb.members + rc.members
            th = [h for h, _ in members]
            if k == AND:
                p = B.rand(rb.fwd, rc.fwd)
                p = _W(p, th + [xbt, xct])
                p = B.pack(p, xbt, xct)
                p = B.land1(p, And(xbt, xct), ax)
            else:
                p = B.lor(B.ror1(rb.fwd, yc), B.ror2(rc.fwd, yb), xbt, xct)
                p = B.land1(p, Or(xbt, xct), ax)
            return _Res(members, _W(p, th + [xt], y), None)
        if k in (BOX, DIA):
            rb = self.pi(a.left)
            xbt = self.Xt(a.left)
            members = [(Box(h), B.kbox(r)) for h, r in rb.members]
            th = [h for h, _ in members]
            if k == BOX:
                p = B.land1(B.kbox(rb.fwd), Box(xbt), ax)
            else:
                p = B.land1(B.kdia(rb.fwd, xbt), Dia(xbt), ax)
            return _Res(members, _W(p, th + [xt], y), None)
        if k == IMP:
            rb, rc = self.phi(a.left), self.pi(a.right)
            xbt, xct = self.Xt(a.left), self.Xt(a.right)
            yb, yc = self.Y(a.left), self.Y(a.right)
            members = rb.members + rc.members
            th = [h for h, _ in members]
            p = B.limp(rb.bwd, rc.fwd, xct)
            p = _W(p, th + [yb, Imp(xbt, xct)], yc)
            p = B.rimp(p, yb)
            p = B.land1(p, Imp(xbt, xct), ax)
            return _Res(members, _W(p, th + [xt], y), None)
        raise WrongClass("AlmostPositive", a)  # pragma: no cover

    # (iii) constructive formulas: backward direction with <A(phi)>
    def upsilon(self, a: Formula) -> _Res:
        x, xt, y = self.X(a), self.Xt(a), self.Y(a)
        ax = Angle(x)
        if is_basic(a):
            r = self.phi(a)
            th = [h for h, _ in r.members]
            return _Res(r.members, None, _W(r.bwd, th + [ax, y], xt))
        if not is_constructive(a):
            raise WrongClass("Constructive", a)
        k = a.kind
        if k == AND:
            rb, rc = self.upsilon(a.left), self.upsilon(a.right)
            xb, xc = self.X(a.left), self.X(a.right)
            xbt, xct = self.Xt(a.left), self.Xt(a.right)
            yb, yc = self.Y(a.left), self.Y(a.right)
            f1, f2 = Imp(ax, Angle(xb)), Imp(ax, Angle(xc))
            rho1 = B.rimp(B.land1(B.idp(EMPTY, xb), xb, xc), x)
            rho2 = B.rimp(B.land2(B.idp(EMPTY, xc), xb, xc), x)
            members = rb.members + rc.members + [(f1, rho1), (f2, rho2)]
            th = [h for h, _ in members]
            gb = B.limp(B.idp(EMPTY, ax), B.idp(EMPTY, Angle(xb)), Angle(xb))
            gc = B.limp(B.idp(EMPTY, ax), B.idp(EMPTY, Angle(xc)), Angle(xc))
            pb = B.cut(gb, rb.bwd)
            pc = B.cut(gc, rc.bwd)
            p = B.rand(pb, pc)
            p = _W(p, th + [ax, yb, yc])
            p = B.pack(p, yb, yc)
            p = B.rand(p, B.idp(EMPTY, ax))
            return _Res(members, None, _W(p, th + [ax, y], xt))
        if k == BOX:
            rb = self.upsilon(a.left)
            xb, xbt = self.X(a.left), self.Xt(a.left)
            f = Imp(ax, Box(Angle(xb)))
            members = [(Box(h), B.kbox(r)) for h, r in rb.members] + [(f, _rho_refl(x))]
            th = [h for h, _ in members]
            kb = B.kbox(rb.bwd)
            get = B.limp(B.idp(EMPTY, ax), B.idp(EMPTY, Box(Angle(xb))), Box(Angle(xb)))
            p = B.cut(get, kb)
            p = B.rand(p, B.idp(EMPTY, ax))
            return _Res(members, None, _W(p, th + [ax, y], xt))
        if k == IMP:
            rb, rc = self.pi(a.left), self.upsilon(a.right)
            xb, xc = self.X(a.left), self.X(a.right)
            xbt, xct = self.Xt(a.left), self.Xt(a.right)
            yc = self.Y(a.right)
            f = Imp(And(ax, Angle(xb)), Angle(xc))
            rho = B.limp(B.idp(EMPTY, xb), B.idp(EMPTY, xc), xc)
            rho = B.rimp(B.pack(rho, x, xb), And(x, xb))
            members = rb.members + rc.members + [(f, rho)]
            th = [h for h, _ in members]
            q1 = B.limp(rb.fwd, rc.bwd, yc)
            getc = B.limp(B.rand(B.idp(EMPTY, ax), self.L(a.left)), B.idp(EMPTY, Angle(xc)), Angle(xc))
            q2 = B.cut(getc, q1)
            q2 = _W(q2, th + [ax, y, xbt], xct)
            q3 = B.rimp(q2, xbt)
            p = B.rand(q3, B.idp(EMPTY, ax))
            return _Res(members, None, _W(p, th + [ax, y], xt))
        raise WrongClass("Constructive", a)


_THETA = {
    "Basic": "Phi",
    "Phi": "Phi",
    "AlmostPositive": "Pi",
    "Pi": "Pi",
    "Constructive": "Upsilon",
    "Upsilon": "Upsilon",
}


def _arg_map(a: Formula, args, atoms: Sequence[Formula] | None) -> dict:
    if isinstance(args, Mapping):
        amap = {}
        for k, v in args.items():
            amap[k if isinstance(k, Formula) else _atom(k)] = v
    else:
        args = list(args)
        if not args and atoms is None:
            return _arg_map(a, {}, None)
        pat = list(atoms) if atoms is not None else [t for t in atoms_of(a) if t.kind == ATOM]
        if len(pat) != len(args):
            raise ValueError(f"pattern has {len(pat)} atoms but {len(args)} arguments were given")
        amap = dict(zip(pat, args))
    for t in atoms_of(a):
        if t.kind == ANGLE:
            raise AngledAtomPresent(print_formula(t))
        amap.setdefault(t, t)
    for v in amap.values():
        _no_angles(v)
    return amap


def _atom(name: str) -> Formula:
    from .core import Atom

    return Atom(name)


def commute(theta: str, a: Formula, args=(), atoms: Sequence[Formula] | None = None) -> CommutationResult:
    """Horn set and proofs commuting t with the pattern a under args.

    theta is Basic (both directions), AlmostPositive (forward) or
    Constructive (backward, with <a(args)> as an extra assumption). args is a
    list matched against `atoms` (default: a's atoms in order of first
    occurrence) or a mapping from atoms to formulas; unmapped atoms stand
    for themselves."""
    try:
        which = _THETA[theta]
    except KeyError:
        raise ValueError(f"unknown class {theta}") from None
    amap = _arg_map(a, args, atoms)
    c = _Commuter(amap)
    r = c.run(which, a)
    horns, sigma = sigma_of(r.members)
    return CommutationResult(horns, r.fwd, r.bwd, sigma)


def commute_members(theta: str, a: Formula, amap: Mapping[Formula, Formula]) -> _Res:
    """Internal form of commute: member list with per-member s-proofs."""
    return _Commuter(_arg_map(a, amap, None)).run(_THETA[theta], a)


# ---------------------------------------------------------------------------
# Harrop decomposition


@dataclass
class HarropDecomposition:
    gamma_a: FMultiset
    derivation_proof: Proof
    equivalence_proof: Proof
    to_formula_proof: Proof
    from_formula_proof: Proof


def harrop_decompose(a: Formula) -> HarropDecomposition:
    """Gamma_A with proofs of Gamma_A => A^t and conj(Gamma_A^s) <=> A.

    The equivalence is returned both as a single proof of
    => (conj -> A) & (A -> conj) and as the two sequents conj => A and A => conj."""
    _no_angles(a)
    if not is_harrop(a):
        raise NotHarrop(f"{print_formula(a)} is not Harrop")
    tmemo: dict = {}
    lemma: dict = {}

    def L(x: Formula) -> Proof:
        p = lemma.get(x)
        if p is None:
            p = lemma[x] = prove_t_implies_angle(x)
        return p

    memo: dict = {}

    def rec(x: Formula):
        """(members, derivation, back) where back maps each member position
        to a proof x => member^s."""
        r = memo.get(x)
        if r is not None:
            return r
        k = x.kind
        xt = _t(x, tmemo)
        if k in (ATOM, TOP, BOT):
            members = [xt]
            der = B.idp(EMPTY, xt)
            back = [B.idp(EMPTY, x)]
        elif k == AND:
            mb, db, bb = rec(x.left)
            mc, dc, bc = rec(x.right)
            ax = Angle(x)
            members = mb + mc + [ax]
            p = B.rand(B.rand(db, dc), B.idp(EMPTY, ax))
            der = _W(p, members, xt)
            back = (
                [B.land1(q, x.left, x.right) for q in bb]
                + [B.land2(q, x.left, x.right) for q in bc]
                + [B.idp(EMPTY, x)]
            )
        elif k == IMP:
            mc, dc, bc = rec(x.right)
            ab = Angle(x.left)
            ax = Angle(x)
            bt = _t(x.left, tmemo)
            ct = _t(x.right, tmemo)
            members = [ax] + [Imp(ab, g) for g in mc]
            p = dc
            for g in mc:
                p = B.limp(L(x.left), p, g)
            p = _W(p, [bt] + members[1:], ct)
            p = B.rimp(p, bt)
            p = B.rand(p, B.idp(EMPTY, ax))
            der = _W(p, members, xt)
            back = [B.idp(EMPTY, x)]
            for g, q in zip(mc, bc):
                pq = B.limp(B.idp(EMPTY, x.left), q, x.right)
                back.append(B.rimp(pq, x.left))
        elif k == BOX:
            mb, db, bb = rec(x.left)
            ax = Angle(x)
            members = [Box(g) for g in mb] + [ax]
            p = B.rand(B.kbox(db), B.idp(EMPTY, ax))
            der = _W(p, members, xt)
            back = [B.kbox(q) for q in bb] + [B.idp(EMPTY, x)]
        else:
            raise NotHarrop(print_formula(x))
        memo[x] = (members, der, back)
        return memo[x]

    members, der, back = rec(a)
    gamma = FMultiset(members)
    smemo: dict = {}
    pool: dict[int, list[Proof]] = defaultdict(list)
    for g, q in zip(members, back):
        pool[id(g)].append(q)
    ordered = [pool[id(g)].pop() for g in gamma]
    sitems = [subst_s(g, smemo) for g in gamma]
    conj = big_and(sitems)
    to_a = _W(B.lconj(_W(B.idp(EMPTY, a), sitems, a), sitems), [conj], a)
    from_a = B.rconj(ordered, FMultiset.of(a))
    eq = B.rand(B.rimp(to_a, conj), B.rimp(from_a, a))
    return HarropDecomposition(gamma, B.weaken_to(der, gamma, trans_t(a)), eq, to_a, from_a)
