"""One-node Kripke semantics and the T-free / T-full classification of
calculi of the form CK + axioms."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

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
    AngledAtomPresent,
    And,
    Box,
    Dia,
    Formula,
    Imp,
    LanguageTag,
    ModalProofError,
    Or,
    atoms_of,
    print_formula,
)

T_A_NAME = "T_a"
T_B_NAME = "T_b"


@dataclass(frozen=True)
class OneNodeModel:
    """A model on a single world, either the reflexive or the irreflexive node."""

    reflexive: bool
    true_atoms: frozenset = field(default_factory=frozenset)
    fallible: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "true_atoms", frozenset(self.true_atoms))
        if self.fallible and not self.reflexive:
            raise ModalProofError("a fallible world must see itself")


def eval_one_node(f: Formula, m: OneNodeModel, memo: dict | None = None) -> bool:
    """Truth of f at the single world of m."""
    if m.fallible:
        if f.mask & 4:
            raise AngledAtomPresent(print_formula(f))
        return True
    memo = {} if memo is None else memo
    return _ev(f, m.reflexive, m.true_atoms, memo)


def _ev(f: Formula, refl: bool, true_atoms: frozenset, memo: dict) -> bool:
    r = memo.get(f)
    if r is not None:
        return r
    k = f.kind
    if k == ATOM:
        r = f.name in true_atoms
    elif k == TOP:
        r = True
    elif k == BOT:
        r = False
    elif k == ANGLE:
        raise AngledAtomPresent(print_formula(f))
    elif k == AND:
        r = _ev(f.left, refl, true_atoms, memo) and _ev(f.right, refl, true_atoms, memo)
    elif k == OR:
        r = _ev(f.left, refl, true_atoms, memo) or _ev(f.right, refl, true_atoms, memo)
    elif k == IMP:
        r = (not _ev(f.left, refl, true_atoms, memo)) or _ev(f.right, refl, true_atoms, memo)
    elif k == BOX:
        r = _ev(f.left, refl, true_atoms, memo) if refl else True
    elif k == DIA:
        r = _ev(f.left, refl, true_atoms, memo) if refl else False
    else:  # pragma: no cover
        raise ValueError(k)
    memo[f] = r
    return r


def falsifying_valuation(f: Formula, reflexive: bool) -> frozenset | None:
    """A set of true atoms under which f fails at the node, or None if f is valid."""
    if f.mask & 4:
        raise AngledAtomPresent(print_formula(f))
    names = [a.name for a in atoms_of(f)]
    for bits in itertools.product((False, True), repeat=len(names)):
        val = frozenset(n for n, b in zip(names, bits) if b)
        if not _ev(f, reflexive, val, {}):
            return val
    return None


def frame_valid(f: Formula, reflexive: bool) -> bool:
    """Validity of f in the reflexive or the irreflexive one-node frame."""
    return falsifying_valuation(f, reflexive) is None


@dataclass(frozen=True)
class TClassVerdict:
    kind: str  # "TFree", "TFull" or "Neither"
    reason: str = ""
    axiom: Formula | None = None
    valuation: frozenset | None = None
    frame: str | None = None

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "reason": self.reason,
            "axiom": print_formula(self.axiom) if self.axiom is not None else None,
            "valuation": sorted(self.valuation) if self.valuation is not None else None,
            "frame": self.frame,
        }

    def __str__(self) -> str:
        return self.kind if not self.reason else f"{self.kind}({self.reason})"


def _trim_top(f: Formula, memo: dict) -> Formula:
    """Drop trivial ⊤ parts: ⊤∧A, A∧⊤ and ⊤→A all become A."""
    r = memo.get(f)
    if r is not None:
        return r
    k = f.kind
    if k in (AND, OR, IMP):
        a, b = _trim_top(f.left, memo), _trim_top(f.right, memo)
        if k == AND and a.kind == TOP:
            r = b
        elif k == AND and b.kind == TOP:
            r = a
        elif k == IMP and a.kind == TOP:
            r = b
        else:
            r = {AND: And, OR: Or, IMP: Imp}[k](a, b)
    elif k == BOX:
        r = Box(_trim_top(f.left, memo))
    elif k == DIA:
        r = Dia(_trim_top(f.left, memo))
    else:
        r = f
    memo[f] = r
    return r


def _is_t_axiom(f: Formula, which: str) -> bool:
    f = _trim_top(f, {})
    if f.kind != IMP:
        return False
    a, b = f.left, f.right
    if which == T_A_NAME:
        return a.kind == BOX and b.kind == ATOM and a.left is b
    return b.kind == DIA and a.kind == ATOM and b.left is a


def required_t_axioms(lang: LanguageTag) -> tuple[str, ...]:
    if lang == LanguageTag.BoxOnly:
        return (T_A_NAME,)
    if lang == LanguageTag.DiamondOnly:
        return (T_B_NAME,)
    return (T_A_NAME, T_B_NAME)


def classify_tness(cset: Sequence[Formula] | Iterable[Formula], lang: LanguageTag = LanguageTag.Full) -> TClassVerdict:
    """TFree when every axiom holds on the irreflexive node; TFull when every
    axiom holds on the reflexive node and the T axioms of the language occur
    in cset up to renaming of the atom; Neither otherwise."""
    cset = list(cset)
    irr_fail = None
    for a in cset:
        v = falsifying_valuation(a, False)
        if v is not None:
            irr_fail = (a, v)
            break
    if irr_fail is None:
        return TClassVerdict("TFree")
    for a in cset:
        v = falsifying_valuation(a, True)
        if v is not None:
            return TClassVerdict(
                "Neither",
                f"{print_formula(a)} fails on both nodes",
                a,
                v,
                "reflexive",
            )
    missing = [t for t in required_t_axioms(lang) if not any(_is_t_axiom(a, t) for a in cset)]
    if not missing:
        return TClassVerdict("TFull")
    a, v = irr_fail
    return TClassVerdict(
        "Neither",
        f"{print_formula(a)} fails on the irreflexive node and {', '.join(missing)} is not an axiom",
        a,
        v,
        "irreflexive",
    )
