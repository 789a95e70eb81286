"""Formulas, multisets, sequents, substitutions, parsing and printing.

Formulas are hash-consed: structurally equal formulas are the same object,
so equality is identity and multisets compare by tuple equality.
"""

from __future__ import annotations

import enum
import hashlib
import re
import threading
from bisect import bisect_left, insort
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

ATOM, ANGLE, TOP, BOT, AND, OR, IMP, BOX, DIA = range(9)

KIND_NAMES = ("atom", "angle", "top", "bot", "and", "or", "imp", "box", "dia")

# connective bits used for language checks
M_BOX = 1
M_DIA = 2
M_ANGLE = 4

_MASK64 = (1 << 64) - 1


class ModalProofError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "Error"


class FormulaSyntaxError(ModalProofError, ValueError):
    """Raised when text does not conform to the formula grammar."""

    code = "SyntaxError"

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class LanguageViolation(ModalProofError):
    """Raised when a formula uses a connective outside the requested language."""

    code = "LanguageViolation"

    def __init__(self, connective: str, lang: "LanguageTag | None" = None):
        where = f" in {lang.value}" if lang is not None else ""
        super().__init__(f"connective {connective} not allowed{where}")
        self.connective = connective


class UnboundVariable(ModalProofError):
    code = "UnboundVariable"


class AngledAtomPresent(ModalProofError):
    """Raised when an operation on the plain language meets an angled atom."""

    code = "AngledAtomPresent"


class LanguageTag(enum.Enum):
    """The five languages: full modal, the two one-modality fragments,
    propositional, and the full language with angled atoms."""

    Full = "Full"
    BoxOnly = "BoxOnly"
    DiamondOnly = "DiamondOnly"
    Propositional = "Propositional"
    FullPlus = "FullPlus"

    @property
    def forbidden(self) -> int:
        return _FORBIDDEN[self]

    def allows(self, f: "Formula") -> bool:
        return not (f.mask & self.forbidden)


_FORBIDDEN = {
    LanguageTag.Full: M_ANGLE,
    LanguageTag.BoxOnly: M_DIA | M_ANGLE,
    LanguageTag.DiamondOnly: M_BOX | M_ANGLE,
    LanguageTag.Propositional: M_BOX | M_DIA | M_ANGLE,
    LanguageTag.FullPlus: 0,
}


def _mix(*parts: int) -> int:
    h = 0x9E3779B97F4A7C15
    for p in parts:
        h = (h ^ p) * 0xBF58476D1CE4E5B9 & _MASK64
        h ^= h >> 31
        h = (h * 0x94D049BB133111EB) & _MASK64
        h ^= h >> 29
    return h


class Formula:
    """An interned formula node; build them with the constructor functions."""

    __slots__ = ("kind", "left", "right", "name", "size", "h64", "mask", "key", "__weakref__")

    kind: int
    left: "Formula | None"
    right: "Formula | None"
    name: str | None
    size: int
    h64: int
    mask: int
    key: int

    def __reduce__(self):
        if self.kind == ATOM:
            return (Atom, (self.name,))
        if self.kind == TOP:
            return (_const, (TOP,))
        if self.kind == BOT:
            return (_const, (BOT,))
        if self.kind in (ANGLE, BOX, DIA):
            return (_unary, (self.kind, self.left))
        return (_binary, (self.kind, self.left, self.right))

    def __repr__(self) -> str:
        return f"Formula({print_formula(self)!r})"

    def __str__(self) -> str:
        return print_formula(self)

    def __lt__(self, other: "Formula") -> bool:
        return self.key < other.key

    @property
    def is_atomic(self) -> bool:
        """Named atoms and angled atoms (not the constants)."""
        return self.kind == ATOM or self.kind == ANGLE

    @property
    def payload(self) -> "Formula":
        if self.kind != ANGLE:
            raise ValueError("not an angled atom")
        return self.left  # type: ignore[return-value]

    @property
    def body(self) -> "Formula":
        """Operand of a modal formula."""
        if self.kind not in (BOX, DIA):
            raise ValueError("not a modal formula")
        return self.left  # type: ignore[return-value]


_TABLE: dict = {}
_LOCK = threading.Lock()


def _make(kind: int, left, right, name) -> Formula:
    k = (kind, left, right, name)
    f = _TABLE.get(k)
    if f is not None:
        return f
    f = Formula()
    f.kind = kind
    f.left = left
    f.right = right
    f.name = name
    if kind == ATOM:
        f.size = 1
        f.h64 = int.from_bytes(hashlib.blake2b(name.encode(), digest_size=8).digest(), "big")
        f.mask = 0
    elif kind in (TOP, BOT):
        f.size = 1
        f.h64 = _mix(kind)
        f.mask = 0
    elif kind == ANGLE:
        f.size = left.size + 2
        f.h64 = _mix(kind, left.h64)
        f.mask = M_ANGLE
    elif kind in (BOX, DIA):
        f.size = left.size + 1
        f.h64 = _mix(kind, left.h64)
        f.mask = left.mask | (M_BOX if kind == BOX else M_DIA)
    else:
        f.size = left.size + right.size + 1
        f.h64 = _mix(kind, left.h64, right.h64)
        f.mask = left.mask | right.mask
    f.key = (f.size << 64) | f.h64
    with _LOCK:
        return _TABLE.setdefault(k, f)


def Atom(name: str) -> Formula:
    return _make(ATOM, None, None, name)


def _const(kind: int) -> Formula:
    return _make(kind, None, None, None)


TOP_F = _const(TOP)
BOT_F = _const(BOT)


def Angle(payload: Formula) -> Formula:
    """The angled atom naming `payload`; payloads must be angle-free."""
    if payload.mask & M_ANGLE:
        raise LanguageViolation("nested angled atom")
    return _make(ANGLE, payload, None, None)


def And(a: Formula, b: Formula) -> Formula:
    return _make(AND, a, b, None)


def Or(a: Formula, b: Formula) -> Formula:
    return _make(OR, a, b, None)


def Imp(a: Formula, b: Formula) -> Formula:
    return _make(IMP, a, b, None)


def Box(a: Formula) -> Formula:
    return _make(BOX, a, None, None)


def Dia(a: Formula) -> Formula:
    return _make(DIA, a, None, None)


def Neg(a: Formula) -> Formula:
    return Imp(a, BOT_F)


def _unary(kind: int, a: Formula) -> Formula:
    return _make(kind, a, None, None)


def _binary(kind: int, a: Formula, b: Formula) -> Formula:
    return _make(kind, a, b, None)


def boxes(a: Formula, n: int) -> Formula:
    for _ in range(n):
        a = Box(a)
    return a


def dias(a: Formula, n: int) -> Formula:
    for _ in range(n):
        a = Dia(a)
    return a


def big_and(fs: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; the empty conjunction is top."""
    items = list(fs)
    if not items:
        return TOP_F
    acc = items[-1]
    for f in reversed(items[:-1]):
        acc = And(f, acc)
    return acc


def big_or(fs: Iterable[Formula]) -> Formula:
    """Right-nested disjunction; the empty disjunction is bot."""
    items = list(fs)
    if not items:
        return BOT_F
    acc = items[-1]
    for f in reversed(items[:-1]):
        acc = Or(f, acc)
    return acc


def is_neg(f: Formula) -> bool:
    return f.kind == IMP and f.right is BOT_F


def subformulas(f: Formula) -> list[Formula]:
    """Distinct subformulas in post-order (angled payloads are not entered)."""
    seen: set[int] = set()
    out: list[Formula] = []
    stack: list[tuple[Formula, bool]] = [(f, False)]
    while stack:
        g, done = stack.pop()
        if done:
            out.append(g)
            continue
        if id(g) in seen:
            continue
        seen.add(id(g))
        stack.append((g, True))
        if g.kind in (AND, OR, IMP):
            stack.append((g.right, False))
            stack.append((g.left, False))
        elif g.kind in (BOX, DIA):
            stack.append((g.left, False))
    return out


def atoms_of(f: Formula) -> list[Formula]:
    """Named and angled atoms of f, in order of first occurrence."""
    out: list[Formula] = []
    seen: set[int] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g.kind == ATOM or g.kind == ANGLE:
            if id(g) not in seen:
                seen.add(id(g))
                out.append(g)
        elif g.kind in (AND, OR, IMP):
            stack.append(g.right)
            stack.append(g.left)
        elif g.kind in (BOX, DIA):
            stack.append(g.left)
    return out


def check_lang(f: Formula, lang: LanguageTag) -> None:
    bad = f.mask & lang.forbidden
    if bad:
        if bad & M_ANGLE:
            raise LanguageViolation("<...>", lang)
        if bad & M_DIA:
            raise LanguageViolation("dia", lang)
        raise LanguageViolation("box", lang)


def lang_of(f: Formula) -> LanguageTag:
    """The smallest language containing f."""
    if f.mask & M_ANGLE:
        return LanguageTag.FullPlus
    b, d = bool(f.mask & M_BOX), bool(f.mask & M_DIA)
    if b and d:
        return LanguageTag.Full
    if b:
        return LanguageTag.BoxOnly
    if d:
        return LanguageTag.DiamondOnly
    return LanguageTag.Propositional


# ---------------------------------------------------------------------------
# Multisets


class FMultiset:
    """A finite multiset of formulas stored as a tuple sorted by formula key."""

    __slots__ = ("items", "_hash", "_size")

    def __init__(self, items: Iterable[Formula] = (), _sorted: bool = False):
        t = tuple(items)
        if not _sorted:
            t = tuple(sorted(t, key=_key))
        self.items: tuple[Formula, ...] = t
        self._hash: int | None = None
        self._size: int | None = None

    @classmethod
    def of(cls, *fs: Formula) -> "FMultiset":
        return cls(fs)

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __bool__(self) -> bool:
        return bool(self.items)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FMultiset) and self.items == other.items

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.items)
        return self._hash

    def __repr__(self) -> str:
        return "{" + ", ".join(print_formula(f) for f in self.items) + "}"

    @property
    def size(self) -> int:
        """Sum of member sizes counted with multiplicity."""
        if self._size is None:
            self._size = sum(f.size for f in self.items)
        return self._size

    def count(self, f: Formula) -> int:
        i = bisect_left(self.items, f.key, key=_key)
        n = 0
        while i < len(self.items) and self.items[i].key == f.key:
            if self.items[i] is f:
                n += 1
            i += 1
        return n

    def __contains__(self, f: object) -> bool:
        return isinstance(f, Formula) and self.count(f) > 0

    def distinct(self) -> list[Formula]:
        out: list[Formula] = []
        for f in self.items:
            if not out or out[-1] is not f:
                out.append(f)
        return out

    def add(self, *fs: Formula) -> "FMultiset":
        lst = list(self.items)
        for f in fs:
            insort(lst, f, key=_key)
        return FMultiset(lst, _sorted=True)

    def remove(self, *fs: Formula) -> "FMultiset":
        """Remove one occurrence of each given formula; KeyError if missing."""
        lst = list(self.items)
        for f in fs:
            i = bisect_left(lst, f.key, key=_key)
            while i < len(lst) and lst[i].key == f.key and lst[i] is not f:
                i += 1
            if i >= len(lst) or lst[i] is not f:
                raise KeyError(print_formula(f))
            del lst[i]
        return FMultiset(lst, _sorted=True)

    def __add__(self, other: "FMultiset") -> "FMultiset":
        if not other.items:
            return self
        if not self.items:
            return other
        return FMultiset(_merge(self.items, other.items), _sorted=True)

    def __sub__(self, other: "FMultiset") -> "FMultiset":
        return self.remove(*other.items)

    def issubset(self, other: "FMultiset") -> bool:
        try:
            other.remove(*self.items)
        except KeyError:
            return False
        return True

    def map(self, fn) -> "FMultiset":
        return FMultiset(fn(f) for f in self.items)

    def boxed(self) -> "FMultiset":
        """The multiset of boxes of members (key order may change)."""
        return FMultiset(Box(f) for f in self.items)

    def conj(self) -> Formula:
        return big_and(self.items)

    def disj(self) -> Formula:
        return big_or(self.items)


def _key(f: Formula) -> int:
    return f.key


def _merge(a: tuple, b: tuple) -> list:
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        if a[i].key <= b[j].key:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return out


EMPTY = FMultiset(())


@dataclass(frozen=True)
class Sequent:
    """Antecedent and succedent multisets."""

    ant: FMultiset
    succ: FMultiset = EMPTY

    @classmethod
    def make(cls, ant: Iterable[Formula], succ: Formula | None = None) -> "Sequent":
        return cls(FMultiset(ant), FMultiset(() if succ is None else (succ,)))

    @property
    def goal(self) -> Formula | None:
        """The single succedent formula, or None for an empty succedent."""
        if len(self.succ) > 1:
            raise ValueError("multi-conclusion sequent")
        return self.succ.items[0] if self.succ.items else None

    def interpretation(self) -> Formula:
        return Imp(self.ant.conj(), self.succ.disj())

    @property
    def size(self) -> int:
        return self.ant.size + self.succ.size

    def formulas(self) -> Iterator[Formula]:
        yield from self.ant.items
        yield from self.succ.items

    def __str__(self) -> str:
        return print_sequent(self)


@dataclass(frozen=True)
class Substitution:
    """Atom placeholders to formulas and context variables to multisets.

    Keys of `atoms` are atom formulas (named or angled)."""

    atoms: Mapping[Formula, Formula] = field(default_factory=dict)
    ctx: Mapping[str, FMultiset] = field(default_factory=dict)

    @classmethod
    def make(cls, atoms: Mapping | None = None, ctx: Mapping | None = None) -> "Substitution":
        am: dict[Formula, Formula] = {}
        for k, v in (atoms or {}).items():
            am[Atom(k) if isinstance(k, str) else k] = v
        cm = {k: (v if isinstance(v, FMultiset) else FMultiset(v)) for k, v in (ctx or {}).items()}
        return cls(am, cm)


def apply_subst(f: Formula, s: Substitution | Mapping[Formula, Formula], memo: dict | None = None) -> Formula:
    """Homomorphic replacement of atoms; angled atoms are opaque."""
    amap = s.atoms if isinstance(s, Substitution) else s
    return map_atoms(f, lambda a: amap.get(a, a), memo)


def map_atoms(f: Formula, fn, memo: dict | None = None) -> Formula:
    """Rebuild f replacing each named or angled atom a by fn(a)."""
    if memo is None:
        memo = {}
    return _rebuild(f, fn, memo)


def _rebuild(f: Formula, fn, memo: dict) -> Formula:
    r = memo.get(f)
    if r is not None:
        return r
    k = f.kind
    if k == ATOM or k == ANGLE:
        r = fn(f)
    elif k == TOP or k == BOT:
        r = f
    elif k == BOX or k == DIA:
        r = _make(k, _rebuild(f.left, fn, memo), None, None)
    else:
        r = _make(k, _rebuild(f.left, fn, memo), _rebuild(f.right, fn, memo), None)
    memo[f] = r
    return r


# ---------------------------------------------------------------------------
# Parsing and printing

_TOKEN = re.compile(
    r"\s*(?:(?P<imp>->)|(?P<seq>=>)|(?P<sym>[&|~()<>,])|(?P<word>[a-z][a-zA-Z0-9_]*)|(?P<bad>\S))"
)

_PREFIX = {"box": BOX, "dia": DIA}


class _Parser:
    def __init__(self, text: str, lang: LanguageTag):
        self.text = text
        self.lang = lang
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                break
            pos = m.end()
            kind = m.lastgroup
            if kind == "bad":
                raise FormulaSyntaxError(f"unexpected character {m.group(kind)!r}", m.start(kind))
            self.toks.append((kind, m.group(kind), m.start(kind)))
        self.end = len(text)
        self.i = 0
        self.angle_depth = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def pos(self) -> int:
        t = self.peek()
        return t[2] if t else self.end

    def take(self, value: str) -> None:
        t = self.peek()
        if t is None or t[1] != value:
            raise FormulaSyntaxError(f"expected {value!r}", self.pos())
        self.i += 1

    def formula(self) -> Formula:
        left = self.disj()
        t = self.peek()
        if t is not None and t[0] == "imp":
            self.i += 1
            return Imp(left, self.formula())
        return left

    def disj(self) -> Formula:
        left = self.conj()
        t = self.peek()
        if t is not None and t[1] == "|":
            self.i += 1
            return Or(left, self.disj())
        return left

    def conj(self) -> Formula:
        left = self.unary()
        t = self.peek()
        if t is not None and t[1] == "&":
            self.i += 1
            return And(left, self.conj())
        return left

    def unary(self) -> Formula:
        t = self.peek()
        if t is None:
            raise FormulaSyntaxError("unexpected end of input", self.end)
        kind, val, at = t
        if val == "~":
            self.i += 1
            return Neg(self.unary())
        if kind == "word" and val in _PREFIX:
            self.i += 1
            k = _PREFIX[val]
            if self.lang.forbidden & (M_BOX if k == BOX else M_DIA):
                raise LanguageViolation(val, self.lang)
            return _make(k, self.unary(), None, None)
        if kind == "word":
            self.i += 1
            if val == "top":
                return TOP_F
            if val == "bot":
                return BOT_F
            return Atom(val)
        if val == "(":
            self.i += 1
            f = self.formula()
            self.take(")")
            return f
        if val == "<":
            if self.lang.forbidden & M_ANGLE:
                raise LanguageViolation("<...>", self.lang)
            if self.angle_depth:
                raise FormulaSyntaxError("nested angled atom", at)
            self.i += 1
            self.angle_depth += 1
            f = self.formula()
            self.angle_depth -= 1
            self.take(">")
            return Angle(f)
        raise FormulaSyntaxError(f"unexpected token {val!r}", at)


def parse_formula(text: str, lang: LanguageTag = LanguageTag.FullPlus) -> Formula:
    """Parse one formula; connectives outside `lang` raise LanguageViolation."""
    p = _Parser(text, lang)
    f = p.formula()
    if p.peek() is not None:
        raise FormulaSyntaxError(f"trailing input {p.peek()[1]!r}", p.pos())
    return f


def parse_sequent(text: str, lang: LanguageTag = LanguageTag.FullPlus) -> Sequent:
    """Parse `A, B => C`; the succedent may be empty."""
    p = _Parser(text, lang)
    ant: list[Formula] = []
    t = p.peek()
    if t is None or t[0] != "seq":
        while True:
            ant.append(p.formula())
            t = p.peek()
            if t is not None and t[1] == ",":
                p.i += 1
                continue
            break
    p.take("=>")
    succ: list[Formula] = []
    if p.peek() is not None:
        succ.append(p.formula())
    if p.peek() is not None:
        raise FormulaSyntaxError(f"trailing input {p.peek()[1]!r}", p.pos())
    return Sequent(FMultiset(ant), FMultiset(succ))


_PREC = {IMP: 1, OR: 2, AND: 3}
_OPS = {IMP: " -> ", OR: " | ", AND: " & "}


def print_formula(f: Formula) -> str:
    """Canonical text; binary connectives associate to the right."""
    parts: list[str] = []
    _emit(f, 0, parts)
    return "".join(parts)


def _emit(f: Formula, ctx: int, out: list[str]) -> None:
    k = f.kind
    if k == ATOM:
        out.append(f.name)
    elif k == TOP:
        out.append("top")
    elif k == BOT:
        out.append("bot")
    elif k == ANGLE:
        out.append("<")
        _emit(f.left, 0, out)
        out.append(">")
    elif k == BOX or k == DIA:
        out.append("box " if k == BOX else "dia ")
        _emit(f.left, 4, out)
    elif k == IMP and f.right is BOT_F:
        out.append("~")
        _emit(f.left, 4, out)
    else:
        prec = _PREC[k]
        paren = ctx >= prec
        if paren:
            out.append("(")
        _emit(f.left, prec, out)
        out.append(_OPS[k])
        _emit(f.right, prec - 1, out)
        if paren:
            out.append(")")


def print_sequent(s: Sequent) -> str:
    left = ", ".join(print_formula(f) for f in s.ant)
    right = ", ".join(print_formula(f) for f in s.succ)
    if left and right:
        return f"{left} => {right}"
    if left:
        return f"{left} =>"
    return f"=> {right}" if right else "=>"
