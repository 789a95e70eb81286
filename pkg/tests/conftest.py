"""Shared fixtures and independent oracles for the test-suite."""

from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import strategies as st

from modalproof.calculus import builtin
from modalproof.core import (
    AND,
    ANGLE,
    ATOM,
    BOT,
    BOX,
    DIA,
    IMP,
    OR,
    TOP,
    TOP_F,
    BOT_F,
    And,
    Atom,
    Box,
    Dia,
    Imp,
    Or,
    atoms_of,
    print_formula,
)

ATOM_NAMES = ("p", "q", "r")


def formulas(modal: bool = True, atoms=ATOM_NAMES, max_leaves: int = 12):
    """Hypothesis strategy for formulas of the full (or propositional) language."""
    leaves = st.sampled_from([Atom(a) for a in atoms] + [TOP_F, BOT_F])

    def extend(children):
        binary = st.tuples(st.sampled_from([And, Or, Imp]), children, children).map(lambda t: t[0](t[1], t[2]))
        if not modal:
            return binary
        unary = st.tuples(st.sampled_from([Box, Dia]), children).map(lambda t: t[0](t[1]))
        return binary | unary

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def classical_eval(f, true_atoms) -> bool:
    """Truth-table semantics for the modality-free language (angles are atoms)."""
    k = f.kind
    if k == TOP:
        return True
    if k == BOT:
        return False
    if k in (ATOM, ANGLE):
        return f in true_atoms
    if k == AND:
        return classical_eval(f.left, true_atoms) and classical_eval(f.right, true_atoms)
    if k == OR:
        return classical_eval(f.left, true_atoms) or classical_eval(f.right, true_atoms)
    if k == IMP:
        return (not classical_eval(f.left, true_atoms)) or classical_eval(f.right, true_atoms)
    raise ValueError(f"modal connective in classical_eval: {print_formula(f)}")


def truth_table_valid(gamma, targets) -> bool:
    """gamma => targets[0] | ... is classically valid (brute force)."""
    ats = sorted({a for f in list(gamma) + list(targets) for a in atoms_of(f)}, key=print_formula)
    for bits in itertools.product((False, True), repeat=len(ats)):
        v = {a for a, b in zip(ats, bits) if b}
        if all(classical_eval(f, v) for f in gamma) and not any(classical_eval(t, v) for t in targets):
            return False
    return True


def kripke_eval(f, worlds, rel, val, w) -> bool:
    """Generic constructive Kripke evaluation with a preorder `le` folded into
    `worlds` as (w, successors_in_order) and modal relation `rel` (no fallible
    worlds). Used only on one-world frames here, as an independent oracle."""
    k = f.kind
    if k == TOP:
        return True
    if k == BOT:
        return False
    if k == ATOM:
        return f.name in val[w]
    if k == AND:
        return kripke_eval(f.left, worlds, rel, val, w) and kripke_eval(f.right, worlds, rel, val, w)
    if k == OR:
        return kripke_eval(f.left, worlds, rel, val, w) or kripke_eval(f.right, worlds, rel, val, w)
    if k == IMP:
        return all(
            (not kripke_eval(f.left, worlds, rel, val, v)) or kripke_eval(f.right, worlds, rel, val, v)
            for v in worlds[w]
        )
    if k == BOX:
        return all(kripke_eval(f.body, worlds, rel, val, u) for v in worlds[w] for u in rel[v])
    if k == DIA:
        return all(any(kripke_eval(f.body, worlds, rel, val, u) for u in rel[v]) for v in worlds[w])
    raise ValueError(k)


FIXED = ["K_a", "K_b", "dia_bot", "dia_or", "box_imp", "D", "D_a", "D_b", "T_a", "T_b", "4_a", "4_b",
         "B_a", "B_b", "5_a", "5_b", "c_a", "c_b", "ga", "dot2", "d1", "d2", "d3", "H", "dir", "M_dia"]


def table_one(max_n: int = 2) -> list[str]:
    names = list(FIXED)
    for n in range(max_n + 1):
        names += [f"den_{n}_a", f"den_{n}_b", f"tra_{n}_a", f"tra_{n}_b", f"bd_{n}"]
        names += [f"4_{n}_{m}_{s}" for m in range(n + 1, max_n + 2) for s in "ab"]
    names += [f"bw_{r}" for r in (1, 2)]
    names += [f"ga_{k}_{l}_{m}_{n}" for k, l, m, n in itertools.product(range(max_n + 1), repeat=4)]
    return names


@pytest.fixture(scope="session")
def CK():
    return builtin("CK")


@pytest.fixture(scope="session")
def LJ():
    return builtin("LJ")


@pytest.fixture
def rng():
    return random.Random(12345)


ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
