"""Command-line front end.

Exit codes: 0 success, 1 domain error (the error name is printed), 2 usage
error. `extract` exits 10, 11 or 12 for the Left, Right and Antecedent
branches unless --exit-zero is given."""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from typing import Sequence

from . import bench as BN
from .calculus import (
    Calculus,
    builtin,
    check_proof,
    dump_proof,
    load_calculus,
    load_proof,
    parse_sequent,
    print_sequent,
    proof_hash,
    rule,
)
from .classify import classify_formula, classify_rule, normalize_to_ck_plus_c
from .core import (
    BOT_F,
    Atom,
    Formula,
    Imp,
    LanguageTag,
    ModalProofError,
    big_and,
    parse_formula,
    print_formula,
)
from .corpus import GENERATORS, build_corpus_proof
from .extract import extract, split_conclusion
from .hornsolve import Found, unit_propagate
from .preserve import preserve
from .semantics import classify_tness
from .translate import harrop_decompose, subst_s, trans_t

BRANCH_EXIT = {"Left": 10, "Right": 11, "Antecedent": 12}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Inputs


def load_calc(arg: str) -> Calculus:
    """A catalog name (CK, IK, CK+T_a,4_a, ...) or a JSON calculus file."""
    if os.path.exists(arg):
        return load_calculus(arg)
    return builtin(arg)


_HORN_LINE = re.compile(r"^\s*([\w<>]+(?:\s+[\w<>]+)*)?\s*(?:->\s*([\w<>]+))?\s*$")


def _horn_atom(tok: str) -> Formula:
    if tok in ("bot", "⊥", "false"):
        return BOT_F
    return parse_formula(tok) if tok.startswith("<") else Atom(tok)


def parse_horn_line(line: str) -> Formula | None:
    """`b1 b2 -> h` (a unit when bare) or any formula of the native grammar."""
    line = line.split("#", 1)[0].strip()
    if not line:
        return None
    m = _HORN_LINE.match(line)
    if m and (m.group(1) or m.group(2)):
        body, head = m.group(1), m.group(2)
        if head is None:
            toks = body.split()
            if len(toks) != 1:
                raise UsageError(f"unit line with several atoms: {line!r}")
            return _horn_atom(toks[0])
        if body is None:
            raise UsageError(f"clause without body: {line!r}")
        return Imp(big_and([_horn_atom(t) for t in body.split()]), _horn_atom(head))
    return parse_formula(line)


def read_horn_file(path: str) -> list[Formula]:
    with open(path, encoding="utf-8") as fh:
        return [f for f in (parse_horn_line(x) for x in fh) if f is not None]


def _split_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def parse_ladder(text: str) -> list[int]:
    """`16..1024` (doubling) or a comma list."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return BN.doubling_ladder(int(lo), int(hi))
    return [int(x) for x in _split_list(text)]


# ---------------------------------------------------------------------------
# Output


class Out:
    def __init__(self, as_json: bool, timestamp: bool):
        self.as_json = as_json
        self.timestamp = timestamp

    def emit(self, report: dict, lines: Sequence[str]) -> None:
        if self.as_json:
            if self.timestamp:
                report = {**report, "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
            print(json.dumps(report, sort_keys=True, ensure_ascii=False))
        else:
            for line in lines:
                print(line)


def _write_proof(pi, path: str | None) -> dict:
    if path is None:
        return {}
    dump_proof(pi, path)
    return {"path": path, "hash": proof_hash(pi)}


# ---------------------------------------------------------------------------
# Verbs


def cmd_check(a, out: Out) -> int:
    g = load_calc(a.calculus)
    if a.generate:
        name, _, n = a.generate.partition(":")
        pi = build_corpus_proof(name, int(n or 1))
        if a.out:
            _write_proof(pi, a.out)
    elif a.proof:
        pi = load_proof(a.proof)
    else:
        raise UsageError("check needs --proof or --generate")
    assumptions = [parse_sequent(s) for s in a.assume or []]
    v = check_proof(g, pi, assumptions)
    rep = {"verdict": "Valid" if v.ok else "Invalid", "conclusion": print_sequent(pi.conclusion)}
    if not v.ok:
        rep.update({"path": list(v.path), "reason": v.reason})
    out.emit(rep, [str(v)])
    return 0 if v.ok else 1


def cmd_classify(a, out: Out) -> int:
    if a.formula:
        f = parse_formula(a.formula)
        v = classify_formula(f)
        d = v.as_dict()
        names = [k for k in ("basic", "almostPositive", "constructive", "harrop", "modalHorn", "implicationalHorn") if d[k]]
        out.emit({"formula": print_formula(f), **d}, [print_formula(f) + ": " + (", ".join(names) or "none")])
        return 0
    if a.conclusion:
        r = rule(a.name, a.premise or [], a.conclusion)
        v = classify_rule(r)
        out.emit({"rule": r.to_json(), "kind": v.kind, "reason": v.reason, "constructive": v.constructive}, [str(v)])
        return 0
    if a.calculus:
        g = load_calc(a.calculus)
        nf = normalize_to_ck_plus_c(g)
        axs = [print_formula(x) for x in nf.cset]
        out.emit({"calculus": g.name, "constructive": True, "axioms": axs},
                 [f"{g.name}: constructive; {nf.calculus.name}"] + axs)
        return 0
    raise UsageError("classify needs --formula, --conclusion or --calculus")


def _lang(text: str | None) -> LanguageTag:
    if text is None:
        return LanguageTag.Full
    for t in LanguageTag:
        if t.value == text or t.name == text:
            return t
    raise UsageError(f"unknown language {text}")


def cmd_tclass(a, out: Out) -> int:
    if a.calculus:
        g = load_calc(a.calculus)
        cset, lang = g.axioms(), g.lang
    elif a.axioms is not None:
        cset = [parse_formula(x) for x in a.axioms]
        lang = _lang(a.lang)
    else:
        raise UsageError("tclass needs --calculus or --axiom")
    v = classify_tness(cset, lang)
    out.emit(v.as_dict(), [str(v)])
    return 0


def cmd_translate(a, out: Out) -> int:
    f = parse_formula(a.formula)
    if a.mode == "t":
        r = trans_t(f)
        out.emit({"mode": "t", "result": print_formula(r)}, [print_formula(r)])
        return 0
    if a.mode == "s":
        r = subst_s(f)
        out.emit({"mode": "s", "result": print_formula(r)}, [print_formula(r)])
        return 0
    dec = harrop_decompose(f)
    files = {}
    if a.out_dir:
        os.makedirs(a.out_dir, exist_ok=True)
        for key in ("derivation_proof", "equivalence_proof", "to_formula_proof", "from_formula_proof"):
            files[key] = _write_proof(getattr(dec, key), os.path.join(a.out_dir, key.replace("_proof", "") + ".json"))
    members = [print_formula(x) for x in dec.gamma_a]
    out.emit({"mode": "harrop", "gamma": members, "files": files}, members)
    return 0


def cmd_preserve(a, out: Out) -> int:
    g = load_calc(a.calculus)
    pi = load_proof(a.proof)
    res = preserve(g, pi)
    members = [print_formula(x) for x in res.sigma_pi]
    files = {}
    if a.out_dir:
        os.makedirs(a.out_dir, exist_ok=True)
        with open(os.path.join(a.out_dir, "sigma.txt"), "w", encoding="utf-8") as fh:
            fh.write("".join(m + "\n" for m in members))
        files["translated"] = _write_proof(res.translated_proof, os.path.join(a.out_dir, "translated.json"))
        files["discharge"] = _write_proof(res.discharge_proof, os.path.join(a.out_dir, "discharge.json"))
    out.emit({"sigma": members, "files": files}, members)
    return 0


def cmd_horn(a, out: Out) -> int:
    gamma = read_horn_file(a.input)
    targets = [_horn_atom(t) for t in _split_list(a.targets)]
    kernel = None
    if a.kernel == "python":
        from ._hornpy import propagate as kernel
    r = unit_propagate(gamma, targets, kernel=kernel)
    if isinstance(r, Found):
        info = _write_proof(r.proof, a.out)
        t = print_formula(r.target)
        lines = [t] + ([a.out] if a.out else [])
        out.emit({"result": "Found", "index": r.index, "target": t, **({"proof": info} if info else {})}, lines)
        return 0
    val = sorted(print_formula(x) for x in r.valuation)
    out.emit({"result": "NotValid", "valuation": val}, ["NotValid: {" + ", ".join(val) + "}"])
    return 0


def cmd_extract(a, out: Out) -> int:
    g = load_calc(a.calculus)
    pi = load_proof(a.proof)
    imps = None
    if a.split:
        with open(a.split, encoding="utf-8") as fh:
            imps = [parse_formula(x) for x in (ln.split("#", 1)[0].strip() for ln in fh) if x]
    inp = split_conclusion(g, pi, imps)
    res = extract(inp)
    info = _write_proof(res.proof, a.out)
    b = res.branch
    rep = {
        "branch": b.kind,
        "formula": print_formula(b.formula),
        "index": b.index,
        "conclusion": print_sequent(res.proof.conclusion),
        **({"proof": info} if info else {}),
    }
    out.emit(rep, [str(b), print_sequent(res.proof.conclusion)])
    return 0 if a.exit_zero else BRANCH_EXIT[b.kind]


def cmd_bench(a, out: Out) -> int:
    kw = {}
    if a.ladder:
        kw["sizes"] = parse_ladder(a.ladder)
    if a.target == "kernels":
        rep = BN.bench_kernels(**kw)
        lines = [f"kernel in use: {rep['kernel']}"]
        for row in rep["rows"]:
            lines.append(f"size {row['size']}: python {row['python']:.2e}s"
                         + (f", cython {row['cython']:.2e}s, speedup {row['speedup']:.1f}x" if "cython" in row else ""))
        out.emit(rep, lines)
        return 0
    if a.target == "extract":
        r = BN.bench_extract(reps=a.reps, **kw)
    elif a.target == "horn":
        kernel = None
        if a.kernel == "python":
            from ._hornpy import propagate as kernel
        r = BN.bench_horn(reps=a.reps, kernel=kernel, **kw)
    else:
        r = BN.bench_preserve(**kw)
    lines = [f"{x:>8} {y:.6g}" for x, y in r.ladder]
    lines.append(f"fitted degree {r.fitted_degree:.3f} (bound {r.bound}): {'pass' if r.passed else 'FAIL'}")
    out.emit(r.as_dict(), lines)
    return 0 if r.passed else 1


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="modalproof", description="Proof checking, translation and extraction for intuitionistic modal sequent calculi.")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--timestamp", action="store_true", help="add a timestamp to JSON reports")
    # The global flags are also accepted after the verb.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--timestamp", action="store_true", default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="verb", required=True)

    c = sub.add_parser("check", parents=[common], help="check a proof")
    c.add_argument("--calculus", required=True)
    c.add_argument("--proof")
    c.add_argument("--generate", help=f"GENERATOR:N, one of {', '.join(sorted(GENERATORS))}")
    c.add_argument("--out", help="write the generated proof here")
    c.add_argument("--assume", action="append", help="an assumption sequent (repeatable)")

    c = sub.add_parser("classify", parents=[common], help="classify a formula, a rule or a calculus")
    c.add_argument("--formula")
    c.add_argument("--name", default="R")
    c.add_argument("--premise", action="append", help="premise meta-sequent (repeatable)")
    c.add_argument("--conclusion", help="conclusion meta-sequent")
    c.add_argument("--calculus")

    c = sub.add_parser("tclass", parents=[common], help="T-free / T-full classification")
    c.add_argument("--calculus")
    c.add_argument("--axiom", dest="axioms", action="append")
    c.add_argument("--lang")

    c = sub.add_parser("translate", parents=[common], help="the t translation, the s substitution or a Harrop decomposition")
    c.add_argument("--formula", required=True)
    c.add_argument("--mode", choices=("t", "s", "harrop"), default="t")
    c.add_argument("--out-dir")

    c = sub.add_parser("preserve", parents=[common], help="side multiset and proofs for a proof")
    c.add_argument("--calculus", required=True)
    c.add_argument("--proof", required=True)
    c.add_argument("--out-dir")

    c = sub.add_parser("horn", parents=[common], help="unit propagation on a Horn file")
    c.add_argument("--input", required=True)
    c.add_argument("--targets", required=True, help="comma-separated target atoms")
    c.add_argument("--out", help="write the proof here")
    c.add_argument("--kernel", choices=("default", "python"), default="default")

    c = sub.add_parser("extract", parents=[common], help="extract a branch from a proof of ... => C | D")
    c.add_argument("--calculus", required=True)
    c.add_argument("--proof", required=True)
    c.add_argument("--split", help="file listing the implications A -> B, one per line")
    c.add_argument("--out", help="write the extracted proof here")
    c.add_argument("--exit-zero", action="store_true", help="exit 0 instead of the branch code")

    c = sub.add_parser("bench", parents=[common], help="scaling ladders")
    c.add_argument("target", choices=("extract", "horn", "preserve", "kernels"))
    c.add_argument("--ladder", help="LO..HI (doubling) or a comma list")
    c.add_argument("--reps", type=int, default=1)
    c.add_argument("--kernel", choices=("default", "python"), default="default")
    return p


VERBS = {
    "check": cmd_check,
    "classify": cmd_classify,
    "tclass": cmd_tclass,
    "translate": cmd_translate,
    "preserve": cmd_preserve,
    "horn": cmd_horn,
    "extract": cmd_extract,
    "bench": cmd_bench,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    out = Out(a.json, a.timestamp)
    try:
        return VERBS[a.verb](a, out)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except ModalProofError as e:
        name = type(e).__name__
        if out.as_json:
            print(json.dumps({"error": name, "code": getattr(e, "code", name), "message": str(e)}, sort_keys=True))
        else:
            print(f"{name}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
