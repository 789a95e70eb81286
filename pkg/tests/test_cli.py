import json

import pytest

from modalproof import build as B
from modalproof.calculus import builtin, check_proof, dump_calculus, dump_proof, load_proof
from modalproof.cli import main
from modalproof.core import BOT_F, EMPTY, Atom, Imp, parse_formula

p, q, r = Atom("p"), Atom("q"), Atom("r")


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def write(tmp_path, name, pi):
    path = str(tmp_path / name)
    dump_proof(pi, path)
    return path


def test_check_generate_and_reload(tmp_path, capsys):
    out = str(tmp_path / "g.json")
    code, text, _ = run(capsys, "check", "--calculus", "CK", "--generate", "nested-and:3", "--out", out)
    assert code == 0 and "Valid" in text
    code, text, _ = run(capsys, "--json", "check", "--calculus", "CK", "--proof", out)
    assert code == 0 and json.loads(text)["verdict"] == "Valid"


def test_check_invalid_and_calculus_file(tmp_path, capsys):
    path = write(tmp_path, "k.json", B.kbox(B.idp(EMPTY, p)))
    calc = str(tmp_path / "lj.json")
    dump_calculus(builtin("LJ"), calc)
    code, text, _ = run(capsys, "check", "--calculus", calc, "--proof", path, "--json")
    assert code == 1 and json.loads(text)["verdict"] == "Invalid"


def test_check_with_assumption(tmp_path, capsys):
    from modalproof.calculus import hypothesis
    from modalproof.core import parse_sequent

    path = write(tmp_path, "h.json", hypothesis(0, parse_sequent("p => q")))
    assert run(capsys, "check", "--calculus", "CK", "--proof", path)[0] == 1
    assert run(capsys, "check", "--calculus", "CK", "--proof", path, "--assume", "p => q")[0] == 0


def test_classify_verbs(capsys):
    code, text, _ = run(capsys, "--json", "classify", "--formula", "box p -> q")
    d = json.loads(text)
    assert code == 0 and d["constructive"] and not d["basic"]
    code, text, _ = run(capsys, "--json", "classify", "--conclusion", "G => p | ~p")
    assert json.loads(text)["constructive"] is False
    code, text, _ = run(capsys, "--json", "classify", "--calculus", "CKT4")
    assert code == 0 and json.loads(text)["axioms"]


def test_tclass(capsys):
    code, text, _ = run(capsys, "--json", "tclass", "--calculus", "CKD")
    assert json.loads(text)["kind"] == "Neither"
    code, text, _ = run(capsys, "--json", "tclass", "--axiom", "box p -> p", "--axiom", "p -> dia p")
    assert json.loads(text)["kind"] == "TFull"


def test_translate(tmp_path, capsys):
    code, text, _ = run(capsys, "translate", "--formula", "box p", "--mode", "s")
    assert code == 0 and text.strip()
    d = tmp_path / "h"
    code, text, _ = run(capsys, "--json", "translate", "--formula", "box p & (q -> r)", "--mode", "harrop", "--out-dir", str(d))
    assert code == 0
    for name in ("derivation", "equivalence", "to_formula", "from_formula"):
        assert check_proof(builtin("CK"), load_proof(str(d / f"{name}.json"))).ok


def test_preserve_writes_files(tmp_path, capsys):
    path = write(tmp_path, "pi.json", B.rand(B.idp(EMPTY, p), B.idp(EMPTY, p)))
    d = tmp_path / "out"
    code, _, _ = run(capsys, "preserve", "--calculus", "CK", "--proof", path, "--out-dir", str(d))
    assert code == 0
    assert (d / "sigma.txt").exists() and (d / "translated.json").exists() and (d / "discharge.json").exists()


def test_horn(tmp_path, capsys):
    f = tmp_path / "g.horn"
    f.write_text("# chain\np\np -> q\nq r -> s\n")
    out = str(tmp_path / "proof.json")
    code, text, _ = run(capsys, "horn", "--input", str(f), "--targets", "s,q", "--out", out)
    assert code == 0 and text.splitlines()[0] == "q"
    assert check_proof(builtin("LJ"), load_proof(out)).ok
    code, text, _ = run(capsys, "--json", "horn", "--input", str(f), "--targets", "s", "--kernel", "python")
    assert json.loads(text) == {"result": "NotValid", "valuation": ["p", "q"]}


@pytest.mark.parametrize(
    "pi,split,expected",
    [
        (B.ror1(B.rtop(EMPTY), BOT_F), None, 10),
        (B.ror2(B.idp(EMPTY, Imp(p, q)), p), None, 11),
    ],
)
def test_extract_exit_codes(tmp_path, capsys, pi, split, expected):
    path = write(tmp_path, "pi.json", pi)
    assert run(capsys, "extract", "--calculus", "CK", "--proof", path)[0] == expected
    assert run(capsys, "extract", "--calculus", "CK", "--proof", path, "--exit-zero")[0] == 0


def test_extract_antecedent(tmp_path, capsys):
    th = B.rimp(B.idp(EMPTY, p), p)
    pi = B.limp(th, B.idp(EMPTY, parse_formula("c | d")), parse_formula("c | d"))
    path = write(tmp_path, "pi.json", pi)
    split = tmp_path / "split.txt"
    split.write_text("(p -> p) -> c | d\n")
    out = str(tmp_path / "res.json")
    code, text, _ = run(capsys, "--json", "extract", "--calculus", "CK", "--proof", path, "--split", str(split), "--out", out)
    assert code == 12 and json.loads(text)["index"] == 1
    assert check_proof(builtin("CK"), load_proof(out)).ok


def test_bench_verbs(capsys):
    code, text, _ = run(capsys, "--json", "bench", "extract", "--ladder", "16..64")
    assert code == 0 and json.loads(text)["pass"]
    code, text, _ = run(capsys, "--json", "bench", "kernels", "--ladder", "128,256")
    assert len(json.loads(text)["rows"]) == 2


def test_json_is_deterministic(tmp_path, capsys):
    path = write(tmp_path, "pi.json", B.ror1(B.rtop(EMPTY), BOT_F))
    a = run(capsys, "--json", "extract", "--calculus", "CK", "--proof", path)[1]
    b = run(capsys, "extract", "--calculus", "CK", "--proof", path, "--json")[1]
    assert a == b
    c = run(capsys, "--json", "--timestamp", "extract", "--calculus", "CK", "--proof", path)[1]
    assert "timestamp" in json.loads(c)


def test_error_exit_codes(tmp_path, capsys):
    path = write(tmp_path, "pi.json", B.idp(EMPTY, p))
    code, _, err = run(capsys, "check", "--calculus", "NOPE", "--proof", path)
    assert code == 1 and err
    code, _, _ = run(capsys, "check", "--calculus", "CK", "--proof", str(tmp_path / "missing.json"))
    assert code == 2
    code, text, _ = run(capsys, "--json", "extract", "--calculus", "CK", "--proof", path)
    assert code == 1 and json.loads(text)["error"] == "MalformedConclusion"
    assert run(capsys, "check", "--calculus", "CK")[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2
