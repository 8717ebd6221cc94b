import json
import subprocess
import sys

from intelim.cli import run
from intelim.rulegen import BUILTIN_TABLES


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_prove_provable(capsys):
    code, out, _ = call(capsys, "prove", "p|q => q|p", "--calculus", "LS-single")
    data = json.loads(out)
    assert code == 0 and data["result"] == "provable" and data["proof"]["rule"] == "|R'"


def test_prove_refuted_with_kripke_certificate(capsys):
    code, out, _ = call(capsys, "prove", "(p|p)|(p|p) => p", "--calculus", "LS-single")
    data = json.loads(out)
    assert code == 1 and data["certificate"]["kind"] == "kripke"


def test_prove_budget(capsys):
    code, out, _ = call(capsys, "prove", "(p|q)|(q|p) => (q|p)|(p|q)", "--calculus", "LS-single-classical",
                        "--budget", "2")
    assert code == 3 and json.loads(out)["result"] == "budget-exhausted"


def test_parse_error_is_usage(capsys):
    code, _, err = call(capsys, "prove", "p | => q", "--calculus", "LS-single")
    assert code == 2 and "error" in err
    assert call(capsys, "prove", "p => p", "--calculus", "no-such-calculus")[0] == 2
    assert call(capsys, "frobnicate")[0] == 2


def test_pretty_text(capsys):
    code, out, _ = call(capsys, "--pretty", "prove", "p => p", "--calculus", "LS-single")
    assert code == 0 and out.startswith("p => p")


def test_gen_rules(tmp_path, capsys):
    path = write(tmp_path, "nand.json", BUILTIN_TABLES["nand"].to_json())
    code, out, _ = call(capsys, "gen-rules", path, "--single", "--nd")
    data = json.loads(out)
    names = [r["name"] for r in data["display"]["nd"]]
    assert code == 0 and "|I" in names and "|E" in names


def test_check_and_translate_round_trip(tmp_path, capsys):
    _, out, _ = call(capsys, "prove", "p|q => q|p", "--calculus", "LS-single")
    proof = write(tmp_path, "proof.json", json.loads(out)["proof"])
    assert call(capsys, "check-sequent", proof, "--calculus", "LS-single")[0] == 0
    code, out, _ = call(capsys, "translate", proof, "--to", "nd", "--calculus", "NS")
    deriv = write(tmp_path, "d.json", json.loads(out))
    assert code == 0
    assert call(capsys, "check-nd", deriv, "--calculus", "NS")[0] == 0
    code, out, _ = call(capsys, "translate", deriv, "--to", "sequent", "--calculus", "NS")
    back = write(tmp_path, "back.json", json.loads(out))
    assert code == 0 and call(capsys, "check-sequent", back, "--calculus", "LS-single")[0] == 0


def test_check_rejects_bad_proof(tmp_path, capsys):
    bad = write(tmp_path, "bad.json", {"rule": "ax", "sequent": {"ante": ["p"], "succ": ["q"]}, "children": []})
    code, out, _ = call(capsys, "check-sequent", bad, "--calculus", "LS-single")
    assert code == 1 and json.loads(out)["ok"] is False


def test_classical_shift_commands(tmp_path, capsys):
    _, out, _ = call(capsys, "prove", "p|p => p|p", "--calculus", "LS-single-classical")
    proof = write(tmp_path, "p.json", json.loads(out)["proof"])
    code, out, _ = call(capsys, "translate", proof, "--to", "multi", "--delta", "p|p")
    assert code == 0
    multi = write(tmp_path, "m.json", json.loads(out))
    assert call(capsys, "check-sequent", multi, "--calculus", "LS")[0] == 0
    code, out, _ = call(capsys, "translate", multi, "--to", "single", "--delta", "p")
    assert code == 0 and json.loads(out)["sequent"] == {"ante": ["(p | p)"], "succ": ["(p | p)"]}
    assert call(capsys, "translate", multi, "--to", "single", "--delta", "q")[0] == 2


def test_countermodel_and_matrix(capsys):
    code, out, _ = call(capsys, "countermodel", "(p|p)|(p|p) => p", "--calculus", "LS-single")
    assert code == 1 and json.loads(out)["certificate"]["kind"] == "kripke"
    code, out, _ = call(capsys, "countermodel", "p => p", "--calculus", "LS")
    assert code == 0 and json.loads(out)["result"] == "no-countermodel"
    code, out, _ = call(capsys, "matrix-check", "(p|p)|(p|p) => p", "--matrix", "builtin:3val")
    assert code == 1 and json.loads(out)["certificate"]["valuation"] == {"p": "I"}
    assert call(capsys, "matrix-check", "p => p", "--matrix", "builtin:3val")[0] == 0


def test_kripke_eval(tmp_path, capsys):
    model = write(tmp_path, "m.json", {"worlds": ["a", "b"], "order": [["a", "b"]], "val": {"b": ["p"]}})
    code, out, _ = call(capsys, "kripke-eval", model, "p|p")
    assert code == 1 and json.loads(out)["forces"] == {"a": False, "b": False}
    code, out, _ = call(capsys, "kripke-eval", model, "p", "--world", "b")
    assert code == 0
    assert call(capsys, "kripke-eval", model, "p", "--world", "z")[0] == 2


def test_normalize_and_atomize(tmp_path, capsys):
    from conftest import load_golden
    g = load_golden("reductions.json")
    red = write(tmp_path, "r.json", g["stroke_redex"]["input"])
    code, out, _ = call(capsys, "normalize", red)
    assert code == 0 and json.loads(out) == g["stroke_redex"]["contractum"]
    cls = write(tmp_path, "c.json", g["classical_stroke"]["input"])
    code, out, _ = call(capsys, "atomize", cls)
    assert code == 0 and json.loads(out)["rule"] == "|I"
    assert call(capsys, "normalize", red, "--cap", "0")[0] == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "intelim", "prove", "p => p", "--calculus", "LS-single"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["result"] == "provable"
