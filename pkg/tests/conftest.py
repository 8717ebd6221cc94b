import json
import os
import re
from pathlib import Path

from hypothesis import HealthCheck, settings, strategies as st

from intelim.formula import Comp, Var
from intelim.rulegen import nd_rule_display, rule_display

settings.register_profile(
    "default", max_examples=int(os.environ.get("HYPOTHESIS_EXAMPLES", "60")), deadline=None,
    suppress_health_check=[HealthCheck.too_slow], derandomize=True)
settings.load_profile("default")

ATOMS = ("p", "q", "r", "s")
BINARY = ("nand", "hp", "nor", "xor", "and", "or", "imp")


def formulas(conns=("nand",), atoms=ATOMS, max_leaves=6):
    leaves = st.sampled_from(atoms).map(Var)
    unary = [c for c in conns if c == "not"]
    binary = [c for c in conns if c != "not"]

    def extend(inner):
        opts = []
        if binary:
            opts.append(st.tuples(st.sampled_from(binary), inner, inner).map(lambda t: Comp(t[0], (t[1], t[2]))))
        if unary:
            opts.append(inner.map(lambda a: Comp("not", (a,))))
        return st.one_of(*opts)

    return st.recursive(leaves, extend, max_leaves=max_leaves)


GOLDENS = Path(__file__).parent / "goldens"


def load_golden(name: str):
    return json.loads((GOLDENS / name).read_text())


def rename_metas(display):
    """Rename metavariables by order of first appearance, so displays compare
    up to a consistent renaming."""
    text = json.dumps(display)
    names: dict[str, str] = {}
    for m in re.findall(r"\?[A-Z][A-Za-z0-9_]*", text):
        names.setdefault(m, f"?M{len(names)}")
    return json.loads(re.sub(r"\?[A-Z][A-Za-z0-9_]*", lambda m: names[m.group(0)], text))


def seq_displays(rules):
    return {r.name: rename_metas(rule_display(r)) for r in rules}


def nd_displays(rules):
    out = {}
    for r in rules:
        d = nd_rule_display(r)
        d.pop("kind")
        out[r.name] = rename_metas(d)
    return out


def golden_by_name(entries):
    return {e["name"]: rename_metas(e) for e in entries}


# acceptance lines, filled by test_acceptance and printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    from intelim.prover import AUDIT

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
    a = AUDIT
    if a.calls:
        terminalreporter.write_line(
            f"prover audit: {a.calls} calls, {a.proofs} proofs, {a.valuations} valuations, {a.kripke} "
            f"Kripke models re-verified, {a.unverifiable} without certificate, {a.rejected} rejected")
