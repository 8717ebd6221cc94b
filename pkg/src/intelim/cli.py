"""Command-line front end.

Exit codes: 0 success or provable, 1 refuted or invalid (certificate on
stdout), 2 usage or parse error, 3 search budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys

from .formula import STANDARD, ParseError, SchemaError, parse_formula, render_formula
from .nd import check_derivation, derivation_from_json, derivation_to_json, render_derivation
from .normalize import NormalizationError, atomize_classical, normalize
from .prover import (
    BudgetExhausted, Provable, RefutedClassical, RefutedIntuitionistic, SearchBudget, Unprovable, decide,
)
from .rulegen import (
    MULTI, SINGLE, TruthTable, load_ruleset, nd_rule_display, rule_display, ruleset_for_connective,
    ruleset_to_json,
)
from .semantics import (
    SemanticsError, KripkeModel, admissible_readings, find_classical_refutation, find_kripke_countermodel,
    find_refuting_valuation, kripke_forces, kripke_refutes, load_matrix,
)
from .sequent import check_proof, parse_sequent, proof_from_json, proof_to_json, render_proof
from .translate import TranslationError, classical_shift, classical_unshift, nd_to_sequent, sequent_to_nd

OK, REFUTED, USAGE, BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _emit(obj, pretty_text: str | None, args) -> None:
    if args.pretty and pretty_text is not None:
        print(pretty_text)
    else:
        print(json.dumps(obj, indent=2 if args.pretty else None, sort_keys=True))


def _read_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _sig(rs):
    return STANDARD.union(rs.signature)


def _verdict_json(v) -> dict:
    return {"ok": v.ok, "path": list(v.path) if v.path is not None else None, "reason": v.reason}


def _result(res, sig, seq, calc) -> tuple[dict, int, str | None]:
    base = {"sequent": seq.render(sig), "calculus": calc}
    if isinstance(res, Provable):
        return ({**base, "result": "provable", "proof": proof_to_json(res.proof, sig)}, OK,
                render_proof(res.proof, sig))
    if isinstance(res, RefutedClassical):
        v = {k: bool(x) for k, x in res.valuation.items()}
        return {**base, "result": "refuted", "certificate": {"kind": "valuation", "valuation": v}}, REFUTED, None
    if isinstance(res, RefutedIntuitionistic):
        cert = {"kind": "kripke", "model": res.model.to_json(), "world": res.world}
        return {**base, "result": "refuted", "certificate": cert}, REFUTED, None
    if isinstance(res, Unprovable):
        cert = {"kind": "exhausted-search", "reason": res.reason, "goals": res.goals,
                "fixpoint_checked": res.fixpoint_checked}
        return {**base, "result": "unprovable", "certificate": cert}, REFUTED, None
    assert isinstance(res, BudgetExhausted)
    return {**base, "result": "budget-exhausted", "expanded": res.expanded}, BUDGET, None


# --------------------------------------------------------------------------
# subcommands


def cmd_gen_rules(args) -> int:
    t = TruthTable.from_json(_read_json(args.connective))
    rs = ruleset_for_connective(t, single=args.single, nd=args.nd)
    out = ruleset_to_json(rs)
    out["display"] = {"sequent": [rule_display(r, rs.signature) for r in rs.sequent_rules],
                      "nd": [nd_rule_display(r, rs.signature) for r in rs.nd_rules]}
    _emit(out, None, args)
    return OK


def cmd_check_sequent(args) -> int:
    rs = load_ruleset(args.calculus)
    p = proof_from_json(_read_json(args.proof), _sig(rs))
    v = check_proof(p, rs)
    _emit(_verdict_json(v), str(v), args)
    return OK if v.ok else REFUTED


def cmd_check_nd(args) -> int:
    rs = load_ruleset(args.calculus)
    d = derivation_from_json(_read_json(args.derivation), _sig(rs))
    v = check_derivation(d, rs)
    _emit(_verdict_json(v), str(v), args)
    return OK if v.ok else REFUTED


def cmd_prove(args) -> int:
    rs = load_ruleset(args.calculus)
    sig = _sig(rs)
    s = parse_sequent(args.sequent, sig)
    budget = SearchBudget(args.budget) if args.budget else SearchBudget.from_env()
    obj, code, text = _result(decide(s, rs, budget), sig, s, rs.name)
    _emit(obj, text, args)
    return code


def cmd_countermodel(args) -> int:
    rs = load_ruleset(args.calculus)
    sig = _sig(rs)
    s = parse_sequent(args.sequent, sig)
    base = {"sequent": s.render(sig), "calculus": rs.name}
    if rs.regime == SINGLE:
        for reading in admissible_readings(rs.sequent_rules):
            model = find_kripke_countermodel(s, reading)
            if model is not None:
                cert = {"kind": "kripke", "model": model.to_json(), "world": kripke_refutes(model, s)}
                _emit({**base, "result": "refuted", "certificate": cert}, None, args)
                return REFUTED
    else:
        v = find_classical_refutation(s)
        if v is not None:
            cert = {"kind": "valuation", "valuation": {k: bool(x) for k, x in sorted(v.items())}}
            _emit({**base, "result": "refuted", "certificate": cert}, None, args)
            return REFUTED
    _emit({**base, "result": "no-countermodel"}, None, args)
    return OK


def cmd_matrix_check(args) -> int:
    m = load_matrix(args.matrix)
    s = parse_sequent(args.sequent, STANDARD)
    v = find_refuting_valuation(m, s)
    base = {"sequent": s.render(STANDARD), "matrix": m.name}
    if v is None:
        _emit({**base, "result": "valid"}, None, args)
        return OK
    _emit({**base, "result": "refuted", "certificate": {"kind": "valuation", "valuation": v}}, None, args)
    return REFUTED


def cmd_kripke_eval(args) -> int:
    model = KripkeModel.from_json(_read_json(args.model))
    f = parse_formula(args.formula, STANDARD)
    worlds = [args.world] if args.world else list(model.worlds)
    for w in worlds:
        if w not in model.worlds:
            raise UsageError(f"unknown world {w!r}")
    forced = {w: kripke_forces(model, w, f) for w in worlds}
    _emit({"formula": args.formula, "forces": forced}, None, args)
    return OK if all(forced.values()) else REFUTED


def _is_derivation(data: dict) -> bool:
    return "assume" in data or "conclusion" in data


def cmd_translate(args) -> int:
    data = _read_json(args.proof)
    delta = [x for x in (args.delta or "").split(",") if x.strip()]
    if args.to == "nd":
        rs = load_ruleset(args.calculus or "NSC")
        sig = _sig(rs)
        if _is_derivation(data):
            raise UsageError("input is already a derivation")
        d = sequent_to_nd(proof_from_json(data, sig), rs)
        _emit(derivation_to_json(d, sig), render_derivation(d, sig), args)
        return OK
    if args.to == "sequent":
        rs = load_ruleset(args.calculus or "NSC")
        sig = _sig(rs)
        if not _is_derivation(data):
            raise UsageError("input is not a derivation; use --to multi or --to single for the classical shift")
        p = nd_to_sequent(derivation_from_json(data, sig), rs)
        _emit(proof_to_json(p, sig), render_proof(p, sig), args)
        return OK
    if _is_derivation(data):
        raise UsageError("the classical shift takes a sequent proof")
    if args.to == "multi":
        rs = load_ruleset(args.calculus or "LS-single-classical")
        sig = _sig(rs)
        p = classical_shift(proof_from_json(data, sig), [parse_formula(x, sig) for x in delta], rs)
    else:
        rs = load_ruleset(args.calculus or "LS")
        if rs.regime != MULTI:
            raise UsageError("--to single expects a multi-succedent source calculus")
        sig = _sig(rs)
        p = proof_from_json(data, sig)
        chosen = [parse_formula(x, sig) for x in delta]
        rest = list(p.conclusion.succ)
        for f in chosen:
            if f not in rest:
                raise UsageError(f"{render_formula(f, sig)} is not in the succedent")
            rest.remove(f)
        p = classical_unshift(p, chosen, rest, rs)
    _emit(proof_to_json(p, sig), render_proof(p, sig), args)
    return OK


def _load_derivation(args):
    rs = load_ruleset(args.calculus)
    sig = _sig(rs)
    d = derivation_from_json(_read_json(args.derivation), sig)
    v = check_derivation(d, rs)
    if not v.ok:
        _emit(_verdict_json(v), str(v), args)
        return None, rs, sig
    return d, rs, sig


def cmd_normalize(args) -> int:
    d, rs, sig = _load_derivation(args)
    if d is None:
        return REFUTED
    out = normalize(d, rs if rs.nd_rules else None, cap=args.cap)
    _emit(derivation_to_json(out, sig), render_derivation(out, sig), args)
    return OK


def cmd_atomize(args) -> int:
    d, rs, sig = _load_derivation(args)
    if d is None:
        return REFUTED
    out = atomize_classical(d, rs)
    _emit(derivation_to_json(out, sig), render_derivation(out, sig), args)
    return OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="intelim", description=__doc__.splitlines()[0])
    ap.add_argument("--pretty", action="store_true", help="human-readable output")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-rules", help="synthesize rules from a truth-table file")
    p.add_argument("connective")
    p.add_argument("--single", action="store_true")
    p.add_argument("--nd", action="store_true")
    p.set_defaults(fn=cmd_gen_rules)

    p = sub.add_parser("check-sequent", help="check a sequent proof")
    p.add_argument("proof")
    p.add_argument("--calculus", required=True)
    p.set_defaults(fn=cmd_check_sequent)

    p = sub.add_parser("check-nd", help="check a natural-deduction derivation")
    p.add_argument("derivation")
    p.add_argument("--calculus", required=True)
    p.set_defaults(fn=cmd_check_nd)

    p = sub.add_parser("prove", help="search for a proof or a countermodel")
    p.add_argument("sequent")
    p.add_argument("--calculus", required=True)
    p.add_argument("--budget", type=int)
    p.set_defaults(fn=cmd_prove)

    p = sub.add_parser("countermodel", help="look for a countermodel without proof search")
    p.add_argument("sequent")
    p.add_argument("--calculus", required=True)
    p.set_defaults(fn=cmd_countermodel)

    p = sub.add_parser("matrix-check", help="check a sequent against a finite matrix")
    p.add_argument("sequent")
    p.add_argument("--matrix", required=True)
    p.set_defaults(fn=cmd_matrix_check)

    p = sub.add_parser("kripke-eval", help="evaluate a formula in a Kripke model")
    p.add_argument("model")
    p.add_argument("formula")
    p.add_argument("--world")
    p.set_defaults(fn=cmd_kripke_eval)

    p = sub.add_parser("translate", help="translate between proof formats")
    p.add_argument("proof")
    p.add_argument("--to", required=True, choices=["nd", "sequent", "multi", "single"])
    p.add_argument("--delta", help="comma-separated formulas to shift across the turnstile")
    p.add_argument("--calculus")
    p.set_defaults(fn=cmd_translate)

    for name, fn in (("normalize", cmd_normalize), ("atomize", cmd_atomize)):
        p = sub.add_parser(name)
        p.add_argument("derivation")
        p.add_argument("--calculus", default="NSC")
        if name == "normalize":
            p.add_argument("--cap", type=int, default=100_000)
        p.set_defaults(fn=fn)
    return ap


def run(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        return args.fn(args)
    except (UsageError, ParseError, SchemaError, json.JSONDecodeError, OSError, KeyError, SemanticsError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except TranslationError as e:
        print(f"invalid: {e}", file=sys.stderr)
        return REFUTED
    except NormalizationError as e:
        print(f"normalization failed: {e}", file=sys.stderr)
        return REFUTED
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE


def main() -> None:
    sys.exit(run())
