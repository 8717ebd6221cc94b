"""Print the synthesized sequent and natural-deduction rules of a builtin calculus."""
import argparse

from intelim.rulegen import BUILTIN_NAMES, builtin_ruleset, nd_rule_display, rule_display


def show_sequent_rule(r) -> str:
    d = rule_display(r)
    prems = "   ".join(f"{', '.join(a)} => {', '.join(s)}" for a, s in d["premises"]) or "(axiom)"
    a, s = d["conclusion"]
    return f"{d['name']:>8}:  {prems}  /  {', '.join(a)} => {', '.join(s)}"


def show_nd_rule(r) -> str:
    d = nd_rule_display(r)
    prems = []
    for p in d["premises"]:
        dis = f"[{', '.join(p['discharge'])}] " if p["discharge"] else ""
        prems.append(dis + ", ".join(p["conclusion"]))
    return f"{d['name']:>8} ({d['kind']}):  {'   '.join(prems)}  /  {', '.join(d['conclusion'])}"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("calculus", nargs="*", default=["LS", "LS-single", "NS"],
                    help=f"builtin names, joined with + to combine; known: {', '.join(BUILTIN_NAMES)}")
    args = ap.parse_args()
    for name in args.calculus:
        rs = builtin_ruleset(name)
        print(f"== {rs.name} ({rs.regime})")
        for r in rs.sequent_rules:
            print(show_sequent_rule(r))
        for r in rs.nd_rules:
            print(show_nd_rule(r))
        print()


if __name__ == "__main__":
    main()
