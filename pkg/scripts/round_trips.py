"""Translate a random corpus of prover-generated proofs both ways and report
kernel verdicts and size ratios."""
import argparse
import statistics
import time
from collections import Counter

from intelim.corpus import CorpusConfig, provable_corpus
from intelim.nd import check_derivation, open_formulas, size as nd_size
from intelim.rulegen import builtin_ruleset
from intelim.sequent import check_proof
from intelim.translate import nd_to_sequent, sequent_to_nd

PAIRS = {"LS-single": "NS", "LS-single-classical": "NSC", "LS-nor-single": "LS-nor-single",
         "LS-xor-single": "LS-xor-single"}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--calculus", default="LS-single", choices=sorted(PAIRS))
    ap.add_argument("-n", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-ops", type=int, default=12)
    args = ap.parse_args()

    rs, nd = builtin_ruleset(args.calculus), builtin_ruleset(PAIRS[args.calculus])
    conns = tuple(sorted({c for r in rs.sequent_rules for c in [r.connective] if c}))
    cfg = CorpusConfig(connectives=conns or ("nand",), seed=args.seed, max_ops=args.max_ops)
    t0 = time.perf_counter()
    corpus = provable_corpus(rs, args.n, cfg)
    print(f"{len(corpus)} proofs in {args.calculus} ({time.perf_counter() - t0:.1f}s)")

    bad, ratios, shrunk = 0, [], 0
    for s, p in corpus:
        d = sequent_to_nd(p, nd, check=False)
        q = nd_to_sequent(d, nd, check=False)
        ok = (check_derivation(d, nd) and check_proof(q, rs) and not (open_formulas(d) - Counter(s.ante))
              and q.conclusion.succ == s.succ)
        bad += not ok
        ratios.append(nd_size(d) / p.size())
        shrunk += q.conclusion != s
    print(f"kernel failures: {bad}")
    print(f"ND size / sequent size: median {statistics.median(ratios):.2f}, max {max(ratios):.2f}")
    print(f"round trips with a smaller antecedent: {shrunk}")


if __name__ == "__main__":
    main()
