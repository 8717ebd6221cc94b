"""Normalize a redex corpus and report step counts and size changes."""
import argparse
import statistics
import time

from intelim.corpus import redex_corpus
from intelim.nd import size
from intelim.normalize import _pick, default_rules, maximal_occurrences, reduce_at


def steps_to_normal(d, rs, cap=10_000):
    n = 0
    while True:
        occs = maximal_occurrences(d, rs)
        if not occs:
            return d, n
        d = reduce_at(d, _pick(occs), rs)  # the occurrence normalize would take
        n += 1
        if n > cap:
            raise RuntimeError("no normal form within the cap")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rs = default_rules()
    t0 = time.perf_counter()
    corpus = redex_corpus(args.n, seed=args.seed)
    print(f"{len(corpus)} redex derivations ({time.perf_counter() - t0:.1f}s)")
    steps, before, after = [], [], []
    for d in corpus:
        out, k = steps_to_normal(d, rs)
        steps.append(k)
        before.append(size(d))
        after.append(size(out))
    print(f"steps: median {statistics.median(steps)}, max {max(steps)}")
    print(f"size before: median {statistics.median(before)}, after: median {statistics.median(after)}")
    print(f"grew: {sum(a > b for a, b in zip(after, before))}, shrank: {sum(a < b for a, b in zip(after, before))}")


if __name__ == "__main__":
    main()
