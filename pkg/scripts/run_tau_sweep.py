"""Tolerance sweep on a synthetic task corpus.

Outputs mix copied input tokens, a Zipfian task vocabulary and rare noise
tokens, which is the regime where tolerance filtering pays off. Prints the
stage ladder per tau, the impacted fraction, and the per-instance
vocabulary line.

    python scripts/run_tau_sweep.py --docs 2000 --vocab 32000
"""
import argparse
import random

import numpy as np

from hybridvocab import FilterConfig, Document, batch_stats, build_static, coverage, profile, select
from hybridvocab.subhead import memory_report


def synthetic_corpus(n_docs, vocab, seed):
    rng = random.Random(seed)
    nrng = np.random.default_rng(seed)
    task = rng.sample(range(vocab), 3000)
    for i in range(n_docs):
        inp = rng.sample(range(vocab), rng.randint(40, 200))
        copied = rng.choices(inp, k=rng.randint(5, 25))
        ranks = nrng.zipf(1.3, size=rng.randint(3, 15))
        core = [task[r % len(task)] for r in ranks]
        noise = [rng.randrange(vocab) for _ in range(rng.random() < 0.2)]
        yield Document(inp, copied + core + noise, i)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--docs", type=int, default=2000)
    ap.add_argument("--vocab", type=int, default=32000)
    ap.add_argument("--d", type=int, default=2048)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--taus", type=float, nargs="+", default=[0, 0.01, 0.02, 0.1])
    ap.add_argument("--input-filter", choices=("corpus", "per_example", "both"), default="both")
    args = ap.parse_args()

    docs = list(synthetic_corpus(args.docs, args.vocab, args.seed))
    p = profile(docs, args.vocab)
    print(f"M={p.M}  |I|={len(p.input_union)}  |O|={len(p.output_union)}")
    modes = ("corpus", "per_example") if args.input_filter == "both" else (args.input_filter,)
    for mode in modes:
        print(f"\ninput filter: {mode}")
        print(f"{'tau':>6} {'|V|':>7} {'|V1|':>7} {'|V2|':>7} {'|T|':>7} {'impacted':>9} {'uncovered':>9}"
              f"  {'vocabulary':<24} saved")
        for tau in args.taus:
            sv = build_static(p, FilterConfig(tau=tau, input_filter=mode))
            rep = coverage(docs, sv, args.vocab, profiling=True)
            stats = batch_stats(select(d.input_ids, sv, args.vocab) for d in docs)
            mem = memory_report(args.vocab, args.d, 2, round(stats.n_static + stats.mean_dynamic))
            v, v1, v2, t = sv.stage_sizes
            print(f"{tau:>6} {v:>7} {v1:>7} {v2:>7} {t:>7} {rep.impacted_fraction:>9.4f} "
                  f"{rep.uncovered_fraction:>9.4f}  {stats.line:<24} {float(mem.saved_fraction):.4f}")


if __name__ == "__main__":
    main()
