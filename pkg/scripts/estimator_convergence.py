"""Raw versus bias-corrected estimates against the analytic entropy rate.

    python scripts/estimator_convergence.py --p-stay 0.9 --states 4 --seeds 20
"""
import argparse

import numpy as np

from seqpredict import (
    MarkovSpec,
    analytic_entropies,
    corrected_report,
    sample_markov,
    stationary_distribution,
    sticky_chain,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p-stay", type=float, default=0.9)
    ap.add_argument("--states", type=int, default=4)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--lengths", default="100,300,1000,3000,10000,50000")
    args = ap.parse_args()

    P = sticky_chain(args.states, args.p_stay)
    pi = stationary_distribution(P)
    truth = analytic_entropies(P, pi)
    print(f"analytic: h1={truth['h1_inf']:.4f} h2={truth['h2_inf']:.4f} mi={truth['mi_inf']:.4f}")
    print(f"{'n':>7} {'h2 raw':>9} {'h2 corr':>9} {'mi raw':>9} {'mi corr':>9}")
    for n in (int(x) for x in args.lengths.split(",")):
        rows = []
        for s in range(args.seeds):
            r = corrected_report(sample_markov(MarkovSpec(args.states, P, pi, n, s)))
            rows.append((r.h2, r.corrected.h2, r.mi, r.corrected.mi))
        m = np.mean(rows, axis=0)
        print(f"{n:7d} {m[0]:9.4f} {m[1]:9.4f} {m[2]:9.4f} {m[3]:9.4f}")


if __name__ == "__main__":
    main()
