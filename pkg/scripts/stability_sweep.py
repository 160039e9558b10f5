"""Entrywise-BPDN stability at N=47, K=2 across SNR levels.

For each seed the noise bound is the realized max |e_n|; a trial counts as admissible when
K stays below the stability bound for that bound and T.
"""

import argparse

import numpy as np

from csradar.bounds import thm3_bound
from csradar.gabor import build_dictionary
from csradar.scenes import NoiseSpec, awgn, random_scene, vectorize
from csradar.solvers import bpdn_entrywise
from csradar.tfcore import alltop_sequence


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=47)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--snr", type=float, nargs="+", default=[30.0, 35.0, 40.0, 50.0])
    args = ap.parse_args()

    d = build_dictionary(alltop_sequence(args.n))
    print("snr_db,admissible,within_t,median_l1_error,max_l1_error")
    for snr in args.snr:
        admissible = within = 0
        errs = []
        for seed in range(args.seeds):
            s = vectorize(random_scene(args.n, args.k, seed))
            y0 = d.apply(s)
            e = awgn(y0, NoiseSpec(snr, seed))
            eps = float(np.max(np.abs(e)))
            admissible += args.k < thm3_bound(args.n, eps, args.t)
            err = float(np.sum(np.abs(bpdn_entrywise(d, y0 + e, eps).solution - s)))
            within += err <= args.t
            errs.append(err)
        print(f"{snr},{admissible},{within},{np.median(errs):.4f},{max(errs):.4f}", flush=True)


if __name__ == "__main__":
    main()
