"""Search for an (N=47, K=3) scene on which Gaussian-pulse BP misses every true cell.

The first such seed is frozen as the classical-failure fixture in the tests.
"""

import argparse

from csradar.harness import run_classical_l1_failure


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=47)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--start", type=int, default=0)
    ap.add_argument("--stop", type=int, default=200)
    args = ap.parse_args()

    for seed in range(args.start, args.stop):
        res = run_classical_l1_failure(args.n, args.k, seed=seed)
        print(f"seed {seed}: pulse hits {res.pulse_hits}/{args.k}, "
              f"pulse error {res.pulse_error:.3g}, alltop error {res.alltop_error:.2g}", flush=True)
        if res.pulse_hits == 0 and res.alltop_error <= 1e-4:
            print(f"fixture seed = {seed}")
            return 0
    print("no fixture seed found in range")
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
