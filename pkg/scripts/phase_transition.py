"""Monte-Carlo phase transition of BP (or OMP) with the Alltop dictionary.

Default is the desk grid (primes up to 47, 20 trials). --full runs every prime up to 127
with 100 trials, which takes many CPU hours; set RADAR_CS_THREADS to use more cores.
"""

import argparse
import math
import sys
import time

from csradar.harness import DESK_PRIMES, FULL_PRIMES, PhaseTransitionConfig, run_phase_transition


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--full", action="store_true")
    ap.add_argument("--trials", type=int)
    ap.add_argument("--solver", choices=("bp", "omp"), default="bp")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    primes = FULL_PRIMES if args.full else DESK_PRIMES
    trials = args.trials or (100 if args.full else 20)
    cfg = PhaseTransitionConfig(primes=primes, trials=trials, solver=args.solver, base_seed=args.seed)
    t0 = time.perf_counter()
    cells = run_phase_transition(cfg)
    print("n,k,successes,trials,fraction,below_line")
    for c in cells:
        print(f"{c.n},{c.k},{c.successes},{c.trials},{c.fraction:.2f},{int(c.k <= c.n / (2 * math.log(c.n)))}")
    print(f"# {time.perf_counter() - t0:.0f}s", file=sys.stderr)


if __name__ == "__main__":
    main()
