"""End-to-end acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import hashlib
import math
import time

import numpy as np

from csradar.bounds import thm1_bound, thm3_bound
from csradar.classical import classical_scene_map, footprint_width
from csradar.cli import main
from csradar.gabor import build_dictionary, coherence, verify_mub_properties, welch_bound
from csradar.harness import (
    DESK_PRIMES,
    PhaseTransitionConfig,
    RadarDemoConfig,
    run_classical_l1_failure,
    run_phase_transition,
    run_radar_demo,
)
from csradar.scenes import NoiseSpec, SparseScene, Target, awgn, random_scene, scene_error, vectorize
from csradar.solvers import basis_pursuit, bpdn_entrywise, l0_oracle, omp
from csradar.tfcore import alltop_sequence, gaussian_pulse

PRIMES = (5, 7, 11, 13, 17, 23, 31, 47)
FAILURE_SEED = 33


def test_criterion_01_coherence(acceptance):
    worst = 0.0
    above = True
    for n in PRIMES:
        mu = coherence(build_dictionary(alltop_sequence(n)))
        worst = max(worst, abs(mu - 1 / math.sqrt(n)))
        above &= mu >= welch_bound(n, n * n)
    ok = worst <= 1e-9 and above
    assert acceptance(1, "Alltop coherence = 1/sqrt(N), above Welch", ok, f"max dev {worst:.2e}")


def test_criterion_02_mub(acceptance):
    reports = [verify_mub_properties(build_dictionary(alltop_sequence(n)), 1e-10) for n in PRIMES]
    ok = all(r.passed for r in reports)
    dev = max(max(r.max_within_block_deviation, r.max_cross_block_deviation) for r in reports)
    assert acceptance(2, "ONB blocks and mutually unbiased", ok, f"max dev {dev:.2e}")


def test_criterion_03_guaranteed_regime(acceptance):
    d = build_dictionary(alltop_sequence(47))
    t0 = time.perf_counter()
    bp_ok = omp_ok = 0
    for seed in range(100):
        s = vectorize(random_scene(47, 3, seed))
        y = d.apply(s)
        bp_ok += scene_error(s, basis_pursuit(d, y).solution) <= 1e-4
        omp_ok += scene_error(s, omp(d, y, 3).solution) <= 1e-4
    secs = time.perf_counter() - t0
    ok = bp_ok == 100 and omp_ok == 100 and secs <= 120
    assert acceptance(3, "N=47 K=3 exact recovery", ok, f"BP {bp_ok}/100, OMP {omp_ok}/100, {secs:.1f}s")


def test_criterion_04_noise_free_demo(acceptance):
    t0 = time.perf_counter()
    errors = [run_radar_demo(RadarDemoConfig(seed=seed, snr_list=(math.inf,))).outcomes[0].error
              for seed in range(20)]
    secs = time.perf_counter() - t0
    good = sum(e <= 1e-6 for e in errors)
    ok = good == 20 and secs <= 120
    assert acceptance(4, "N=47 K=8 Alltop+BP noise-free", ok,
                      f"{good}/20 with error <= 1e-6, max {max(errors):.1e}, {secs:.1f}s")


def test_criterion_05_phase_transition(acceptance):
    t0 = time.perf_counter()
    cells = run_phase_transition(PhaseTransitionConfig(primes=DESK_PRIMES, trials=20))
    secs = time.perf_counter() - t0
    low = [c for c in cells if c.k <= c.n / (2 * math.log(c.n)) and c.fraction < 0.9]
    high = [c for c in cells if c.k >= c.n / 2 and c.fraction > 0.1]
    ok = not low and not high and secs <= 1800
    detail = f"{len(cells)} cells, {len(low)} low-K misses, {len(high)} high-K misses, {secs:.0f}s"
    assert acceptance(5, "phase-transition shape (desk scale)", ok, detail)


def test_criterion_06_oracle_equivalence(acceptance):
    worst = 0.0
    count = 0
    for n in (5, 7):
        d = build_dictionary(alltop_sequence(n))
        for k in range(1, math.ceil(thm1_bound(n))):
            for seed in range(25):
                y = d.apply(vectorize(random_scene(n, k, seed)))
                ref = l0_oracle(d, y, k).solution
                worst = max(worst, np.max(np.abs(basis_pursuit(d, y).solution - ref)),
                            np.max(np.abs(omp(d, y, k).solution - ref)))
                count += 1
    ok = worst <= 1e-6
    assert acceptance(6, "BP = OMP = l0 oracle in the guaranteed regime", ok,
                      f"{count} instances, max dev {worst:.1e}")


def test_criterion_07_classical_footprint(acceptance):
    n = 47
    pulse_map = classical_scene_map(gaussian_pulse(n), SparseScene(n, (Target(23, 11, 1.0),)))
    width = footprint_width(pulse_map, (23, 11))
    vals = classical_scene_map(alltop_sequence(n), SparseScene(n, (Target(23, 11, 1.0),))).values
    peak = vals[23, 11]
    side = np.delete(vals.ravel(), 23 * n + 11)
    levels_ok = np.all((side <= 1e-10) | (np.abs(side - 1 / math.sqrt(n)) <= 1e-10))
    ok = abs(width - 7) <= 1 and abs(peak - 1) <= 1e-10 and levels_ok
    assert acceptance(7, "classical footprints", ok, f"pulse FWHM {width:.3f} cells, Alltop peak {peak:.12f}")


def test_criterion_08_failure_fixture(acceptance):
    res = run_classical_l1_failure(47, 3, seed=FAILURE_SEED)
    ok = res.pulse_hits == 0 and res.alltop_error <= 1e-4
    assert acceptance(8, "Gaussian-pulse BP fails, Alltop BP succeeds", ok,
                      f"seed {FAILURE_SEED}: pulse hits {res.pulse_hits}/3, Alltop error {res.alltop_error:.1e}")


def test_criterion_09_bpdn_stability(acceptance):
    # 40 dB AWGN keeps the measured per-entry noise inside the stability bound for K=2, T=1
    d = build_dictionary(alltop_sequence(47))
    t0 = time.perf_counter()
    good = admissible = 0
    for seed in range(100):
        s = vectorize(random_scene(47, 2, seed))
        y0 = d.apply(s)
        e = awgn(y0, NoiseSpec(40.0, seed))
        eps = float(np.max(np.abs(e)))
        admissible += 2 < thm3_bound(47, eps, 1.0)
        res = bpdn_entrywise(d, y0 + e, eps)
        good += np.sum(np.abs(res.solution - s)) <= 1.0
    secs = time.perf_counter() - t0
    ok = admissible == 100 and good >= 95 and secs <= 300
    assert acceptance(9, "BPDN stability ||s - s*||_1 <= 1", ok,
                      f"{good}/100 within T, {admissible}/100 admissible, {secs:.1f}s")


def _digest(directory):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(directory.iterdir())}


def test_criterion_10_determinism(acceptance, tmp_path, monkeypatch):
    runs = [
        ["phase-transition", "--primes", "5,11,13", "--trials", "4"],
        ["radar-demo", "--n", "13", "--k", "3", "--snr", "inf,15,5", "--recovery", "bpdn"],
        ["radar-demo", "--n", "13", "--k", "3", "--snr", "10", "--recovery", "matched-filter"],
        ["classical-compare", "--n", "13", "--k", "2"],
        ["properties", "--n", "13"],
        ["bounds", "--n", "13"],
    ]
    mismatched = []
    for i, argv in enumerate(runs):
        out = tmp_path / f"run{i}"
        digests = []
        for threads in ("1", "2", "1"):
            monkeypatch.setenv("RADAR_CS_THREADS", threads)
            assert main([*argv, "--output-dir", str(out)]) == 0
            digests.append(_digest(out))
        if any(dg != digests[0] for dg in digests):
            mismatched.append(argv[0])
    ok = not mismatched
    assert acceptance(10, "byte-identical reruns across thread counts", ok,
                      f"{len(runs)} commands x 3 runs, mismatches: {mismatched or 'none'}")
