"""Deterministic experiment drivers.

Every random draw comes from a seed derived as a pure function of the
experiment coordinates (see :func:`derive_seed`), so results do not depend
on execution order or on how many worker processes run the trials.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .classical import AmbiguityMap, classical_scene_map
from .gabor import build_dictionary
from .scenes import (
    SUCCESS_THRESHOLD,
    NoiseSpec,
    SparseScene,
    awgn,
    random_scene,
    scene_error,
    top_k_overlap,
    vectorize,
)
from .solvers import RecoveryResult, SolverOptions, basis_pursuit, bpdn_entrywise, omp
from .tfcore import (
    alltop_sequence,
    check_prime,
    default_pulse_width,
    gaussian_pulse,
    random_gaussian_probe,
    random_phase_probe,
)

DESK_PRIMES = (5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)
FULL_PRIMES = DESK_PRIMES + (53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127)
PROBES = ("alltop", "gaussian-pulse", "gaussian-random", "random-phase")
RECOVERIES = ("bp", "bpdn", "omp", "matched-filter")
THREADS_ENV = "RADAR_CS_THREADS"


def derive_seed(*coords: int) -> int:
    """Stable 64-bit seed from integer coordinates (order-sensitive)."""
    ss = np.random.SeedSequence([int(c) & 0xFFFFFFFFFFFFFFFF for c in coords])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def worker_count(requested: int | None = None) -> int:
    if requested is None:
        requested = int(os.environ.get(THREADS_ENV, "1") or 1)
    if requested <= 0:
        requested = os.cpu_count() or 1
    return requested


def make_probe(name: str, n: int, seed: int = 0, width: float | None = None) -> np.ndarray:
    if name == "alltop":
        return alltop_sequence(n)
    if name == "gaussian-pulse":
        return gaussian_pulse(n, width)
    if name == "gaussian-random":
        return random_gaussian_probe(n, seed)
    if name == "random-phase":
        return random_phase_probe(n, seed)
    raise ValueError(f"unknown probe {name!r}; expected one of {PROBES}")


def recover(d, y, method: str, k_hint: int, eps: float = 0.0,
            opts: SolverOptions | None = None) -> RecoveryResult:
    if method == "bp":
        return basis_pursuit(d, y, opts)
    if method == "bpdn":
        return bpdn_entrywise(d, y, eps, opts)
    if method == "omp":
        return omp(d, y, sparsity_limit=max(k_hint, 1), residual_tol=1e-10)
    raise ValueError(f"unknown solver {method!r}")


# -- phase transition ---------------------------------------------------------

@dataclass(frozen=True)
class PhaseTransitionConfig:
    primes: tuple[int, ...] = DESK_PRIMES
    trials: int = 20
    k_min: int = 1
    k_max: int | None = None
    k_step: int = 1
    success_threshold: float = SUCCESS_THRESHOLD
    solver: str = "bp"
    base_seed: int = 0
    eps: float = 0.1

    def __post_init__(self):
        for n in self.primes:
            check_prime(n)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.success_threshold > 0:
            raise ValueError("success_threshold must be positive")
        if self.solver not in ("bp", "omp"):
            raise ValueError(f"solver must be 'bp' or 'omp', got {self.solver!r}")
        if self.k_min < 0 or self.k_step < 1:
            raise ValueError("k_min must be >= 0 and k_step >= 1")

    def k_values(self, n: int) -> list[int]:
        top = n if self.k_max is None else min(self.k_max, n * n)
        return list(range(self.k_min, top + 1, self.k_step))


@dataclass(frozen=True)
class PhaseTransitionCell:
    n: int
    k: int
    trials: int
    successes: int
    mean_error: float
    thm1: float
    thm2: float
    empirical_line: float

    @property
    def fraction(self) -> float:
        return self.successes / self.trials


def _run_cell(args) -> tuple[int, int, list[float]]:
    n, k, cfg = args
    d = build_dictionary(alltop_sequence(n))
    errors = []
    for t in range(cfg.trials):
        scene = random_scene(n, k, derive_seed(cfg.base_seed, n, k, t))
        s = vectorize(scene)
        result = recover(d, d.apply(s), cfg.solver, k_hint=n)
        err = scene_error(s, result.solution)
        # an unconverged solve counts as a failure
        errors.append(err if result.converged else math.inf)
    return n, k, errors


def run_phase_transition(cfg: PhaseTransitionConfig, workers: int | None = None,
                         progress=None) -> list[PhaseTransitionCell]:
    tasks = [(n, k, cfg) for n in cfg.primes for k in cfg.k_values(n)]
    workers = worker_count(workers)
    if workers == 1:
        outputs = map(_run_cell, tasks)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        outputs = pool.map(_run_cell, tasks, chunksize=1)
    cells = []
    try:
        for n, k, errors in outputs:
            ok = sum(e <= cfg.success_threshold for e in errors)
            finite = [e for e in errors if math.isfinite(e)]
            mean_err = float(sum(finite) / len(finite)) if len(finite) == len(errors) else math.inf
            cells.append(PhaseTransitionCell(
                n, k, cfg.trials, ok, mean_err,
                bounds.thm1_bound(n), bounds.thm2_bound(n, cfg.eps), bounds.empirical_line(n),
            ))
            if progress is not None:
                progress(cells[-1])
    finally:
        if pool is not None:
            pool.shutdown()
    return cells


def empirical_lines(primes) -> list[dict]:
    """The empirical line under three logarithm bases, for comparison."""
    return [
        {"n": n, "ln": bounds.empirical_line(n), "log2": bounds.empirical_line(n, 2.0),
         "log10": bounds.empirical_line(n, 10.0)}
        for n in primes
    ]


# -- radar demos --------------------------------------------------------------

@dataclass(frozen=True)
class RadarDemoConfig:
    n: int = 47
    k: int = 8
    snr_list: tuple[float, ...] = (math.inf, 15.0, 5.0)
    probe: str = "alltop"
    recovery: str = "bp"
    seed: int = 0
    pulse_width: float | None = None

    def __post_init__(self):
        if self.probe not in PROBES:
            raise ValueError(f"unknown probe {self.probe!r}; expected one of {PROBES}")
        if self.recovery not in RECOVERIES:
            raise ValueError(f"unknown recovery {self.recovery!r}; expected one of {RECOVERIES}")
        if self.probe == "alltop":
            check_prime(self.n)
        if not 0 <= self.k <= self.n * self.n:
            raise ValueError(f"k must lie in [0, {self.n * self.n}]")


@dataclass
class SnrOutcome:
    snr_db: float
    noise_max: float
    overlap: int
    error: float | None = None
    false_positives: int | None = None
    converged: bool | None = None
    iterations: int | None = None
    min_target_peak: float | None = None
    max_interference: float | None = None
    solution: np.ndarray | None = field(default=None, repr=False)
    ambiguity: AmbiguityMap | None = field(default=None, repr=False)
    failure: str | None = None

    def summary(self) -> dict:
        keys = ("snr_db", "noise_max", "overlap", "error", "false_positives", "converged",
                "iterations", "min_target_peak", "max_interference", "failure")
        return {k: getattr(self, k) for k in keys}


@dataclass
class DemoResult:
    config: RadarDemoConfig
    scene: SparseScene
    outcomes: list[SnrOutcome]


def _false_positives(sol, support, scale: float, rel: float = 0.1) -> int:
    mags = np.abs(sol)
    mask = np.ones(mags.size, bool)
    mask[list(support)] = False
    return int(np.sum(mags[mask] > rel * scale))


def run_radar_demo(cfg: RadarDemoConfig) -> DemoResult:
    n, k = cfg.n, cfg.k
    scene = random_scene(n, k, derive_seed(cfg.seed, 0))
    probe = make_probe(cfg.probe, n, derive_seed(cfg.seed, 1), cfg.pulse_width)
    d = build_dictionary(probe)
    s = vectorize(scene)
    y_clean = d.apply(s)
    support = scene.support
    scale = float(np.max(np.abs(s))) if k else 1.0
    outcomes = []
    for i, snr in enumerate(cfg.snr_list):
        spec = NoiseSpec(snr, derive_seed(cfg.seed, 2, i))
        try:
            e = awgn(y_clean, spec) if k else np.zeros(n, complex)
            y = y_clean + e
            noise_max = float(np.max(np.abs(e)))
            if cfg.recovery == "matched-filter":
                amap = classical_scene_map(probe, scene, spec if k else None)
                vals = amap.values.ravel()
                off = np.delete(vals, list(support))
                outcomes.append(SnrOutcome(
                    snr, noise_max, top_k_overlap(vals, support, k),
                    min_target_peak=float(vals[list(support)].min()) if k else None,
                    max_interference=float(off.max()) if off.size else 0.0,
                    ambiguity=amap,
                ))
            else:
                res = recover(d, y, cfg.recovery, k_hint=k, eps=noise_max)
                outcomes.append(SnrOutcome(
                    snr, noise_max, top_k_overlap(res.solution, support, k),
                    error=scene_error(s, res.solution),
                    false_positives=_false_positives(res.solution, support, scale),
                    converged=res.converged, iterations=res.iterations,
                    solution=res.solution,
                ))
        except (ValueError, np.linalg.LinAlgError) as exc:
            outcomes.append(SnrOutcome(snr, math.nan, 0, failure=str(exc)))
    return DemoResult(cfg, scene, outcomes)


# -- classical pulse with l1 recovery -----------------------------------------

@dataclass
class ComparisonResult:
    n: int
    k: int
    seed: int
    pulse_width: float
    scene: SparseScene
    alltop_error: float
    alltop_hits: int
    alltop_converged: bool
    pulse_error: float
    pulse_hits: int
    pulse_converged: bool

    def summary(self) -> dict:
        keys = ("n", "k", "seed", "pulse_width", "alltop_error", "alltop_hits",
                "alltop_converged", "pulse_error", "pulse_hits", "pulse_converged")
        return {k: getattr(self, k) for k in keys}


def run_classical_l1_failure(n: int, k: int, pulse_width: float | None = None,
                             seed: int = 0, opts: SolverOptions | None = None) -> ComparisonResult:
    """BP on the same scene with a Gaussian-pulse and an Alltop dictionary.

    ``*_hits`` counts true targets among the k largest recovered cells.
    """
    check_prime(n)
    if not k < bounds.thm1_bound(n):
        raise ValueError(f"k={k} is outside the guaranteed regime for N={n}")
    width = gaussian_pulse_width(n, pulse_width)
    scene = random_scene(n, k, seed)
    s = vectorize(scene)
    out = {}
    for name, probe in (("alltop", alltop_sequence(n)), ("pulse", gaussian_pulse(n, width))):
        d = build_dictionary(probe)
        res = basis_pursuit(d, d.apply(s), opts)
        out[name] = (scene_error(s, res.solution), top_k_overlap(res.solution, scene.support, k),
                     res.converged)
    return ComparisonResult(n, k, seed, width, scene, *out["alltop"], *out["pulse"])


def gaussian_pulse_width(n: int, width: float | None) -> float:
    return default_pulse_width(n) if width is None else float(width)
