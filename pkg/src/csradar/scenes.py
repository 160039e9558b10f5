"""Sparse target scenes on the N x N delay/Doppler grid, noise and error metrics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SUCCESS_THRESHOLD = 1e-4


@dataclass(frozen=True)
class Target:
    delay: int
    doppler: int
    coefficient: complex


@dataclass(frozen=True)
class SparseScene:
    """Targets sorted by flat index ``delay * n + doppler``."""

    n: int
    targets: tuple[Target, ...] = ()

    def __post_init__(self):
        seen = set()
        for t in self.targets:
            if not (0 <= t.delay < self.n and 0 <= t.doppler < self.n):
                raise ValueError(f"target ({t.delay}, {t.doppler}) outside {self.n}x{self.n} grid")
            if (t.delay, t.doppler) in seen:
                raise ValueError(f"duplicate target cell ({t.delay}, {t.doppler})")
            seen.add((t.delay, t.doppler))
        ordered = tuple(sorted(self.targets, key=lambda t: t.delay * self.n + t.doppler))
        object.__setattr__(self, "targets", ordered)

    @property
    def k(self) -> int:
        return len(self.targets)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(t.delay * self.n + t.doppler for t in self.targets)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "targets": [
                {"delay": t.delay, "doppler": t.doppler,
                 "re": float(t.coefficient.real), "im": float(t.coefficient.imag)}
                for t in self.targets
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SparseScene":
        targets = tuple(
            Target(int(t["delay"]), int(t["doppler"]), complex(float(t["re"]), float(t["im"])))
            for t in data["targets"]
        )
        return cls(int(data["n"]), targets)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "SparseScene":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class NoiseSpec:
    snr_db: float = math.inf
    seed: int = 0

    def __post_init__(self):
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError(f"snr_db must be finite or +inf, got {self.snr_db}")


def complex_gaussian(rng: np.random.Generator, size) -> np.ndarray:
    """Circular complex Gaussian, unit variance (1/2 per real component)."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) * math.sqrt(0.5)


def random_scene(n: int, k: int, seed: int) -> SparseScene:
    if not 0 <= k <= n * n:
        raise ValueError(f"K must lie in [0, {n * n}], got {k}")
    rng = np.random.default_rng(seed)
    cells = rng.choice(n * n, size=k, replace=False)
    coefs = complex_gaussian(rng, k)
    return SparseScene(n, tuple(
        Target(int(c) // n, int(c) % n, complex(v)) for c, v in zip(cells, coefs)
    ))


def vectorize(scene: SparseScene) -> np.ndarray:
    s = np.zeros(scene.n * scene.n, dtype=np.complex128)
    for t in scene.targets:
        s[t.delay * scene.n + t.doppler] = t.coefficient
    return s


def devectorize(s, threshold: float = 0.0) -> SparseScene:
    s = np.asarray(s, dtype=np.complex128)
    n = math.isqrt(s.size)
    if n * n != s.size or n == 0:
        raise ValueError(f"length {s.size} is not a positive perfect square")
    idx = np.flatnonzero(np.abs(s) > threshold)
    return SparseScene(n, tuple(Target(int(i) // n, int(i) % n, complex(s[i])) for i in idx))


def awgn(y, spec: NoiseSpec) -> np.ndarray:
    """The noise vector that :func:`add_awgn` would add (zeros for infinite SNR)."""
    y = np.asarray(y, dtype=np.complex128)
    if spec.snr_db == math.inf:
        return np.zeros_like(y)
    energy = float(np.vdot(y, y).real)
    if energy == 0.0:
        raise ValueError("cannot set a finite SNR against a zero signal")
    per_entry = energy * 10.0 ** (-spec.snr_db / 10.0) / y.size
    rng = np.random.default_rng(spec.seed)
    return complex_gaussian(rng, y.size) * math.sqrt(per_entry)


def add_awgn(y, spec: NoiseSpec) -> np.ndarray:
    """``y + e`` with ``E||e||^2 = ||y||^2 * 10^(-snr/10)``."""
    y = np.asarray(y, dtype=np.complex128)
    if spec.snr_db == math.inf:
        return y.copy()
    return y + awgn(y, spec)


def scene_error(s, s_star) -> float:
    s = np.asarray(s)
    s_star = np.asarray(s_star)
    if s.shape != s_star.shape:
        raise ValueError(f"length mismatch: {s.shape} vs {s_star.shape}")
    return float(np.linalg.norm(s - s_star))


def is_success(s, s_star, threshold: float = SUCCESS_THRESHOLD) -> bool:
    return scene_error(s, s_star) <= threshold


def top_k_overlap(s, support, k: int | None = None) -> int:
    """How many of the ``k`` largest-magnitude cells of ``s`` are in ``support``."""
    support = set(int(i) for i in support)
    k = len(support) if k is None else k
    if k == 0:
        return 0
    top = np.argsort(-np.abs(np.asarray(s)), kind="stable")[:k]
    return sum(int(i) in support for i in top)
