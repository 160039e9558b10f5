"""Matched-filter baseline on the time-frequency grid.

Map value ``(k, q)`` is ``|<M^q T^k f, y>|``: the received signal
correlated against every delayed, modulated copy of the pulse. Rows are
delays, columns are modulations.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gabor import analysis, build_dictionary
from .scenes import NoiseSpec, SparseScene, add_awgn, vectorize


@dataclass(frozen=True, eq=False)
class AmbiguityMap:
    n: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.n, self.n):
            raise ValueError(f"map must be {self.n}x{self.n}, got {self.values.shape}")
        if not (np.all(np.isfinite(self.values)) and np.all(self.values >= 0)):
            raise ValueError("map values must be finite and nonnegative")

    def __getitem__(self, cell):
        return self.values[cell]

    def to_csv(self, path, probe_name: str = "unknown") -> None:
        lines = [f"# n={self.n} probe={probe_name}"]
        lines += [",".join(format(float(v), ".17g") for v in row) for row in self.values]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path) -> "AmbiguityMap":
        rows = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
        values = np.array([[float(x) for x in ln.split(",")] for ln in rows])
        return cls(values.shape[0], values)


def ambiguity_map(probe, y) -> AmbiguityMap:
    coef = analysis(probe, y)
    return AmbiguityMap(coef.shape[0], np.abs(coef))


def self_ambiguity(probe) -> AmbiguityMap:
    probe = np.asarray(probe, dtype=np.complex128)
    if abs(np.linalg.norm(probe) - 1.0) > 1e-9:
        raise ValueError("self ambiguity expects a unit-norm probe")
    return ambiguity_map(probe, probe)


def received_signal(probe, scene: SparseScene, noise: NoiseSpec | None = None) -> np.ndarray:
    """Superposition of shifted, scaled pulses, optionally with AWGN."""
    y = build_dictionary(probe).apply(vectorize(scene))
    if noise is not None:
        y = add_awgn(y, noise)
    return y


def classical_scene_map(probe, scene: SparseScene, noise: NoiseSpec | None = None) -> AmbiguityMap:
    return ambiguity_map(probe, received_signal(probe, scene, noise))


def footprint_width(amap: AmbiguityMap, center) -> float:
    """Full width at half maximum along the delay axis through ``center``.

    Scans circularly up and down the delay column from ``center`` to the
    first cell below half the center value, interpolating linearly between
    cells. A column that never drops below half maximum is degenerate and
    reports the full width N.
    """
    k0, q0 = int(center[0]), int(center[1])
    n = amap.n
    column = amap.values[:, q0 % n]
    peak = float(column[k0 % n])
    if peak <= 0:
        raise ValueError(f"center ({k0}, {q0}) is a zero cell")
    half = peak / 2.0

    def reach(step: int) -> float | None:
        prev = peak
        for j in range(1, n):
            cur = float(column[(k0 + step * j) % n])
            if cur < half:
                return (j - 1) + (prev - half) / (prev - cur)
            prev = cur
        return None

    up, down = reach(1), reach(-1)
    if up is None or down is None:
        return float(n)
    return min(up + down, float(n))
