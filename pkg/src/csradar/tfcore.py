"""Signal primitives: probes and the cyclic time-frequency shift operators.

Vectors are plain 1-D ``complex128`` numpy arrays. A time-frequency shift
index is either a pair ``(k, q)`` (delay, modulation) or the flat index
``i = k * N + q``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# FWHM of the Gaussian-pulse matched-filter blob at N=47 is 7 cells when
# width = GAUSSIAN_WIDTH_PER_SQRT_N * sqrt(N); see ``default_pulse_width``.
GAUSSIAN_WIDTH_PER_SQRT_N = 7.0 / (4.0 * np.sqrt(np.log(2.0)) * np.sqrt(47.0))


class NotPrimeError(ValueError):
    """Raised when a construction needs a prime dimension N >= 5."""


def is_prime(n: int) -> bool:
    """Deterministic trial division, limited to n <= 10**6."""
    n = int(n)
    if n > 10**6:
        raise ValueError(f"primality guard: n={n} exceeds 10**6")
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def check_prime(n: int) -> int:
    if int(n) != n or not is_prime(int(n)) or n < 5:
        raise NotPrimeError(f"N must be prime >= 5, got {n}")
    return int(n)


def as_vector(v) -> np.ndarray:
    """Validate and convert to a finite, non-empty complex vector."""
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector has non-finite entries")
    return arr


@dataclass(frozen=True)
class ShiftIndex:
    """Delay ``k`` and modulation ``q`` on an N x N grid (flat ``k*N + q``)."""

    k: int
    q: int
    n: int

    def __post_init__(self):
        if self.n < 1 or not (0 <= self.k < self.n and 0 <= self.q < self.n):
            raise IndexError(f"shift ({self.k}, {self.q}) out of range for N={self.n}")

    @property
    def flat(self) -> int:
        return self.k * self.n + self.q

    @classmethod
    def from_flat(cls, i: int, n: int) -> "ShiftIndex":
        if not 0 <= i < n * n:
            raise IndexError(f"flat index {i} out of range for N={n}")
        return cls(i // n, i % n, n)


def _unit_roots(n: int, exponents) -> np.ndarray:
    # exponents reduced mod n first so the trig argument stays in [0, 2*pi)
    e = np.mod(np.asarray(exponents, dtype=np.int64), n)
    return np.exp(2j * np.pi * e / n)


def alltop_sequence(n: int) -> np.ndarray:
    n = check_prime(n)
    idx = np.arange(n, dtype=np.int64)
    cubes = (idx * idx % n) * idx % n
    return _unit_roots(n, cubes) / np.sqrt(n)


def _check_length(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"N must be a positive integer, got {n}")
    return int(n)


def random_gaussian_probe(n: int, seed: int) -> np.ndarray:
    """I.i.d. circular complex Gaussian entries, scaled to unit norm."""
    n = _check_length(n)
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(0.5)
    return z / np.linalg.norm(z)


def random_phase_probe(n: int, seed: int) -> np.ndarray:
    """Constant envelope 1/sqrt(N) with i.i.d. uniform phases."""
    n = _check_length(n)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.exp(1j * theta) / np.sqrt(n)


def default_pulse_width(n: int) -> float:
    return float(GAUSSIAN_WIDTH_PER_SQRT_N * np.sqrt(n))


def gaussian_pulse(n: int, width: float | None = None) -> np.ndarray:
    """Periodized sampled Gaussian centered at index 0, unit norm.

    ``width`` is the standard deviation in samples; when omitted the
    calibrated ``default_pulse_width(n)`` is used.
    """
    n = _check_length(n)
    if width is None:
        width = default_pulse_width(n)
    if not width > 0:
        raise ValueError(f"width must be positive, got {width}")
    idx = np.arange(n)
    dist = np.minimum(idx, n - idx).astype(float)
    g = np.exp(-(dist**2) / (2.0 * width**2))
    return (g / np.linalg.norm(g)).astype(np.complex128)


def time_shift(v, k: int) -> np.ndarray:
    """Cyclic delay: ``out[n] = v[(n - k) mod N]``."""
    v = as_vector(v)
    return np.roll(v, int(k) % v.size)


def modulate(v, q: int) -> np.ndarray:
    """``out[n] = v[n] * exp(2*pi*i*n*q/N)``."""
    v = as_vector(v)
    n = v.size
    return v * _unit_roots(n, np.arange(n, dtype=np.int64) * (int(q) % n))


def tf_shift(v, idx) -> np.ndarray:
    """Apply ``M^q T^k`` to ``v``; ``idx`` is a ShiftIndex, a (k, q) pair or a flat int."""
    v = as_vector(v)
    k, q = resolve_index(idx, v.size)
    return modulate(time_shift(v, k), q)


def resolve_index(idx, n: int) -> tuple[int, int]:
    if isinstance(idx, ShiftIndex):
        if idx.n != n:
            raise IndexError(f"ShiftIndex built for N={idx.n}, vector has N={n}")
        return idx.k, idx.q
    if isinstance(idx, (tuple, list)):
        s = ShiftIndex(int(idx[0]), int(idx[1]), n)
        return s.k, s.q
    s = ShiftIndex.from_flat(int(idx), n)
    return s.k, s.q


def shift_matrix(n: int) -> np.ndarray:
    """Dense cyclic delay matrix T."""
    return np.roll(np.eye(n, dtype=np.complex128), 1, axis=0)


def modulation_matrix(n: int) -> np.ndarray:
    """Dense diagonal modulation matrix M."""
    return np.diag(_unit_roots(n, np.arange(n)))


def tf_matrix(n: int, i: int) -> np.ndarray:
    """Dense ``H_i = M^(i mod N) T^(i // N)``; for small-N checks only."""
    k, q = divmod(int(i), n)
    return np.linalg.matrix_power(modulation_matrix(n), q) @ np.linalg.matrix_power(
        shift_matrix(n), k
    )
