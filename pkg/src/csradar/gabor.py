"""The N x N^2 Gabor dictionary generated by one probe.

Column ``i = k*N + q`` is the atom ``M^q T^k f``. Block ``k`` of the
dictionary is ``diag(T^k f) W`` with ``W[n, q] = exp(2*pi*i*n*q/N)``, so
both apply and adjoint reduce to one batched length-N FFT per call.

For N up to the dense threshold the length-N transform is a product with a
cached DFT matrix, which beats the FFT at these sizes; above it numpy's FFT
is used. Both give the same values to rounding.

Inner products conjugate the first argument: ``<a, b> = sum(conj(a) * b)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tfcore import as_vector, resolve_index, tf_shift

DENSE_THRESHOLD = 61


class DictionaryTooLarge(ValueError):
    """Dense Gram requested above the materialization threshold."""


def inner(a, b) -> complex:
    return complex(np.vdot(a, b))


def dft_matrix(n: int) -> np.ndarray:
    """``W[p, q] = exp(2*pi*i*p*q/N)`` with exponents reduced mod N."""
    e = np.outer(np.arange(n), np.arange(n)) % n
    w = np.exp(2j * np.pi * e / n)
    w.setflags(write=False)
    return w


def _shifted_probes(probe: np.ndarray) -> np.ndarray:
    # row k holds T^k f
    n = probe.size
    rows = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return probe[rows]


def analysis(probe, y) -> np.ndarray:
    """Correlate ``y`` with every time-frequency shift of ``probe``.

    Returns the N x N array ``C[k, q] = <M^q T^k probe, y>``. No norm check
    on the probe, so the matched filter can use it directly.
    """
    probe = as_vector(probe)
    y = np.asarray(y, dtype=np.complex128)
    if y.shape != probe.shape:
        raise ValueError(f"length mismatch: probe {probe.size}, signal {y.size}")
    return np.fft.fft(np.conj(_shifted_probes(probe)) * y[None, :], axis=1)


@dataclass(frozen=True, eq=False)
class GaborDictionary:
    probe: np.ndarray
    dense_threshold: int = DENSE_THRESHOLD
    _rolled: np.ndarray = field(init=False, repr=False)
    _dft: np.ndarray | None = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_rolled", _shifted_probes(self.probe))
        self._rolled.setflags(write=False)
        dft = dft_matrix(self.n) if self.n <= self.dense_threshold else None
        object.__setattr__(self, "_dft", dft)

    @property
    def n(self) -> int:
        return self.probe.size

    @property
    def atom_count(self) -> int:
        return self.n * self.n

    @property
    def shape(self) -> tuple[int, int]:
        return self.n, self.atom_count

    def atom(self, idx) -> np.ndarray:
        return tf_shift(self.probe, idx)

    def columns(self, indices) -> np.ndarray:
        """Dense N x len(indices) block of atoms, by flat index."""
        k, q = np.divmod(np.asarray(indices, dtype=np.int64), self.n)
        w = self._dft if self._dft is not None else dft_matrix(self.n)
        return self._rolled[k].T * w[:, q]

    def apply(self, s) -> np.ndarray:
        """Synthesis ``Phi s``, one length-N transform per delay block."""
        s = np.asarray(s, dtype=np.complex128)
        n = self.n
        if s.shape != (n * n,):
            raise ValueError(f"coefficient vector must have length {n * n}, got {s.shape}")
        # mod[k, n] = sum_q s[k, q] w^(n q)
        if self._dft is not None:
            mod = s.reshape(n, n) @ self._dft
        else:
            mod = np.fft.ifft(s.reshape(n, n), axis=1) * n
        return np.sum(self._rolled * mod, axis=0)

    def adjoint(self, y) -> np.ndarray:
        """Analysis ``Phi^* y``; entry i is ``<phi_i, y>``."""
        y = np.asarray(y, dtype=np.complex128)
        if y.shape != (self.n,):
            raise ValueError(f"observation must have length {self.n}, got {y.shape}")
        windowed = np.conj(self._rolled) * y[None, :]
        if self._dft is not None:
            return (windowed @ np.conj(self._dft)).ravel()
        return np.fft.fft(windowed, axis=1).ravel()

    def frame_operator(self) -> np.ndarray:
        """The N x N matrix ``Phi Phi^*``, built column by column."""
        eye = np.eye(self.n, dtype=np.complex128)
        return np.stack([self.apply(self.adjoint(e)) for e in eye], axis=1)

    def dense(self, allow_large: bool = False) -> np.ndarray:
        if self.n > self.dense_threshold and not allow_large:
            raise DictionaryTooLarge(
                f"N={self.n} exceeds dense threshold {self.dense_threshold}; pass allow_large=True"
            )
        # column k*N + q is rolled[k] * w^(n q)
        n = self.n
        w = dft_matrix(n)
        return (self._rolled.T[:, :, None] * w[:, None, :]).reshape(n, n * n)

    def gram(self, allow_large: bool = False) -> np.ndarray:
        d = self.dense(allow_large)
        return d.conj().T @ d


def build_dictionary(probe, dense_threshold: int = DENSE_THRESHOLD) -> GaborDictionary:
    probe = as_vector(probe).copy()
    norm = np.linalg.norm(probe)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"probe must have unit norm, got {norm!r}")
    probe.setflags(write=False)
    return GaborDictionary(probe, dense_threshold)


def atom(d: GaborDictionary, idx) -> np.ndarray:
    resolve_index(idx, d.n)
    return d.atom(idx)


def apply(d: GaborDictionary, s) -> np.ndarray:
    return d.apply(s)


def adjoint(d: GaborDictionary, y) -> np.ndarray:
    return d.adjoint(y)


def coherence(d: GaborDictionary, allow_large: bool = False) -> float:
    """Largest modulus of the inner product between two distinct atoms."""
    g = np.abs(d.gram(allow_large))
    np.fill_diagonal(g, 0.0)
    return float(g.max()) if g.size > 1 else 0.0


def welch_bound(n: int, m: int) -> float:
    if n < 1 or m < n:
        raise ValueError(f"Welch bound needs M >= N >= 1, got N={n}, M={m}")
    if m == 1:
        return 0.0
    return float(np.sqrt((m - n) / (n * (m - 1))))


@dataclass(frozen=True)
class PropertyReport:
    n: int
    tol: float
    orthonormal_blocks: bool
    max_within_block_deviation: float
    mutually_unbiased: bool
    max_cross_block_deviation: float
    coherence: float
    welch_bound: float
    above_welch: bool

    @property
    def passed(self) -> bool:
        return self.orthonormal_blocks and self.mutually_unbiased

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["pass"] = self.passed
        return out


def verify_mub_properties(d: GaborDictionary, tol: float = 1e-10,
                          allow_large: bool = False) -> PropertyReport:
    """Check that each delay block is an ONB and distinct blocks are mutually unbiased."""
    n = d.n
    g = d.gram(allow_large).reshape(n, n, n, n)  # [k, j, k', j']
    blocks = np.arange(n)
    within = g[blocks, :, blocks, :]  # [k, j, j']
    within_dev = float(np.max(np.abs(within - np.eye(n)[None, :, :])))
    mags = np.abs(g)
    cross_mask = blocks[:, None] != blocks[None, :]
    cross = mags.transpose(0, 2, 1, 3)[cross_mask]
    cross_dev = float(np.max(np.abs(cross - 1.0 / np.sqrt(n)))) if n > 1 else 0.0
    mu = coherence(d, allow_large)
    wb = welch_bound(n, n * n)
    return PropertyReport(
        n=n,
        tol=tol,
        orthonormal_blocks=within_dev <= tol,
        max_within_block_deviation=within_dev,
        mutually_unbiased=cross_dev <= tol,
        max_cross_block_deviation=cross_dev,
        coherence=mu,
        welch_bound=wb,
        above_welch=mu >= wb - tol,
    )
