"""Centered DFT conventions and spectrum containers.

Signals are length-N complex vectors whose entry ``j`` holds
``f(-pi + 2*pi*j/N)``.  Their spectra live on the centered band
``B = (-ceil(N/2), floor(N/2)]`` and are stored densely as arrays ordered
from the lowest frequency of ``B`` to the highest.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FrequencyBand",
    "SparseSpectrum",
    "as_signal",
    "grid_points",
    "fft",
    "centered_dft",
    "centered_idft",
    "eval_trig_poly",
]


@dataclass(frozen=True)
class FrequencyBand:
    """The integer band ``B`` of ``n`` frequencies centred on zero."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"band size must be >= 1, got {self.n}")

    @property
    def lower(self) -> int:
        return -((self.n + 1) // 2) + 1

    @property
    def upper(self) -> int:
        return self.n // 2

    def __len__(self) -> int:
        return self.n

    def __contains__(self, omega) -> bool:
        return self.lower <= omega <= self.upper

    def frequencies(self) -> np.ndarray:
        return np.arange(self.lower, self.upper + 1, dtype=np.int64)

    def wrap(self, omega):
        """Map integers (scalar or array) onto their representative in B."""
        return (np.asarray(omega) - self.lower) % self.n + self.lower

    def index(self, omega):
        """Position of ``omega`` in the dense ordering of the band."""
        return np.asarray(omega) - self.lower


@dataclass(frozen=True, eq=False)
class SparseSpectrum:
    """Distinct (frequency, coefficient) pairs."""

    freqs: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=np.int64).reshape(-1)
        coeffs = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if freqs.shape != coeffs.shape:
            raise ValueError("freqs and coeffs must have the same length")
        if np.unique(freqs).size != freqs.size:
            raise ValueError("frequencies must be pairwise distinct")
        freqs.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def empty(cls) -> "SparseSpectrum":
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.complex128))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, complex]]) -> "SparseSpectrum":
        pairs = list(pairs)
        if not pairs:
            return cls.empty()
        freqs, coeffs = zip(*pairs)
        return cls(np.array(freqs), np.array(coeffs))

    @classmethod
    def from_dense(cls, dense: np.ndarray, *, drop_zeros: bool = False) -> "SparseSpectrum":
        dense = np.asarray(dense, dtype=np.complex128)
        band = FrequencyBand(dense.size)
        freqs = band.frequencies()
        if drop_zeros:
            keep = dense != 0
            return cls(freqs[keep], dense[keep])
        return cls(freqs, dense)

    def to_dense(self, n: int) -> np.ndarray:
        band = FrequencyBand(n)
        if self.freqs.size and (self.freqs.min() < band.lower or self.freqs.max() > band.upper):
            raise ValueError(f"spectrum has frequencies outside B for N={n}")
        out = np.zeros(n, dtype=np.complex128)
        out[band.index(self.freqs)] = self.coeffs
        return out

    def as_dict(self) -> dict[int, complex]:
        return {int(w): complex(c) for w, c in zip(self.freqs, self.coeffs)}

    def pairs(self) -> list[tuple[int, complex]]:
        return list(zip(self.freqs.tolist(), self.coeffs.tolist()))

    def support(self) -> frozenset[int]:
        return frozenset(self.freqs.tolist())

    def scaled(self, factor: complex) -> "SparseSpectrum":
        return SparseSpectrum(self.freqs, self.coeffs * factor)

    def __len__(self) -> int:
        return int(self.freqs.size)

    def __iter__(self):
        return iter(self.pairs())

    def __repr__(self) -> str:
        return f"SparseSpectrum({len(self)} terms)"


def as_signal(f: Sequence[complex] | np.ndarray) -> np.ndarray:
    """Validate and convert a sample vector to a 1-D complex128 array."""
    arr = np.asarray(f, dtype=np.complex128)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("signal must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("signal entries must be finite")
    return arr


def grid_points(n: int) -> np.ndarray:
    """The equispaced nodes ``y_j = -pi + 2*pi*j/n``."""
    return -np.pi + 2.0 * np.pi * np.arange(n) / n


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _bluestein(x: np.ndarray, sign: int) -> np.ndarray:
    # chirp-z: X_k = w_k * sum_j (x_j w_j) conj(w)_{k-j},  w_j = exp(sign*i*pi*j^2/n)
    n = x.size
    m = 1 << (2 * n - 1).bit_length()
    j = np.arange(n)
    # j^2 mod 2n keeps the chirp argument small for large n
    w = np.exp(sign * 1j * np.pi * ((j * j) % (2 * n)) / n)
    a = np.zeros(m, dtype=np.complex128)
    a[:n] = x * w
    b = np.zeros(m, dtype=np.complex128)
    b[:n] = np.conj(w)
    if n > 1:
        b[-(n - 1):] = np.conj(w[1:])[::-1]
    conv = np.fft.ifft(np.fft.fft(a) * np.fft.fft(b))
    return conv[:n] * w


def fft(x: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Unnormalised DFT, ``sum_j x_j exp(-+2 pi i k j / n)``.

    Power-of-two lengths go straight to the radix-2 core; every other length
    is routed through the chirp-z transform.
    """
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    if _is_pow2(n):
        return np.fft.ifft(x) * n if inverse else np.fft.fft(x)
    return _bluestein(x, +1 if inverse else -1)


def _alternating(freqs: np.ndarray) -> np.ndarray:
    return np.where(freqs % 2 == 0, 1.0, -1.0)


def centered_dft(f) -> np.ndarray:
    """``fhat_w = ((-1)^w / N) sum_j f_j exp(-2 pi i w j / N)`` for ``w`` in B.

    Returns the dense spectrum ordered from ``B.lower`` to ``B.upper``.
    """
    f = as_signal(f)
    n = f.size
    band = FrequencyBand(n)
    freqs = band.frequencies()
    spectrum = fft(f)[freqs % n]
    return spectrum * _alternating(freqs) / n


def centered_idft(fhat) -> np.ndarray:
    """Inverse of :func:`centered_dft`: ``f_j = sum_w fhat_w exp(i w y_j)``."""
    fhat = np.asarray(fhat, dtype=np.complex128)
    if fhat.ndim != 1 or fhat.size < 1:
        raise ValueError("dense spectrum must be a non-empty 1-D vector")
    n = fhat.size
    freqs = FrequencyBand(n).frequencies()
    buf = np.zeros(n, dtype=np.complex128)
    buf[freqs % n] = fhat * _alternating(freqs)
    return fft(buf, inverse=True)


def eval_trig_poly(spec: SparseSpectrum, x) -> complex | np.ndarray:
    """Evaluate ``sum_w c_w exp(i w x)`` directly; ``x`` may be an array."""
    x_arr = np.asarray(x, dtype=np.float64)
    phase = np.exp(1j * np.multiply.outer(x_arr, spec.freqs.astype(np.float64)))
    out = phase @ spec.coeffs
    return complex(out) if x_arr.ndim == 0 else out
