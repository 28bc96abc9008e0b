"""Evaluating the filtered signal ``(g~_q * f)(x)`` from equispaced samples.

The workhorse is the truncated semi-discrete convolution: only the
``2*kappa + 1`` grid samples nearest to ``x`` are combined with filter taps
``g~_q(x - y_j) = exp(-i q (x - y_j)) g(x - y_j)``.  Grid indices wrap modulo
``N`` and the tap argument is taken from the unwrapped index, so every tap is
evaluated close to the filter's peak.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import SparseSpectrum, as_signal, grid_points
from .filter import FilterParams, gaussian_eval, gaussian_fourier_coeff

__all__ = [
    "dirichlet_eval",
    "exact_convolution",
    "dense_semidiscrete",
    "nearest_grid_index",
    "ConvEvaluator",
    "truncated_eval",
    "WindowTable",
    "filtered_grid_samples",
]

TWO_PI = 2.0 * math.pi


def dirichlet_eval(m: int, y):
    """``D_M(y) = (1/2pi) sum_{|n|<=M} exp(i n y)`` in closed form."""
    if m < 0:
        raise ValueError("M must be non-negative")
    y = np.asarray(y, dtype=np.float64)
    y = (y + np.pi) % TWO_PI - np.pi
    half = np.sin(y / 2.0)
    singular = np.abs(half) < 1e-12
    safe = np.where(singular, 1.0, half)
    out = np.where(singular, 2 * m + 1, np.sin((m + 0.5) * y) / safe) / TWO_PI
    return complex(out) if out.ndim == 0 else out.astype(np.complex128)


def exact_convolution(spec: SparseSpectrum, q: int, c1: float, x):
    """Closed-form ``(g~_q * f)(x) = sum_w fhat_w ghat_{w+q} exp(i w x)``."""
    x_arr = np.asarray(x, dtype=np.float64)
    weights = spec.coeffs * gaussian_fourier_coeff(spec.freqs + q, c1)
    out = np.exp(1j * np.multiply.outer(x_arr, spec.freqs.astype(np.float64))) @ weights
    return complex(out) if x_arr.ndim == 0 else out


def dense_semidiscrete(f, q: int, c1: float, x):
    """The full ``N``-term sum ``(1/N) sum_j f_j g~_q(x - y_j)``."""
    f = as_signal(f)
    n = f.size
    x_arr = np.asarray(x, dtype=np.float64)
    diff = np.subtract.outer(x_arr, grid_points(n))
    diff = (diff + np.pi) % TWO_PI - np.pi
    kernel = np.exp(-1j * q * diff) * gaussian_eval(diff, c1)
    out = kernel @ f / n
    return complex(out) if x_arr.ndim == 0 else out


def nearest_grid_index(x, n: int):
    """``(j', delta)``: nearest grid index (circular, ties to the smaller index)
    and the signed offset ``x - y_j'`` in grid cells, ``delta in (-1/2, 1/2]``."""
    t = (np.asarray(x, dtype=np.float64) + np.pi) * (n / TWO_PI)
    j = np.ceil(t - 0.5)
    delta = t - j
    return j.astype(np.int64) % n, delta


@lru_cache(maxsize=4096)
def _cached_taps(delta: float, kappa: int, n: int, c1: float) -> np.ndarray:
    offsets = (delta - np.arange(-kappa, kappa + 1)) * (TWO_PI / n)
    taps = gaussian_eval(offsets, c1)
    taps.setflags(write=False)
    return taps


@dataclass(frozen=True, eq=False)
class ConvEvaluator:
    """Point evaluator for the truncated convolution of one modulated filter.

    ``signal`` is only ever indexed with integer arrays, so any object
    supporting ``len`` and fancy indexing can stand in for it.
    """

    signal: object
    params: FilterParams
    q: int
    kappa: int = field(default=0)

    def __post_init__(self):
        kappa = self.kappa or self.params.kappa
        n = len(self.signal)
        if n != self.params.n:
            raise ValueError(f"signal length {n} != params.n {self.params.n}")
        if 2 * kappa + 2 > n:
            raise ValueError(f"window 2*kappa+2={2 * kappa + 2} exceeds N={n}")
        object.__setattr__(self, "kappa", int(kappa))

    @property
    def n(self) -> int:
        return self.params.n

    def window(self, x: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Wrapped indices, unwrapped offsets ``x - y_j`` and real taps ``g``."""
        jp, delta = nearest_grid_index(x, self.n)
        k = np.arange(-self.kappa, self.kappa + 1)
        idx = (int(jp) + k) % self.n
        offsets = (float(delta) - k) * (TWO_PI / self.n)
        return idx, offsets, _cached_taps(float(delta), self.kappa, self.n, self.params.c1)

    def __call__(self, x: float) -> complex:
        idx, offsets, taps = self.window(x)
        vals = np.asarray(self.signal[idx], dtype=np.complex128)
        return complex(np.sum(vals * np.exp(-1j * self.q * offsets) * taps) / self.n)

    def evaluate(self, xs) -> np.ndarray:
        """Vectorised evaluation at many points."""
        table = WindowTable.build(np.asarray(xs, dtype=np.float64), self.n, self.params.c1, self.kappa)
        return table.evaluate(self.signal, self.q)


def truncated_eval(ev: ConvEvaluator, x: float) -> complex:
    """``(1/N) sum_{j=j'-kappa}^{j'+kappa} f_j g~_q(x - y_j)``."""
    return ev(x)


@dataclass(frozen=True, eq=False)
class WindowTable:
    """Precomputed windows for a fixed set of query points.

    The filter taps do not depend on the modulation, so one table serves
    every passband of a sweep; only the phase factors change with ``q``.
    """

    points: np.ndarray
    n: int
    kappa: int
    anchor: np.ndarray      # j' per point
    delta: np.ndarray       # (x - y_j') in grid cells
    taps: np.ndarray        # (m, 2 kappa + 1) real filter values
    distinct: np.ndarray    # sorted distinct signal indices touched
    local: np.ndarray       # (m, 2 kappa + 1) positions into ``distinct``

    @classmethod
    def build(cls, points: np.ndarray, n: int, c1: float, kappa: int) -> "WindowTable":
        if 2 * kappa + 2 > n:
            raise ValueError(f"window 2*kappa+2={2 * kappa + 2} exceeds N={n}")
        points = np.asarray(points, dtype=np.float64).reshape(-1)
        anchor, delta = nearest_grid_index(points, n)
        k = np.arange(-kappa, kappa + 1)
        idx = (anchor[:, None] + k[None, :]) % n
        offsets = (delta[:, None] - k[None, :]) * (TWO_PI / n)
        taps = gaussian_eval(offsets, c1)
        distinct, local = np.unique(idx, return_inverse=True)
        return cls(points, n, kappa, anchor, delta, taps, distinct, local.reshape(idx.shape))

    @property
    def samples_read(self) -> int:
        return int(self.distinct.size)

    def gather(self, f) -> np.ndarray:
        return np.asarray(f[self.distinct], dtype=np.complex128)

    def evaluate(self, f, q: int, gathered: np.ndarray | None = None) -> np.ndarray:
        """Filtered values at every point for modulation ``q``.

        Uses ``g~_q(x - y_j) = exp(-i q x) * exp(i q y_j) * g(x - y_j)`` with both
        phases reduced through integer arithmetic to keep them exact.
        """
        vals = self.gather(f) if gathered is None else gathered
        n = self.n
        sign = -1.0 if q % 2 else 1.0
        # exp(i q y_j) = (-1)^q exp(2 pi i (q j mod n) / n)
        mod_in = sign * np.exp(TWO_PI * 1j * ((q * self.distinct) % n) / n)
        summed = np.sum((vals * mod_in)[self.local] * self.taps, axis=1)
        # exp(-i q x) = (-1)^q exp(-2 pi i (q j' mod n)/n) exp(-2 pi i q delta / n)
        mod_out = sign * np.exp(-TWO_PI * 1j * (((q * self.anchor) % n) + q * self.delta) / n)
        return mod_out * summed / n


def filtered_grid_samples(f, c1: float, q: int, kappa: int, f_fft: np.ndarray | None = None) -> np.ndarray:
    """Truncated convolution evaluated at every grid node ``y_k``.

    At grid nodes the window taps are shift invariant, so the whole vector is
    one circular convolution with a ``2*kappa + 1`` tap kernel.  ``f_fft``
    may carry a precomputed ``np.fft.fft(f)`` when sweeping many ``q``.
    """
    f = as_signal(f)
    n = f.size
    if 2 * kappa + 2 > n:
        raise ValueError(f"window 2*kappa+2={2 * kappa + 2} exceeds N={n}")
    d = np.arange(-kappa, kappa + 1)
    offsets = d * (TWO_PI / n)
    kernel = np.zeros(n, dtype=np.complex128)
    kernel[d % n] = np.exp(-1j * q * offsets) * gaussian_eval(offsets, c1) / n
    if f_fft is None:
        f_fft = np.fft.fft(f)
    return np.fft.ifft(f_fft * np.fft.fft(kernel))
