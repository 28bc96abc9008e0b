"""Periodized Gaussian bandpass filter and the passband sweep plan."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import FrequencyBand

__all__ = [
    "FilterParams",
    "PassbandPlan",
    "gaussian_eval",
    "gaussian_fourier_coeff",
    "gaussian_decay_bound",
    "modulated_fourier_coeff",
    "guaranteed_kappa",
    "select_params",
    "passband_plan",
]

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_MIN_IMAGES = 2


def _n_images(c1: float) -> int:
    # smallest K >= 2 with dropped tail 2 exp(-((2K+1)^2 - 1) pi^2 / (2 c1^2)) < 1e-16 * g(x)
    need = 2.0 * c1 * c1 * math.log(2e16) / math.pi ** 2 + 1.0
    return max(_MIN_IMAGES, math.ceil((math.sqrt(need) - 1.0) / 2.0))


def gaussian_eval(x, c1: float):
    """The 2*pi-periodic Gaussian ``(1/c1) sum_n exp(-(x - 2 n pi)^2 / (2 c1^2))``.

    Accepts scalars or arrays of ``x`` in ``[-pi, pi]``.
    """
    if c1 <= 0:
        raise ValueError("c1 must be positive")
    x = np.asarray(x, dtype=np.float64)
    k = _n_images(c1)
    shifts = 2.0 * np.pi * np.arange(-k, k + 1)
    terms = np.exp(-np.square(np.subtract.outer(x, shifts)) / (2.0 * c1 * c1))
    total = terms.sum(axis=-1) / c1
    return float(total) if total.ndim == 0 else total


def gaussian_fourier_coeff(omega, c1: float):
    """Exact Fourier series coefficients ``exp(-c1^2 w^2 / 2) / sqrt(2 pi)``."""
    if c1 <= 0:
        raise ValueError("c1 must be positive")
    w = np.asarray(omega, dtype=np.float64)
    out = INV_SQRT_2PI * np.exp(-0.5 * (c1 * w) ** 2)
    return float(out) if out.ndim == 0 else out


def modulated_fourier_coeff(q: int, omega, c1: float):
    """Coefficients of ``exp(-i q x) g(x)``, i.e. ``ghat_{w + q}``."""
    return gaussian_fourier_coeff(np.asarray(omega) + q, c1)


def gaussian_decay_bound(x, c1: float):
    """Majorant ``(3/c1 + 1/sqrt(2 pi)) exp(-x^2 / (2 c1^2))`` of the filter."""
    x = np.asarray(x, dtype=np.float64)
    out = (3.0 / c1 + INV_SQRT_2PI) * np.exp(-x * x / (2.0 * c1 * c1))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FilterParams:
    n: int
    r: float
    beta: float
    c1: float
    tau: float
    alpha: float
    kappa: int

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise ValueError("invalid filter parameters: " + "; ".join(problems))

    def violations(self) -> list[str]:
        n, out = self.n, []
        if n < 3:
            return [f"N={n} too small"]
        ln_n = math.log(n)
        if not 1 <= self.r <= n / 36:
            out.append(f"r={self.r} outside [1, N/36]")
        if self.beta < 4:
            out.append(f"beta={self.beta} < 4")
        if n < self.beta ** 2 * (1 - 1e-12):
            out.append(f"N={n} < beta^2={self.beta ** 2}")
        if not 0 < self.tau < INV_SQRT_2PI:
            out.append(f"tau={self.tau} outside (0, 1/sqrt(2pi))")
        if not 1 <= self.alpha <= n / math.sqrt(ln_n) * (1 + 1e-12):
            out.append(f"alpha={self.alpha} outside [1, N/sqrt(ln N)]")
        elif self.beta > self.alpha * math.sqrt(math.log(1.0 / (self.tau * math.sqrt(2 * math.pi))) / 2) * (1 + 1e-12):
            out.append("beta exceeds alpha*sqrt(ln(1/(tau sqrt(2pi)))/2)")
        if self.kappa < 1:
            out.append(f"kappa={self.kappa} < 1")
        if self.c1 <= 0:
            out.append("c1 must be positive")
        return out

    @property
    def half_width(self) -> int:
        """Passband half-width ``ceil(N / (alpha sqrt(ln N)))``."""
        return math.ceil(self.n / (self.alpha * math.sqrt(math.log(self.n))))


def guaranteed_kappa(n: int, r: float) -> int:
    """Truncation half-width ``ceil(6 r ln N / (sqrt(2) pi)) + 1``."""
    return math.ceil(6.0 * r * math.log(n) / (math.sqrt(2.0) * math.pi)) + 1


def select_params(n: int, r: float = 1.0, tau: float = 1.0 / 3.0) -> FilterParams:
    """Filter parameters giving an ``O(N^-r)`` truncated-convolution error.

    ``beta = 6 sqrt(r)``, ``c1 = beta sqrt(ln N) / N``, ``alpha`` from the
    passband-floor condition, clamped to ``[1, N/sqrt(ln N)]``.
    """
    if n < 36:
        raise ValueError(f"N must be >= 36, got {n}")
    if not 1 <= r <= n / 36:
        raise ValueError(f"r={r} outside [1, N/36] for N={n}")
    if not 0 < tau < INV_SQRT_2PI:
        raise ValueError(f"tau={tau} outside (0, 1/sqrt(2 pi))")
    ln_n = math.log(n)
    beta = 6.0 * math.sqrt(r)
    alpha = 6.0 * math.sqrt(2.0 * r) / math.log(1.0 / (tau * math.sqrt(2.0 * math.pi)))
    alpha = min(max(alpha, 1.0), n / math.sqrt(ln_n))
    c1 = beta * math.sqrt(ln_n) / n
    return FilterParams(n=n, r=r, beta=beta, c1=c1, tau=tau, alpha=alpha, kappa=guaranteed_kappa(n, r))


@dataclass(frozen=True)
class PassbandPlan:
    """Frequency centres ``c_j`` with half-width ``w``; band j is ``[c_j - w, c_j + w)``."""

    centers: tuple[int, ...]
    half_width: int
    count: int

    def band_of(self, omega: int) -> int:
        """Index of the first passband containing ``omega`` (-1 if none)."""
        for j, c in enumerate(self.centers):
            if c - self.half_width <= omega < c + self.half_width:
                return j
        return -1

    def covers(self, n: int) -> bool:
        band = FrequencyBand(n)
        covered = np.zeros(n, dtype=bool)
        for c in self.centers:
            lo = max(c - self.half_width, band.lower)
            hi = min(c + self.half_width - 1, band.upper)
            if lo <= hi:
                covered[lo - band.lower: hi - band.lower + 1] = True
        return bool(covered.all())


def passband_plan(n: int, params: FilterParams | float) -> PassbandPlan:
    """Centres ``-ceil(N/2) + 1 + (2j - 1) w`` for ``j = 1..ceil(c2)``.

    ``params`` may also be a bare ``alpha`` value.
    """
    alpha = float(getattr(params, "alpha", params))
    ln_n = math.log(n)
    w = math.ceil(n / (alpha * math.sqrt(ln_n)))
    count = math.ceil(alpha * math.sqrt(ln_n) / 2.0)
    first = -math.ceil(n / 2) + 1
    centers = [first + (2 * j - 1) * w for j in range(1, count + 1)]
    if len(centers) * 2 * w < n:
        centers.append(first + (2 * len(centers) + 1) * w)
    return PassbandPlan(centers=tuple(centers), half_width=w, count=count)
