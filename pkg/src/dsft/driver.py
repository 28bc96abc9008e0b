"""The fully discrete sparse DFT: passband sweep around an inner SFT.

For every passband centre ``c`` the signal is filtered with the periodized
Gaussian modulated to ``c`` (modulation ``q = -c``, so the filter response
``ghat_{w+q}`` peaks at ``w = c``), the filtered function is evaluated at the
inner engine's nodes by truncated convolution, and the engine's output is
restricted to ``[c - w, c + w)`` and divided by the filter response there.
The ``s`` largest unbiased coefficients across all passbands are returned.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .conv import WindowTable, filtered_grid_samples
from .core import FrequencyBand, SparseSpectrum, as_signal
from .filter import FilterParams, PassbandPlan, modulated_fourier_coeff, passband_plan, select_params
from .inner import InnerSftConfig, NoisySamples, plan, recover

__all__ = [
    "PRESETS",
    "ENGINES",
    "DsftConfig",
    "BandCandidates",
    "RecoveryResult",
    "dsft",
    "unbias",
    "top_s_merge",
]

# truncation half-widths of the fixed-window variants
PRESETS = {"dmsft4": 4, "dmsft6": 6}
ENGINES = ("oracle", "phase_mc", *PRESETS)


@dataclass(frozen=True)
class DsftConfig:
    s: int
    inner: InnerSftConfig
    r: float = 1.0
    tau: float = 1.0 / 3.0
    kappa_override: int | None = None
    seed: int = 0

    def __post_init__(self):
        n = self.inner.n
        if not 2 <= self.s <= n:
            raise ValueError(f"s={self.s} must lie in [2, N={n}]")
        if not 1 <= self.r <= n / 36:
            raise ValueError(f"r={self.r} must lie in [1, N/36] for N={n}")
        if self.kappa_override is not None and self.kappa_override < 1:
            raise ValueError("kappa_override must be >= 1")

    @classmethod
    def for_engine(cls, n: int, s: int, engine: str = "phase_mc", *, r: float = 1.0,
                   tau: float = 1.0 / 3.0, seed: int = 0, **inner_options) -> "DsftConfig":
        """Build a config from an engine id (``oracle``, ``phase_mc``, ``dmsft4``, ``dmsft6``)."""
        if engine not in ENGINES:
            raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
        variant = "oracle" if engine == "oracle" else "phase_mc"
        inner = InnerSftConfig(s=s, n=n, variant=variant, seed=seed, **inner_options)
        return cls(s=s, inner=inner, r=r, tau=tau, kappa_override=PRESETS.get(engine), seed=seed)

    @property
    def n(self) -> int:
        return self.inner.n

    def filter_params(self) -> FilterParams:
        params = select_params(self.n, self.r, self.tau)
        if self.kappa_override is not None:
            params = dataclasses.replace(params, kappa=self.kappa_override)
        return params


@dataclass(frozen=True)
class BandCandidates:
    center: int
    q: int
    kept: tuple[tuple[int, complex], ...]


@dataclass(frozen=True)
class RecoveryResult:
    spectrum: SparseSpectrum
    samples_read: int
    per_band_candidates: tuple[BandCandidates, ...] = field(default=(), repr=False)


def unbias(candidate: tuple[int, complex], q: int, c1: float,
           half_width: int | None = None) -> tuple[int, complex]:
    """Divide a filtered coefficient by the modulated filter response ``ghat_{w+q}``.

    With ``half_width`` given, ``w`` must lie in the passband ``[-q - w, -q + w)``.
    """
    omega, coeff = candidate
    if half_width is not None and not (-q - half_width <= omega < -q + half_width):
        raise ValueError(f"frequency {omega} outside the passband of q={q} (half-width {half_width})")
    return omega, coeff / modulated_fourier_coeff(q, omega, c1)


def top_s_merge(candidates, s: int) -> SparseSpectrum:
    """First occurrence per frequency, then the ``s`` largest magnitudes.

    Ties are broken by smaller ``|w|``, then smaller ``w``.
    """
    seen: dict[int, complex] = {}
    for omega, coeff in candidates:
        seen.setdefault(int(omega), complex(coeff))
    ranked = sorted(seen.items(), key=lambda kv: (-abs(kv[1]), abs(kv[0]), kv[0]))[:s]
    return SparseSpectrum.from_pairs(ranked)


def _band_filter(est: SparseSpectrum, center: int, w: int, band: FrequencyBand) -> np.ndarray:
    lo, hi = max(center - w, band.lower), min(center + w - 1, band.upper)
    return (est.freqs >= lo) & (est.freqs <= hi)


def dsft(f, config: DsftConfig) -> RecoveryResult:
    """Sparse approximation of the centered DFT of ``f`` from sublinearly many entries."""
    n = len(f)
    if n != config.n:
        raise ValueError(f"signal length {n} != configured N={config.n}")
    if n < 36:
        raise ValueError("N must be >= 36")
    params = config.filter_params()
    passbands: PassbandPlan = passband_plan(n, params)
    band = FrequencyBand(n)
    w = passbands.half_width
    inner = config.inner

    if inner.variant == "oracle":
        f = as_signal(f)
        f_fft = np.fft.fft(f)
        samples_read = n

        def filtered(q):
            return filtered_grid_samples(f, params.c1, q, params.kappa, f_fft)
        touched = f
    else:
        table = WindowTable.build(plan(inner).points, n, params.c1, params.kappa)
        touched = table.gather(f)
        samples_read = table.samples_read

        def filtered(q):
            return table.evaluate(None, q, gathered=touched)

    if not np.any(touched):
        return RecoveryResult(SparseSpectrum.empty(), samples_read, ())

    candidates = []
    per_band = []
    for center in passbands.centers:
        q = -center
        est = recover(inner, NoisySamples(filtered(q)))
        mask = _band_filter(est, center, w, band)
        kept = tuple(unbias((int(om), c), q, params.c1, w)
                     for om, c in zip(est.freqs[mask], est.coeffs[mask]))
        per_band.append(BandCandidates(center, q, kept))
        candidates.extend(kept)
    return RecoveryResult(top_s_merge(candidates, config.s), samples_read, tuple(per_band))
