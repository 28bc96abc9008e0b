"""Pluggable nonadaptive SFT engines that consume off-grid samples.

Every engine follows the same two-step contract: :func:`plan` fixes the
sample nodes from the configuration alone, then :func:`recover` turns the
(possibly noisy) values at those nodes into a sparse spectrum.  Frequencies
are reported on the centered band ``B`` (reduced modulo ``N``) together with
the coefficient a grid-sampled version of the function would show there.

Two engines ship:

``oracle``
    Reads the ``N`` equispaced nodes and takes a dense centered DFT.  Exact
    on band-limited input; useful as a reference and for small ``N``.

``phase_mc``
    Randomised phase-encoding engine.  Each repetition samples ``p``-point
    aliasing grids (``p`` a random prime near ``c*s``), once unshifted and
    once per scale shifted by ``D**l`` grid cells.  An isolated frequency
    ``v`` in aliased bin ``b`` rotates the bin value by ``2 pi D**l v / N`` under
    the shift, so the phases pin ``v`` modulo ``N`` scale by scale; the bin
    residue ``v = b (mod p)`` fixes the last digits.  Bins that are not
    consistent with a single tone are discarded, and a frequency is only
    emitted when its bin is energetic in a majority of repetitions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import FrequencyBand, SparseSpectrum, centered_dft, grid_points

__all__ = [
    "VARIANTS",
    "InnerSftConfig",
    "SamplePlan",
    "NoisySamples",
    "plan",
    "recover",
    "top_budget",
]

VARIANTS = ("oracle", "phase_mc")
TWO_PI = 2.0 * math.pi
_POOL_FLOOR = 1.0 / 6.0   # fraction of the consistency tolerance always pooled
_MAX_PASSES = 8
_ZERO_REL = 1e-12


@dataclass(frozen=True)
class InnerSftConfig:
    s: int
    n: int
    variant: str = "oracle"
    failure_prob: float = 0.1
    output_budget: int | None = None
    seed: int = 0
    # phase_mc engineering constants
    bins_per_sparsity: float = 4.0
    repetitions: int | None = None
    scale_base: int = 16
    consistency_tol: float = 0.5

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown inner SFT variant {self.variant!r}; expected one of {VARIANTS}")
        if self.n < 1:
            raise ValueError("bandwidth N must be positive")
        if not 2 <= self.s <= self.n:
            raise ValueError(f"sparsity s={self.s} must lie in [2, N={self.n}]")
        if not 0 < self.failure_prob <= 1 / 3:
            raise ValueError("failure_prob must lie in (0, 1/3]")
        budget = self.output_budget if self.output_budget is not None else min(2 * self.s, self.n)
        if not self.s <= budget <= 4 * self.s:
            raise ValueError(f"output_budget={budget} must lie in [s, 4s]")
        object.__setattr__(self, "output_budget", int(budget))
        if self.repetitions is None:
            # 3 repetitions at p = 0.1, two more per extra decade of confidence
            reps = 2 * math.ceil(math.log10(1.0 / self.failure_prob) - 1e-12) + 1
            object.__setattr__(self, "repetitions", max(3, reps))
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.scale_base < 2:
            raise ValueError("scale_base must be >= 2")
        if self.bins_per_sparsity <= 0:
            raise ValueError("bins_per_sparsity must be positive")


@dataclass(frozen=True, eq=False)
class SamplePlan:
    """Nonadaptive nodes in ``[-pi, pi)``.

    For ``phase_mc`` the points are laid out repetition-major, then shift,
    then grid index; ``primes`` and ``shifts`` describe that layout.
    """

    points: np.ndarray
    primes: tuple[int, ...] = ()
    shifts: tuple[int, ...] = ()

    @property
    def m(self) -> int:
        return int(self.points.size)

    def __len__(self) -> int:
        return self.m


@dataclass(frozen=True, eq=False)
class NoisySamples:
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.complex128).reshape(-1))

    def __len__(self) -> int:
        return int(self.values.size)


def _primes_from(lo: int, hi: int) -> list[int]:
    out = []
    for k in range(max(lo, 2), hi + 1):
        if all(k % d for d in range(2, int(k ** 0.5) + 1)):
            out.append(k)
    return out


def _choose_primes(cfg: InnerSftConfig, rng: np.random.Generator) -> list[int]:
    lo = max(5, math.ceil(cfg.bins_per_sparsity * cfg.s))
    hi = max(lo + 8, math.ceil(1.25 * lo))
    pool = [p for p in _primes_from(lo, hi) if cfg.n % p]
    while len(pool) < cfg.repetitions + 2:
        hi = math.ceil(hi * 1.25) + 8
        pool = [p for p in _primes_from(lo, hi) if cfg.n % p]
    picked = rng.choice(len(pool), size=cfg.repetitions, replace=False)
    return [pool[i] for i in sorted(picked)]


def _scale_shifts(n: int, p_min: int, base: int) -> list[int]:
    # enough scales that the last phase step leaves less than p/2 ambiguity: base**L > N/p
    levels = 1
    while base ** levels * p_min <= n:
        levels += 1
    return [base ** l for l in range(levels)]


@lru_cache(maxsize=256)
def plan(config: InnerSftConfig) -> SamplePlan:
    """Sample nodes for ``config``; deterministic given the seed."""
    n = config.n
    if config.variant == "oracle":
        pts = grid_points(n)
        pts.setflags(write=False)
        return SamplePlan(pts)
    rng = np.random.default_rng(config.seed)
    primes = _choose_primes(config, rng)
    shifts = _scale_shifts(n, min(primes), config.scale_base)
    chunks = []
    for p in primes:
        base = -np.pi + TWO_PI * np.arange(p) / p
        for k in (0, *shifts):
            chunks.append(base + TWO_PI * k / n)
    pts = np.concatenate(chunks)
    pts = (pts + np.pi) % TWO_PI - np.pi
    pts.setflags(write=False)
    return SamplePlan(pts, tuple(primes), tuple(shifts))


def top_budget(freqs: np.ndarray, coeffs: np.ndarray, budget: int) -> SparseSpectrum:
    """Largest ``budget`` coefficients; ties go to smaller ``|w|`` then smaller ``w``."""
    mags = np.abs(coeffs)
    if budget < mags.size:
        # keep everything tied with the budget-th magnitude so ties resolve below
        kth = np.partition(mags, mags.size - budget)[mags.size - budget]
        pre = np.flatnonzero(mags >= kth)
        freqs, coeffs, mags = freqs[pre], coeffs[pre], mags[pre]
    order = np.lexsort((freqs, np.abs(freqs), -mags))[:budget]
    return SparseSpectrum(freqs[order], coeffs[order])


def recover(config: InnerSftConfig, samples: NoisySamples) -> SparseSpectrum:
    """Sparse approximation from the values at ``plan(config).points``."""
    sample_plan = plan(config)
    values = samples.values
    if values.size != sample_plan.m:
        raise ValueError(f"expected {sample_plan.m} samples, got {values.size}")
    if not np.any(values):
        return SparseSpectrum.empty()
    if config.variant == "oracle":
        dense = centered_dft(values)
        freqs = FrequencyBand(config.n).frequencies()
        # round-off level coefficients are not reported
        keep = np.abs(dense) > _ZERO_REL * np.max(np.abs(dense))
        return top_budget(freqs[keep], dense[keep], config.output_budget)
    return _recover_phase(config, sample_plan, values)


def _bin_tables(sample_plan: SamplePlan, values: np.ndarray) -> list[np.ndarray]:
    """Per repetition, the aliased bin values ``A[l, b]`` (row 0 unshifted)."""
    tables, pos = [], 0
    rows = 1 + len(sample_plan.shifts)
    for p in sample_plan.primes:
        block = values[pos: pos + rows * p].reshape(rows, p)
        tables.append(np.fft.fft(block, axis=1) / p)
        pos += rows * p
    return tables


def _identify(table: np.ndarray, p: int, n: int, shifts: tuple[int, ...], base: int) -> np.ndarray:
    """Integer frequency per bin implied by the phase rotations (vectorised)."""
    a0 = table[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        phase = np.angle(table[1:] / a0) / TWO_PI          # (L, p), in (-1/2, 1/2]
    u = np.mod(phase[0], 1.0)                               # shift of one cell -> v/N mod 1
    for level in range(1, len(shifts)):
        k = shifts[level]
        m = np.round(k * u - phase[level])
        u = np.mod((phase[level] + m) / k, 1.0)
    target = u * n
    b = np.arange(p)
    best = None
    best_dist = None
    for wrap in (0, -1):
        t = target + wrap * n
        tr = np.round(t)
        r = np.mod(b - tr, p)
        r = np.where(r > p / 2, r - p, r)
        cand = tr + r
        dist = np.abs(cand - t)
        if best is None:
            best, best_dist = cand, dist
        else:
            take = dist < best_dist
            best = np.where(take, cand, best)
            best_dist = np.where(take, dist, best_dist)
    return best.astype(np.int64)


def _rotations(nu: np.ndarray, shifts: tuple[int, ...], n: int) -> np.ndarray:
    """``exp(i nu eps_l)`` for every shift, with the angle reduced exactly."""
    ks = np.asarray(shifts, dtype=np.int64)
    return np.exp(TWO_PI * 1j * np.mod(np.multiply.outer(ks, nu), n) / n)


def _rep_estimates(cols: np.ndarray, nus: np.ndarray, shifts, n: int, tol: float, floor: float):
    """Grid estimates, clean flag and relative residual for bin columns ``cols``
    (one column per frequency in ``nus``; row 0 unshifted)."""
    a0 = cols[0]
    rot = _rotations(nus, shifts, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.max(np.abs(cols[1:] - a0 * rot), axis=0) / np.abs(a0)
    ok = (np.abs(a0) > floor) & (rel <= tol)
    return np.vstack([a0, cols[1:] * np.conj(rot)]), ok, np.where(ok, rel, np.inf)


def _pooled(per_rep, count: int, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Median over the grids of the cleanest repetitions (nan where none is clean).

    A bin shared with a weaker tone can pass the check yet carry a visible
    bias, so only repetitions within twice the best residual are pooled.
    """
    rels = np.array([r[2] for r in per_rep])                    # (reps, F)
    best = rels.min(axis=0)
    cutoff = np.maximum(2.0 * best, _POOL_FLOOR * tol)
    ests = np.stack([r[0] for r in per_rep])                    # (reps, grids, F)
    use = np.isfinite(rels) & (rels <= cutoff)
    mask = np.broadcast_to(use[:, None, :], ests.shape)

    # medians are taken in a frame aligned with the mean, which keeps the
    # estimate equivariant under complex scaling of the input
    frame = np.exp(-1j * np.angle((ests * mask).sum(axis=(0, 1))))
    ests = ests * frame

    def part(x):
        # nan marks excluded grids; a complex nan would leave its imaginary part at 0
        x = np.where(mask, x, np.nan).transpose(2, 0, 1).reshape(count, -1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)   # all-nan rows stay nan
            return np.nanmedian(x, axis=1)

    est = (part(ests.real) + 1j * part(ests.imag)) / frame
    return est, best


def _recover_phase(config: InnerSftConfig, sample_plan: SamplePlan, values: np.ndarray) -> SparseSpectrum:
    n = config.n
    shifts = sample_plan.shifts
    primes = sample_plan.primes
    tol = config.consistency_tol
    tables = _bin_tables(sample_plan, values)
    peak = max(float(np.max(np.abs(t[0]))) for t in tables)
    floor = 1e-10 * peak
    need = len(tables) // 2 + 1

    # peeling: accept tones supported by a majority of repetitions, remove
    # them from every table, and look again in the bins they used to share
    accepted: dict[int, complex] = {}
    for _pass in range(_MAX_PASSES):
        found: set[int] = set()
        for p, table in zip(primes, tables):
            nu = _identify(table, p, n, shifts, config.scale_base)
            _, ok, _ = _rep_estimates(table, nu, shifts, n, tol, floor)
            found.update(int(v) for v in nu[ok])
        found -= accepted.keys()
        if not found:
            break
        nus = np.array(sorted(found), dtype=np.int64)
        per_rep = [_rep_estimates(t[:, np.mod(nus, p)], nus, shifts, n, tol, floor)
                   for p, t in zip(primes, tables)]
        est, _ = _pooled(per_rep, nus.size, tol)
        # a repetition supports a frequency when its bin is clean and holds
        # the same value; noise bins can look clean but are far too weak
        votes = np.zeros(nus.size, dtype=np.int64)
        for ests, ok, _rel in per_rep:
            votes += ok & (np.abs(ests[0] - est) <= tol * np.abs(est))
        # frequencies seen but not yet supported may become clean once their
        # neighbours are peeled, so they are simply looked for again
        take = np.flatnonzero((votes >= need) & np.isfinite(est))
        if take.size == 0:
            break
        rot = _rotations(nus[take], shifts, n)
        for p, table in zip(primes, tables):
            contrib = np.vstack([np.ones(take.size), rot]) * est[take]
            np.subtract.at(table, (slice(None), np.mod(nus[take], p)), contrib)
        accepted.update(zip(nus[take].tolist(), est[take].tolist()))

    if not accepted:
        return SparseSpectrum.empty()

    # refine: each tone's estimate from the tables with only itself put back
    nus = np.array(sorted(accepted), dtype=np.int64)
    coeffs = np.array([accepted[v] for v in nus.tolist()])
    rot = np.vstack([np.ones(nus.size), _rotations(nus, shifts, n)]) * coeffs
    per_rep = []
    for p, table in zip(primes, tables):
        bins = np.mod(nus, p)
        restored = table[:, bins] + rot
        # other accepted tones in the same bin were already removed
        per_rep.append(_rep_estimates(restored, nus, shifts, n, tol, floor))
    refined, best = _pooled(per_rep, nus.size, tol)
    coeffs = np.where(np.isfinite(best), refined, coeffs)

    band = FrequencyBand(n)
    omegas = band.wrap(nus)
    coeffs = coeffs * np.where(omegas % 2 == 0, 1.0, -1.0)
    # two representatives of one frequency modulo N can both be decoded; keep the stronger
    order = np.argsort(-np.abs(coeffs), kind="stable")
    _, first = np.unique(omegas[order], return_index=True)
    sel = order[np.sort(first)]
    return top_budget(omegas[sel], coeffs[sel], config.output_budget)
