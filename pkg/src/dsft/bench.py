"""Benchmark harness: planted sparse signals, noise at a target SNR, sweeps.

Every trial derives its randomness (signal, noise, sample plan) from
``(seed, trial index)`` alone, so a sweep is reproducible regardless of how
many worker processes run it.  Wall time is the only nondeterministic
measurement and is left out of the CSV unless explicitly requested.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import SparseSpectrum, centered_dft, centered_idft, FrequencyBand
from .driver import ENGINES, DsftConfig, dsft
from .inner import top_budget

__all__ = [
    "BENCH_ENGINES",
    "CSV_HEADER",
    "TrialSpec",
    "TrialResult",
    "SweepRow",
    "gen_trial_signal",
    "add_noise",
    "avg_l1_error",
    "run_trial",
    "run_point",
    "run_sweep",
    "format_csv",
    "write_csv",
    "render_svg",
    "parse_grid",
    "grid_specs",
    "tune",
]

BENCH_ENGINES = (*ENGINES, "dense_fft")
CSV_HEADER = ("engine", "n", "s", "snr_db", "trials", "support_rate", "avg_l1", "mean_time_s", "mean_samples")
# inner engine knobs a grid file or the tuner may set
INNER_KNOBS = {"bins_per_sparsity": float, "repetitions": int, "scale_base": int,
               "consistency_tol": float, "failure_prob": float, "output_budget": int}


@dataclass(frozen=True)
class TrialSpec:
    n: int
    s: int
    trials: int
    seed: int = 0
    engine: str = "phase_mc"
    snr_db: float | None = None
    r: float = 1.0
    inner_options: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.engine not in BENCH_ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}; expected one of {BENCH_ENGINES}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 1 <= self.s <= self.n:
            raise ValueError(f"s={self.s} must lie in [1, N={self.n}]")
        if self.snr_db is not None and not math.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        for key, _ in self.inner_options:
            if key not in INNER_KNOBS:
                raise ValueError(f"unknown inner option {key!r}")

    def config(self, trial_seed: int) -> DsftConfig:
        opts = {k: INNER_KNOBS[k](v) for k, v in self.inner_options}
        return DsftConfig.for_engine(self.n, self.s, self.engine, r=self.r, seed=trial_seed, **opts)


@dataclass(frozen=True)
class TrialResult:
    support_recovered: bool
    avg_l1_error: float
    wall_time: float
    samples_read: int


@dataclass(frozen=True)
class SweepRow:
    spec: TrialSpec
    support_rate: float
    avg_l1: float            # over trials with correct support; nan if none
    mean_time_s: float
    mean_samples: float
    results: tuple[TrialResult, ...] = field(default=(), repr=False)


def _seed_triple(seed: int, index: int) -> tuple[int, int, int]:
    state = np.random.SeedSequence([int(seed), int(index)]).generate_state(3)
    return tuple(int(v) for v in state)


def gen_trial_signal(n: int, s: int, seed) -> tuple[np.ndarray, SparseSpectrum]:
    """``s`` distinct frequencies uniform on ``[0, N)`` mapped into B, unit-modulus
    coefficients with uniform phase; returns the grid samples and the truth."""
    if not 1 <= s <= n:
        raise ValueError(f"s={s} must lie in [1, N={n}]")
    rng = np.random.default_rng(seed)
    freqs = rng.choice(n, size=s, replace=False)
    freqs = np.where(freqs > n // 2, freqs - n, freqs)
    coeffs = np.exp(2j * np.pi * rng.random(s))
    truth = SparseSpectrum(freqs, coeffs)
    return centered_idft(truth.to_dense(n)), truth


def add_noise(f, snr_db: float, seed) -> tuple[np.ndarray, float]:
    """Complex Gaussian noise scaled so that ``20 log10(|f|_2 / |n|_2) = snr_db``."""
    f = np.asarray(f, dtype=np.complex128)
    f_norm = np.linalg.norm(f)
    if f_norm == 0:
        raise ValueError("SNR is undefined for a zero signal")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(f.size) + 1j * rng.standard_normal(f.size)
    noise *= f_norm / (np.linalg.norm(noise) * 10.0 ** (snr_db / 20.0))
    return f + noise, float(np.max(np.abs(noise)))


def avg_l1_error(truth: SparseSpectrum, recovered: SparseSpectrum) -> float:
    """``(1/s) sum_{w in S} |truth_w - recovered_w|`` over the true support ``S``."""
    if len(truth) == 0:
        raise ValueError("truth must be non-empty")
    got = recovered.as_dict()
    err = sum(abs(c - got.get(w, 0.0)) for w, c in truth.as_dict().items())
    return float(err / len(truth))


def _dense_baseline(f: np.ndarray, s: int) -> SparseSpectrum:
    n = f.size
    return top_budget(FrequencyBand(n).frequencies(), centered_dft(f), s)


def run_trial(spec: TrialSpec, index: int) -> TrialResult:
    """Trial ``index`` of ``spec``; fully determined by ``(spec.seed, index)``."""
    sig_seed, noise_seed, plan_seed = _seed_triple(spec.seed, index)
    f, truth = gen_trial_signal(spec.n, spec.s, sig_seed)
    if spec.snr_db is not None:
        f, _ = add_noise(f, spec.snr_db, noise_seed)
    start = time.perf_counter()
    if spec.engine == "dense_fft":
        found, samples = _dense_baseline(f, spec.s), spec.n
    else:
        result = dsft(f, spec.config(plan_seed))
        found, samples = result.spectrum, result.samples_read
    elapsed = time.perf_counter() - start
    return TrialResult(found.support() == truth.support(), avg_l1_error(truth, found), elapsed, samples)


def _summarize(spec: TrialSpec, results: Sequence[TrialResult]) -> SweepRow:
    good = [r.avg_l1_error for r in results if r.support_recovered]
    return SweepRow(
        spec=spec,
        support_rate=len(good) / len(results),
        avg_l1=float(np.mean(good)) if good else math.nan,
        mean_time_s=float(np.mean([r.wall_time for r in results])),
        mean_samples=float(np.mean([r.samples_read for r in results])),
        results=tuple(results),
    )


def _run_indexed(args: tuple[TrialSpec, int]) -> TrialResult:
    return run_trial(*args)


def run_point(spec: TrialSpec, workers: int = 1) -> SweepRow:
    jobs = [(spec, i) for i in range(spec.trials)]
    if workers > 1:
        # map preserves order, so the row does not depend on scheduling
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_indexed, jobs))
    else:
        results = [_run_indexed(job) for job in jobs]
    return _summarize(spec, results)


def run_sweep(specs: Iterable[TrialSpec], workers: int = 1) -> list[SweepRow]:
    return [run_point(spec, workers) for spec in specs]


def _num(x: float) -> str:
    return "nan" if math.isnan(x) else format(x, ".10g")


def format_csv(rows: Sequence[SweepRow], timing: bool = False) -> str:
    """CSV text with LF line endings; ``mean_time_s`` is blank unless ``timing``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        sp = row.spec
        writer.writerow([
            sp.engine, sp.n, sp.s,
            "" if sp.snr_db is None else _num(sp.snr_db),
            sp.trials,
            _num(row.support_rate),
            _num(row.avg_l1),
            _num(row.mean_time_s) if timing else "",
            _num(row.mean_samples),
        ])
    return buf.getvalue()


def write_csv(rows: Sequence[SweepRow], path, timing: bool = False) -> None:
    Path(path).write_bytes(format_csv(rows, timing).encode("utf-8"))


def render_svg(rows: Sequence[SweepRow], path) -> None:
    """Static chart: error vs SNR when SNR varies, else samples (and time) vs N, log-log."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    by_engine: dict[str, list[SweepRow]] = {}
    for row in rows:
        by_engine.setdefault(row.spec.engine, []).append(row)
    snr_sweep = len({r.spec.snr_db for r in rows}) > 1

    with matplotlib.rc_context({"svg.hashsalt": "dsft", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for engine, group in by_engine.items():
            if snr_sweep:
                pts = sorted((r.spec.snr_db, r.avg_l1) for r in group if r.spec.snr_db is not None)
                ax.semilogy([p[0] for p in pts], [p[1] for p in pts], marker="o", label=engine)
            else:
                pts = sorted((r.spec.n, r.mean_samples) for r in group)
                ax.loglog([p[0] for p in pts], [p[1] for p in pts], marker="o", label=engine)
        if snr_sweep:
            ax.set_xlabel("SNR (dB)")
            ax.set_ylabel("average L1 error")
        else:
            ax.set_xlabel("N")
            ax.set_ylabel("samples read")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


# -- grid files ---------------------------------------------------------------

_GRID_LIST_KEYS = ("engine", "n", "s", "snr")
_GRID_SCALAR_KEYS = ("trials", "seed", "r", "out", "svg", "workers", "timing")


def _split_values(raw: str) -> list[str]:
    raw = raw.strip()
    if raw.startswith("[") and raw.endswith("]"):
        raw = raw[1:-1]
    return [v.strip().strip("\"'") for v in raw.split(",") if v.strip()]


def parse_grid(text: str) -> dict[str, list[str]]:
    """Parse ``key = value[, value ...]`` lines; ``#`` starts a comment.

    Values may be wrapped in ``[...]`` and quoted, so simple TOML files parse too.
    """
    grid: dict[str, list[str]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and "=" not in line):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        known = _GRID_LIST_KEYS + _GRID_SCALAR_KEYS + tuple(INNER_KNOBS)
        if key not in known:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        values = _split_values(raw)
        if not values:
            raise ValueError(f"line {lineno}: no value for {key!r}")
        if key not in _GRID_LIST_KEYS and len(values) != 1:
            raise ValueError(f"line {lineno}: {key!r} takes a single value")
        grid[key] = values
    for key in ("engine", "n", "s"):
        if key not in grid:
            raise ValueError(f"grid is missing {key!r}")
    return grid


def _snr(v: str) -> float | None:
    return None if v.lower() in ("none", "inf", "") else float(v)


def grid_specs(grid: dict[str, list[str]]) -> list[TrialSpec]:
    """Cartesian product over ``engine``, ``n``, ``s`` and ``snr`` (in that nesting order)."""
    one = {k: v[0] for k, v in grid.items() if k not in _GRID_LIST_KEYS}
    inner = tuple(sorted((k, float(v)) for k, v in one.items() if k in INNER_KNOBS))
    specs = []
    for engine, n, s, snr in itertools.product(
            grid["engine"], grid["n"], grid["s"], grid.get("snr", ["none"])):
        specs.append(TrialSpec(
            n=int(n), s=int(s), trials=int(one.get("trials", 10)), seed=int(one.get("seed", 0)),
            engine=engine, snr_db=_snr(snr), r=float(one.get("r", 1.0)), inner_options=inner))
    return specs


# -- tuning -------------------------------------------------------------------

DEFAULT_TUNE_GRID = {"bins_per_sparsity": (2.0, 3.0, 4.0), "repetitions": (3, 5)}


def tune(n: int, s: int, engine: str = "phase_mc", trials: int = 20, seed: int = 0,
         snr_db: float | None = None, target: float = 0.9, grid=None,
         workers: int = 1) -> tuple[dict, list[SweepRow]]:
    """Grid search over inner knobs; picks the setting with the fewest mean
    samples among those reaching ``target`` support rate (best rate otherwise)."""
    if engine in ("oracle", "dense_fft"):
        raise ValueError(f"engine {engine!r} has no tunable knobs")
    grid = DEFAULT_TUNE_GRID if grid is None else grid
    keys = sorted(grid)
    rows = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        opts = tuple(zip(keys, (float(v) for v in combo)))
        spec = TrialSpec(n=n, s=s, trials=trials, seed=seed, engine=engine, snr_db=snr_db, inner_options=opts)
        rows.append(run_point(spec, workers))
    passing = [r for r in rows if r.support_rate >= target]
    best = (min(passing, key=lambda r: r.mean_samples) if passing
            else max(rows, key=lambda r: (r.support_rate, -r.mean_samples)))
    return {k: INNER_KNOBS[k](v) for k, v in best.spec.inner_options}, rows
