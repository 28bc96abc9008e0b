"""Command line entry point: ``dsft bench | sweep | transform | tune``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench
from .driver import ENGINES, DsftConfig, dsft

log = logging.getLogger("dsft")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


class ConfigError(Exception):
    pass


def _inner_options(args) -> tuple[tuple[str, float], ...]:
    opts = []
    for key in bench.INNER_KNOBS:
        value = getattr(args, key, None)
        if value is not None:
            opts.append((key, float(value)))
    return tuple(opts)


def _add_inner_knobs(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("inner engine knobs")
    g.add_argument("--bins-per-sparsity", dest="bins_per_sparsity", type=float)
    g.add_argument("--repetitions", type=int)
    g.add_argument("--scale-base", dest="scale_base", type=int)
    g.add_argument("--consistency-tol", dest="consistency_tol", type=float)


def _emit(rows, out, svg, timing: bool) -> None:
    text = bench.format_csv(rows, timing)
    if out is None:
        sys.stdout.write(text)
    else:
        bench.write_csv(rows, out, timing)
        log.info("wrote %s", out)
    if svg is not None:
        bench.render_svg(rows, svg)
        log.info("wrote %s", svg)


def cmd_bench(args) -> int:
    spec = bench.TrialSpec(n=args.n, s=args.s, trials=args.trials, seed=args.seed, engine=args.engine,
                           snr_db=args.snr, r=args.r, inner_options=_inner_options(args))
    _emit([bench.run_point(spec, args.workers)], args.out, args.svg, args.timing)
    return EXIT_OK


def cmd_sweep(args) -> int:
    path = Path(args.grid)
    text = path.read_text(encoding="utf-8")
    try:
        grid = bench.parse_grid(text)
        specs = bench.grid_specs(grid)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    scalar = {k: v[0] for k, v in grid.items()}

    def resolve(value):
        # paths in a grid file are relative to the file itself
        return None if value is None else path.parent / value

    out = args.out if args.out is not None else resolve(scalar.get("out"))
    svg = args.svg if args.svg is not None else resolve(scalar.get("svg"))
    workers = args.workers if args.workers is not None else int(scalar.get("workers", 1))
    timing = args.timing or scalar.get("timing", "false").lower() in ("1", "true", "yes")
    _emit(bench.run_sweep(specs, workers), out, svg, timing)
    return EXIT_OK


def _read_vector(path: Path, fmt: str) -> np.ndarray:
    if fmt == "csv":
        rows = []
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ConfigError(f"{path}:{lineno}: expected 're,im'")
            try:
                rows.append(complex(float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from exc
        return np.array(rows, dtype=np.complex128)
    raw = path.read_bytes()
    if len(raw) % 16:
        raise ConfigError(f"{path}: size {len(raw)} is not a multiple of 16 bytes")
    return np.frombuffer(raw, dtype="<f8").view("<c16").astype(np.complex128)


def cmd_transform(args) -> int:
    path = Path(args.input)
    fmt = args.format or ("csv" if path.suffix.lower() in (".csv", ".txt") else "raw")
    f = _read_vector(path, fmt)
    try:
        config = DsftConfig.for_engine(f.size, args.s, args.engine, r=args.r, seed=args.seed,
                                       **{k: bench.INNER_KNOBS[k](v) for k, v in _inner_options(args)})
        result = dsft(f, config)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    lines = ["omega,re,im"]
    lines += [f"{w},{c.real:.17g},{c.imag:.17g}" for w, c in result.spectrum]
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_bytes(text.encode("utf-8"))
    log.info("samples read: %d of %d", result.samples_read, f.size)
    return EXIT_OK


def cmd_tune(args) -> int:
    best, rows = bench.tune(args.n, args.s, args.engine, trials=args.trials, seed=args.seed,
                            snr_db=args.snr, target=args.target, workers=args.workers)
    _emit(rows, args.out, None, args.timing)
    print("best: " + " ".join(f"--{k.replace('_', '-')} {v}" for k, v in sorted(best.items())),
          file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dsft", description="Sparse DFT from sublinearly many samples.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, snr=True):
        p.add_argument("--trials", type=int, default=10)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--timing", action="store_true", help="fill mean_time_s (output no longer reproducible)")
        if snr:
            p.add_argument("--snr", type=float, default=None, help="SNR in dB; omit for noiseless")

    p = sub.add_parser("bench", help="run one grid point")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--engine", choices=bench.BENCH_ENGINES, default="phase_mc")
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--out")
    p.add_argument("--svg")
    common(p)
    _add_inner_knobs(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="run every point of a key=value grid file")
    p.add_argument("--grid", required=True)
    p.add_argument("--out")
    p.add_argument("--svg")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("transform", help="sparse DFT of a vector read from a file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", choices=("csv", "raw"), help="csv rows 're,im' or raw little-endian float64 pairs")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--engine", choices=ENGINES, default="phase_mc")
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    _add_inner_knobs(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("tune", help="grid-search inner engine knobs for a target support rate")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--engine", choices=("phase_mc", "dmsft4", "dmsft6"), default="phase_mc")
    p.add_argument("--target", type=float, default=0.9)
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=cmd_tune, trials=20)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"dsft: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"dsft: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
