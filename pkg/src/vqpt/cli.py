"""Command line entry point: ``vqpt run | bench | decompose``.

Exit codes: 0 success, 1 configuration/usage error, 2 numerical or domain error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .bench import ConfigError, emit, parse_config, parse_sweep, run_benchmark, write_intensity_dump
from .clements import decompose, reconstruct, write_mesh
from .numerics import DomainError, ShapeError, read_matrix

log = logging.getLogger("vqpt")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _read_config_text(path: str | None) -> str:
    if path is None:
        return ""
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc


def _print_report(report) -> None:
    for row in report.aggregates():
        print(f"{row['backend']:>8} d={row['depth']} it={row['iteration']:>3}  "
              f"cost={row['cost_mean']:.4f}±{row['cost_std']:.4f}  "
              f"F={row['fidelity_mean']:.4f}±{row['fidelity_std']:.4f}  "
              f"t={row['wall_time_s_mean']:.3f}s")


def cmd_run(args) -> int:
    overrides = {
        "backend": args.backend, "depth": args.depth, "seed": args.seed,
        "iterations": args.iters, "shots": args.shots, "phase_sigma": args.phase_sigma,
        "learning_rate": args.learning_rate,
    }
    cfg = parse_config(_read_config_text(args.config), overrides)
    out = Path(args.out or cfg.output)

    hook = None
    if args.dump_intensities:
        if cfg.backend != "photonic":
            log.warning("--dump-intensities only records photonic evaluations; nothing to dump")
        dump_dir = out / "intensities"
        dump_dir.mkdir(parents=True, exist_ok=True)

        def hook(c, rep, rec, trace):
            for inp, raw, floored, normalized in trace:
                name = f"{c.backend}_d{c.depth}_r{rep}_it{rec.iteration:03d}_in{inp}.csv"
                write_intensity_dump(dump_dir / name, raw, floored, normalized)

    report = run_benchmark([cfg], on_record=hook)
    _print_report(report)
    for p in emit(report, out):
        print(f"wrote {p}")
    return EXIT_OK


def cmd_bench(args) -> int:
    configs = parse_sweep(_read_config_text(args.config))
    report = run_benchmark(configs, workers=args.workers)
    _print_report(report)
    print(f"total wall time {report.total_wall_time_s:.2f}s")
    for p in emit(report, args.out):
        print(f"wrote {p}")
    return EXIT_OK


def cmd_decompose(args) -> int:
    try:
        u = read_matrix(args.matrix)
    except OSError as exc:
        raise ConfigError(f"cannot read matrix {args.matrix}: {exc.strerror}") from exc
    mesh = decompose(u)
    write_mesh(args.out, mesh)
    res = float(np.linalg.norm(reconstruct(mesh) - u))
    print(f"{len(mesh.cells)} cells on {mesh.m} modes, reconstruction residual {res:.3e}")
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vqpt", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one backend/depth over the configured replications")
    r.add_argument("--config", help="key = value config file (defaults if omitted)")
    r.add_argument("--out", help="output directory (default: config 'output')")
    r.add_argument("--backend", choices=["exact", "sampled", "photonic"])
    r.add_argument("--depth", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--iters", type=int)
    r.add_argument("--shots", type=int)
    r.add_argument("--phase-sigma", type=float)
    r.add_argument("--learning-rate", type=float)
    r.add_argument("--dump-intensities", action="store_true",
                   help="write mode,raw,floored,normalized CSVs for every recorded evaluation")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="sweep depths x backends x replications")
    b.add_argument("--config", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--workers", type=int, default=1, help="benchmark cells run in parallel")
    b.set_defaults(func=cmd_bench)

    d = sub.add_parser("decompose", help="Clements-decompose a matrix file into a mesh file")
    d.add_argument("--matrix", required=True)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_decompose)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, ShapeError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
