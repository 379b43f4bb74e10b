#!/usr/bin/env python3
"""Depth x backend sweep written as one CSV plus JSON, with a per-iteration
summary of mean ± sample std over the Haar replications.

    python scripts/sweep.py --config configs/sweep.cfg --out results/sweep
"""

import argparse
from pathlib import Path

from vqpt.bench import emit, parse_sweep, run_benchmark


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(Path(__file__).parent.parent / "configs" / "sweep.cfg"))
    ap.add_argument("--out", default="results/sweep")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    configs = parse_sweep(Path(args.config).read_text())
    report = run_benchmark(configs, workers=args.workers)
    print(f"{'backend':>9} {'d':>2} {'it':>3} {'cost':>15} {'fidelity':>15} {'time/it [s]':>12}")
    for row in report.aggregates():
        print(f"{row['backend']:>9} {row['depth']:>2} {row['iteration']:>3} "
              f"{row['cost_mean']:7.4f}±{row['cost_std']:.4f} "
              f"{row['fidelity_mean']:7.4f}±{row['fidelity_std']:.4f} "
              f"{row['wall_time_s_mean']:12.3f}")
    for p in emit(report, args.out):
        print(f"wrote {p}")


if __name__ == "__main__":
    main()
