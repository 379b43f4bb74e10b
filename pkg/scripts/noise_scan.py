#!/usr/bin/env python3
"""Final process fidelity on the photonic backend as heater phase noise grows.

    python scripts/noise_scan.py --depth 6 --seeds 5 --iters 10 --out noise_scan.csv
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from vqpt.photonic import NoiseConfig
from vqpt.tomography import Photonic, TomographyConfig, run_tomography


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depth", type=int, default=6)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--iters", type=int, default=10)
    ap.add_argument("--sigmas", type=float, nargs="+", default=[0.0, 0.02, 0.05, 0.1, 0.2, 0.4])
    ap.add_argument("--floor", action="store_true", help="add the 1%% detector offset operating point")
    ap.add_argument("--out", default="noise_scan.csv")
    args = ap.parse_args()

    rows = []
    for sigma in args.sigmas:
        noise = NoiseConfig.lab_floor(sigma) if args.floor else NoiseConfig(phase_sigma=sigma)
        finals = []
        for seed in range(args.seeds):
            cfg = TomographyConfig(d=args.depth, seed=seed, iterations=args.iters, backend=Photonic(noise))
            finals.append(run_tomography(cfg).records[-1].fidelity)
        mean, std = np.mean(finals), np.std(finals, ddof=1) if len(finals) > 1 else 0.0
        print(f"sigma={sigma:<5} F={mean:.4f} ± {std:.4f}")
        rows.append([sigma, f"{mean:.12g}", f"{std:.12g}"])

    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["phase_sigma", "fidelity_mean", "fidelity_std"])
        w.writerows(rows)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
