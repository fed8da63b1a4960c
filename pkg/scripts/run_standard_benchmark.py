"""Evaluate the standard synthetic fixture and compare with the train-mean baseline.

    python scripts/run_standard_benchmark.py [--seeds 5] [--out results/benchmark.json]

Each seed generates a fresh 50-run scenario; the script prints one line per
seed and a summary of the MAE ratio against the baseline.
"""

import argparse
import json
import time
from pathlib import Path

import numpy as np

from uf_prognost import PipelineConfig, run_evaluation
from uf_prognost.ingest import validate_series
from uf_prognost.simulate import STANDARD_SEED, standard_fixture


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5, help="number of consecutive seeds from the standard one")
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    rows = []
    for seed in range(STANDARD_SEED, STANDARD_SEED + args.seeds):
        t0 = time.perf_counter()
        report = run_evaluation(validate_series(standard_fixture(seed)), PipelineConfig())
        rows.append({
            "seed": seed,
            "scored": report.n_cycles,
            "mae": report.mae,
            "rmse": report.rmse,
            "coverage": report.coverage,
            "baseline_mae": report.baseline_mae,
            "seconds": time.perf_counter() - t0,
        })
        r = rows[-1]
        print(f"seed {seed}: n={r['scored']:4d}  MAE {r['mae']:.2f}  RMSE {r['rmse']:.2f}  "
              f"cov {r['coverage']:.1f}%  baseline {r['baseline_mae']:.2f}  ({r['seconds']:.1f}s)")

    ratio = np.array([r["mae"] / r["baseline_mae"] for r in rows])
    print(f"MAE / baseline: mean {ratio.mean():.3f}, worst {ratio.max():.3f}")
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(json.dumps(rows, indent=1) + "\n")


if __name__ == "__main__":
    main()
