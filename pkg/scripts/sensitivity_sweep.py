"""Sweep k and the dHI partition range on the standard fixture.

    python scripts/sensitivity_sweep.py [--k 1 5 10 20] [--dhi 1.0 0.2 0.05]

Per-cycle HI differences are small, so with dHI centers at -1/0/+1 almost
every dHI degree lands on Medium. Narrowing the range moves some of that mass
onto Low and High; the last column reports how often mined rule terms are a
non-Medium dHI label.
"""

import argparse
import itertools

from uf_prognost import PipelineConfig
from uf_prognost.evaluation import chronological_split, evaluate_runs
from uf_prognost.fuzzy import make_uniform_partition
from uf_prognost.ingest import validate_series
from uf_prognost.prognosis import Match, build_library, mine_rule
from uf_prognost.segmentation import segment_series
from uf_prognost.simulate import standard_fixture


def informative_dhi_share(runs, config):
    """Fraction of mined antecedents that are dHI Low/High."""
    train, _ = chronological_split(runs, config.train_fraction)
    hi_p = make_uniform_partition(*config.hi_range, feature="HI")
    dhi_p = make_uniform_partition(*config.dhi_range, feature="dHI")
    lib = build_library(train, hi_p, dhi_p, config.window_length)
    hits = total = 0
    for i in range(0, len(lib), 7):
        for a in mine_rule(Match(i, 1.0, int(lib.rul[i])), lib).antecedents:
            total += 1
            hits += a.feature == "dHI" and a.label != "Medium"
    return hits / total


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, nargs="+", default=[1, 5, 10, 20])
    ap.add_argument("--dhi", type=float, nargs="+", default=[1.0, 0.2, 0.05],
                    help="half-widths w of the dHI range [-w, w]")
    args = ap.parse_args()

    series = validate_series(standard_fixture())
    base = PipelineConfig()
    runs = segment_series(series, base).runs
    print(f"{'k':>3} {'dHI range':>14} {'MAE':>7} {'RMSE':>7} {'cov %':>7} {'dHI L/H terms':>14}")
    for k, w in itertools.product(args.k, args.dhi):
        cfg = base.replace(top_k=k, dhi_range=(-w, w))
        rep = evaluate_runs(runs, cfg)
        share = informative_dhi_share(runs, cfg)
        print(f"{k:>3} {f'[-{w:g}, {w:g}]':>14} {rep.mae:>7.2f} {rep.rmse:>7.2f} {rep.coverage:>7.1f} "
              f"{100 * share:>13.1f}%")
    print(f"baseline MAE (train mean): {rep.baseline_mae:.2f}")


if __name__ == "__main__":
    main()
