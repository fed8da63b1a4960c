"""Chronological split, error metrics and horizon-stratified reports."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import DataError, PipelineConfig
from .fuzzy import make_uniform_partition
from .ingest import SensorSeries
from .prognosis import build_library, predict_batch, run_signatures
from .segmentation import Run, segment_series

# inclusive integer bins; the last one is open-ended
STRATA = (("0-5", 0, 5), ("6-15", 6, 15), ("16-30", 16, 30), ("31+", 31, None))

# reference figures for the Port Hueneme UF dataset, shown next to measured
# values when a real dataset is evaluated; never asserted
REFERENCE = {
    "overall": {"n": 2668, "mae": 4.08, "rmse": 6.28, "coverage": 68.6},
    "0-5": {"n": 371, "mae": 6.11, "rmse": 7.54, "coverage": 33.4},
    "6-15": {"n": 611, "mae": 3.67, "rmse": 4.77, "coverage": 64.8},
    "16-30": {"n": 528, "mae": 7.22, "rmse": 8.71, "coverage": 55.5},
    "31+": {"n": 239, "mae": 9.28, "rmse": 10.70, "coverage": 48.1},
}


@dataclass(frozen=True)
class QueryRecord:
    run_id: int
    cycle_index: int
    actual: int
    predicted: float
    lo: float
    hi: float


@dataclass(frozen=True)
class Metrics:
    n: int
    mae: float
    rmse: float
    coverage: float  # percent


@dataclass
class EvalReport:
    n_cycles: int
    mae: float
    rmse: float
    coverage: float
    strata: list[tuple[str, Metrics]]
    config_digest: str
    records: list[QueryRecord]
    baseline_mae: float | None = None
    counts: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    show_reference: bool = False

    def to_dict(self) -> dict:
        def clean(x):
            return None if x is None or (isinstance(x, float) and math.isnan(x)) else x

        return {
            "format": "uf-prognost/report",
            "version": 1,
            "config_digest": self.config_digest,
            "config": self.config,
            "overall": {"n": self.n_cycles, "mae": clean(self.mae), "rmse": clean(self.rmse),
                        "coverage": clean(self.coverage)},
            "baseline_mae": clean(self.baseline_mae),
            "strata": [
                {"horizon": name, "n": m.n, "mae": clean(m.mae), "rmse": clean(m.rmse),
                 "coverage": clean(m.coverage)}
                for name, m in self.strata
            ],
            "counts": dict(sorted(self.counts.items())),
            "reference": REFERENCE if self.show_reference else None,
        }

    def table(self) -> str:
        ref = self.show_reference
        head = f"{'RUL horizon':<12}{'n':>7}{'MAE':>9}{'RMSE':>9}{'Cov %':>8}"
        if ref:
            head += f"   | {'ref n':>6}{'ref MAE':>9}{'ref RMSE':>10}{'ref Cov':>9}"
        lines = [head, "-" * len(head)]

        def row(name, m: Metrics):
            s = f"{name:<12}{m.n:>7}{_fmt(m.mae, 9)}{_fmt(m.rmse, 9)}{_fmt(m.coverage, 8, 1)}"
            if ref:
                r = REFERENCE[name.lower()] if name == "Overall" else REFERENCE[name]
                s += f"   | {r['n']:>6}{r['mae']:>9.2f}{r['rmse']:>10.2f}{r['coverage']:>9.1f}"
            return s

        for name, m in self.strata:
            lines.append(row(name, m))
        lines.append("-" * len(head))
        lines.append(row("Overall", Metrics(self.n_cycles, self.mae, self.rmse, self.coverage)))
        if self.baseline_mae is not None:
            lines.append(f"Train-mean baseline MAE: {self.baseline_mae:.2f}")
        lines.append(f"Config digest: {self.config_digest}")
        return "\n".join(lines) + "\n"

    def records_csv(self) -> str:
        out = ["run_id,cycle_index,actual,predicted,lo,hi"]
        for r in self.records:
            out.append(f"{r.run_id},{r.cycle_index},{r.actual},{r.predicted!r},{r.lo!r},{r.hi!r}")
        return "\n".join(out) + "\n"


def _fmt(x: float, width: int, digits: int = 2) -> str:
    return f"{'-':>{width}}" if math.isnan(x) else f"{x:>{width}.{digits}f}"


def train_count(n_runs: int, train_fraction: float = 0.8) -> int:
    """round(fraction * N) with halves going to train, kept within [1, N-1]."""
    n = math.floor(train_fraction * n_runs + 0.5)
    return min(max(n, 1), n_runs - 1)


def chronological_split(runs: Sequence[Run], train_fraction: float = 0.8) -> tuple[list[Run], list[Run]]:
    if len(runs) < 2:
        raise DataError(f"need at least 2 runs to split, got {len(runs)}")
    runs = sorted(runs, key=lambda r: r.start_time)
    n = train_count(len(runs), train_fraction)
    return list(runs[:n]), list(runs[n:])


def compute_metrics(records: Iterable) -> Metrics:
    """MAE, RMSE and interval coverage over (actual, predicted, (lo, hi)) records.

    Accepts :class:`QueryRecord` objects or plain tuples.
    """
    rows = []
    for r in records:
        if isinstance(r, QueryRecord):
            rows.append((r.actual, r.predicted, r.lo, r.hi))
        else:
            a, p, (lo, hi) = r
            rows.append((a, p, lo, hi))
    if not rows:
        raise ValueError("no records to score")
    a, p, lo, hi = (np.array(c, dtype=float) for c in zip(*rows))
    err = a - p
    return Metrics(
        n=len(rows),
        mae=float(np.mean(np.abs(err))),
        rmse=float(np.sqrt(np.mean(err**2))),
        coverage=float(100.0 * np.mean((lo <= a) & (a <= hi))),
    )


def horizon_bin(actual: int) -> str:
    for name, lo, hi in STRATA:
        if actual >= lo and (hi is None or actual <= hi):
            return name
    raise ValueError(f"negative RUL {actual}")


def stratify(records: Sequence[QueryRecord]) -> list[tuple[str, Metrics]]:
    groups: dict[str, list] = {name: [] for name, _, _ in STRATA}
    for r in records:
        groups[horizon_bin(int(r.actual))].append(r)
    nan = float("nan")
    return [
        (name, compute_metrics(g) if g else Metrics(0, nan, nan, nan))
        for name, g in groups.items()
    ]


def evaluate_runs(runs: Sequence[Run], config: PipelineConfig = PipelineConfig(),
                  threads: int | None = None) -> EvalReport:
    """Split, build a library on train, predict every eligible test cycle."""
    train, test = chronological_split(runs, config.train_fraction)
    hi_p = make_uniform_partition(*config.hi_range, feature="HI")
    dhi_p = make_uniform_partition(*config.dhi_range, feature="dHI")
    L = config.window_length
    library = build_library(train, hi_p, dhi_p, L, {"config_digest": config.digest()})

    counts = Counter(train_runs=len(train), test_runs=len(test), library_size=len(library))
    queries, actual = [], []
    for run in test:
        counts["test_cycles"] += len(run)
        if not run.reached_failure:
            counts["unlabeled_cycles"] += len(run)
            continue
        counts["excluded_cycles"] += min(len(run), L - 1)
        sigs = run_signatures(run, hi_p, dhi_p, L)
        for i, sig in enumerate(sigs):
            t = i + L - 1
            queries.append((sig, (run.run_id, t)))
            actual.append(run.rul_labels[t])
    counts["scored_cycles"] = len(queries)
    if not queries:
        raise DataError("no test cycle could be scored (no failed test run with a full window)")

    preds = predict_batch(queries, library, config.top_k, config.interval_level, config.eps,
                          config.exclude_same_run, threads)
    records = [
        QueryRecord(q[1][0], q[1][1], int(a), p.rul_estimate, p.interval[0], p.interval[1])
        for q, a, p in zip(queries, actual, preds)
    ]
    overall = compute_metrics(records)

    train_labels = [r for run in train if run.reached_failure for r in run.rul_labels]
    baseline = None
    if train_labels:
        mean_rul = float(np.mean(train_labels))
        baseline = float(np.mean([abs(r.actual - mean_rul) for r in records]))

    return EvalReport(
        n_cycles=overall.n,
        mae=overall.mae,
        rmse=overall.rmse,
        coverage=overall.coverage,
        strata=stratify(records),
        config_digest=config.digest(),
        records=records,
        baseline_mae=baseline,
        counts=dict(counts),
        config=config.to_dict(),
    )


def run_evaluation(series: SensorSeries, config: PipelineConfig = PipelineConfig(),
                   threads: int | None = None, show_reference: bool = False) -> EvalReport:
    seg = segment_series(series, config)
    report = evaluate_runs(seg.runs, config, threads)
    report.counts.update(
        runs=len(seg.runs),
        cycles=seg.n_cycles,
        backwash_events=seg.n_events,
        **{k: int(v) for k, v in seg.diagnostics.items()},
    )
    report.show_reference = show_reference
    return report
