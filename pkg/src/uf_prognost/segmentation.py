"""Backwash detection, cycle cutting, run grouping and RUL labels.

Run boundaries need an HI before runs exist, so grouping is two-pass: HI is
first computed with min-max normalisation over the whole series and used only
to find restarts (an HI rise above ``hi_jump`` or a time gap above
``max_gap_hours``); each run is then renormalised on its own cycles.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .config import HealthWeights, PipelineConfig
from .features import CycleFeatures, NormalizedCycle, aggregate_cycle, normalize_run
from .ingest import SensorSeries

log = logging.getLogger(__name__)

START_REASONS = ("series_start", "hi_jump", "time_gap")
END_REASONS = ("failure", "next_recovery", "series_end")


@dataclass(frozen=True)
class BackwashEvent:
    onset_time: float
    peak_flow: float
    first: int
    last: int  # inclusive

    @property
    def record_span(self) -> range:
        return range(self.first, self.last + 1)


@dataclass(frozen=True)
class Run:
    run_id: int
    cycles: tuple[NormalizedCycle, ...]
    features: tuple[CycleFeatures, ...]
    start_reason: str = "series_start"
    end_reason: str = "series_end"
    reached_failure: bool = False
    rul_labels: tuple[int, ...] | None = None
    truncated: int = 0

    def __len__(self) -> int:
        return len(self.cycles)

    @property
    def start_time(self) -> float:
        return self.features[0].start_time

    @property
    def hi(self) -> np.ndarray:
        return np.array([c.hi for c in self.cycles])

    @property
    def dhi(self) -> np.ndarray:
        return np.array([c.dhi for c in self.cycles])


def detect_backwash_events(series: SensorSeries, threshold: float = 15.0) -> list[BackwashEvent]:
    """One event per maximal run of consecutive records with flow >= threshold."""
    if threshold <= 0:
        raise ValueError("backwash threshold must be > 0")
    above = np.asarray(series.backwash_flow) >= threshold
    if not above.any():
        return []
    edges = np.diff(above.astype(np.int8), prepend=0, append=0)
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)  # exclusive
    flow = series.backwash_flow
    return [
        BackwashEvent(
            onset_time=float(series.timestamp[a]),
            peak_flow=float(flow[a:b].max()),
            first=int(a),
            last=int(b - 1),
        )
        for a, b in zip(starts, stops)
    ]


def segment_cycles(
    series: SensorSeries,
    events: Sequence[BackwashEvent],
    min_cycle_samples: int = 3,
) -> list[range]:
    """Record index ranges of complete filtration-backwash cycles.

    A cycle runs from the record after one backwash event to the last record
    of the next. Records before the first event form a leading cycle only if
    there are at least ``min_cycle_samples`` of them (event included); records
    after the last event are an unfinished cycle and are dropped.
    """
    if len(events) < 2:
        log.warning("%s: %d backwash events, no complete cycles", series.source_id or "series", len(events))
        return []
    cycles = []
    lead = range(0, events[0].last + 1)
    if len(lead) >= min_cycle_samples:
        cycles.append(lead)
    for prev, ev in zip(events, events[1:]):
        cycles.append(range(prev.last + 1, ev.last + 1))
    return cycles


def find_run_starts(
    hi_raw: Sequence[float],
    start_times: Sequence[float],
    end_times: Sequence[float],
    hi_jump: float = 0.5,
    max_gap_hours: float = 24.0,
) -> list[tuple[int, str]]:
    """Indices where a new run begins, with the triggering reason."""
    hi_raw = np.asarray(hi_raw, dtype=float)
    if hi_raw.size == 0:
        return []
    starts = [(0, "series_start")]
    max_gap = max_gap_hours * 3600.0
    for t in range(1, len(hi_raw)):
        if start_times[t] - end_times[t - 1] > max_gap:
            starts.append((t, "time_gap"))
        elif hi_raw[t] - hi_raw[t - 1] > hi_jump:
            starts.append((t, "hi_jump"))
    return starts


def group_runs(
    cycles: Sequence[CycleFeatures],
    weights: HealthWeights = HealthWeights(),
    hi_jump: float = 0.5,
    max_gap_hours: float = 24.0,
    constant_value: float = 0.0,
) -> list[Run]:
    if not cycles:
        return []
    hi_raw = [c.hi for c in normalize_run(cycles, weights, constant_value)]
    starts = find_run_starts(
        hi_raw,
        [c.start_time for c in cycles],
        [c.end_time for c in cycles],
        hi_jump,
        max_gap_hours,
    )
    bounds = [s for s, _ in starts] + [len(cycles)]
    runs = []
    for run_id, ((a, reason), b) in enumerate(zip(starts, bounds[1:])):
        feats = tuple(cycles[a:b])
        runs.append(
            Run(
                run_id=run_id,
                cycles=tuple(normalize_run(feats, weights, constant_value)),
                features=feats,
                start_reason=reason,
                end_reason="next_recovery" if b < len(cycles) else "series_end",
            )
        )
    return runs


def label_rul(run: Run, failure_hi: float = 0.01) -> Run:
    """Count cycles down to the first cycle with HI <= failure_hi.

    Cycles after the failure cycle are dropped. Runs that never cross the
    threshold come back with ``reached_failure=False`` and no labels.
    """
    hits = np.flatnonzero(run.hi <= failure_hi)
    if hits.size == 0:
        return replace(run, reached_failure=False, rul_labels=None)
    f = int(hits[0])
    return replace(
        run,
        cycles=run.cycles[: f + 1],
        features=run.features[: f + 1],
        end_reason="failure",
        reached_failure=True,
        rul_labels=tuple(range(f, -1, -1)),
        truncated=len(run) - (f + 1),
    )


@dataclass
class SegmentationResult:
    runs: list[Run]
    n_events: int
    n_cycles: int
    diagnostics: Counter = field(default_factory=Counter)


def segment_series(series: SensorSeries, config: PipelineConfig = PipelineConfig()) -> SegmentationResult:
    """Full path from a validated series to labelled runs."""
    diagnostics: Counter = Counter()
    events = detect_backwash_events(series, config.backwash_threshold_gpm)
    spans = segment_cycles(series, events, config.min_cycle_samples)
    cycles = [
        aggregate_cycle(series[span.start : span.stop], i, config.eps, diagnostics)
        for i, span in enumerate(spans)
    ]
    runs = group_runs(
        cycles,
        config.weights,
        config.hi_jump,
        config.max_gap_hours,
        config.constant_feature_value,
    )
    runs = [label_rul(r, config.failure_hi) for r in runs]
    diagnostics["dropped_rows"] += series.dropped_rows
    diagnostics["truncated_cycles"] += sum(r.truncated for r in runs)
    diagnostics["unlabeled_runs"] += sum(not r.reached_failure for r in runs)
    return SegmentationResult(runs=runs, n_events=len(events), n_cycles=len(cycles), diagnostics=diagnostics)
