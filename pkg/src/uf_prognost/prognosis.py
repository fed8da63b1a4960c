"""Similarity-based RUL prediction over a library of failure exemplars.

Each library row is the signature of one cycle from a training run that
reached failure, paired with that cycle's RUL. A query is scored against every
row by fuzzy Jaccard similarity (sum of minima over sum of maxima), the top-k
rows become zero-order Takagi-Sugeno rules, and the estimate is their
similarity-weighted mean consequent.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import DataError
from .fuzzy import (
    WINDOW_LENGTH,
    FuzzyPartition,
    FuzzySignature,
    decode_position,
    sliding_signatures,
)
from .segmentation import Run

log = logging.getLogger(__name__)

DEFAULT_EPS = 1e-9
RULE_TERMS = 5


class EmptyLibraryError(DataError):
    pass


@dataclass(frozen=True, eq=False)
class ExemplarLibrary:
    values: np.ndarray  # (m, 6L) float64
    rul: np.ndarray  # (m,) int64
    run_ids: np.ndarray  # (m,) int64
    cycle_indices: np.ndarray  # (m,) int64, position within the run
    hi_partition: FuzzyPartition
    dhi_partition: FuzzyPartition
    window_length: int = WINDOW_LENGTH
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rul)

    @property
    def config_digest(self) -> str:
        return self.metadata.get("config_digest", "")

    def exemplar(self, i: int) -> FuzzySignature:
        return FuzzySignature(
            values=self.values[i],
            run_id=int(self.run_ids[i]),
            cycle_index=int(self.cycle_indices[i]),
            rul=int(self.rul[i]),
        )


def run_signatures(run: Run, hi_partition, dhi_partition, window_length: int = WINDOW_LENGTH) -> np.ndarray:
    """Signatures of the run's cycles t >= L-1; row i is cycle i + L - 1."""
    return sliding_signatures(run.hi, run.dhi, hi_partition, dhi_partition, window_length)


def build_library(
    training_runs: Sequence[Run],
    hi_partition: FuzzyPartition,
    dhi_partition: FuzzyPartition,
    window_length: int = WINDOW_LENGTH,
    metadata: dict | None = None,
) -> ExemplarLibrary:
    values, rul, run_ids, cyc = [], [], [], []
    for run in training_runs:
        if not run.reached_failure or len(run) < window_length:
            continue
        sig = run_signatures(run, hi_partition, dhi_partition, window_length)
        t = np.arange(window_length - 1, len(run))
        values.append(sig)
        rul.append(np.asarray(run.rul_labels, dtype=np.int64)[t])
        run_ids.append(np.full(len(t), run.run_id, dtype=np.int64))
        cyc.append(t.astype(np.int64))
    if not values:
        raise EmptyLibraryError("empty library: no failed training run with a full window of history")
    meta = dict(metadata or {})
    meta.setdefault("source_runs", sorted({int(r.run_id) for r in training_runs if r.reached_failure}))
    return ExemplarLibrary(
        values=np.ascontiguousarray(np.concatenate(values)),
        rul=np.concatenate(rul),
        run_ids=np.concatenate(run_ids),
        cycle_indices=np.concatenate(cyc),
        hi_partition=hi_partition,
        dhi_partition=dhi_partition,
        window_length=window_length,
        metadata=meta,
    )


def jaccard_similarity(a, b, eps: float = DEFAULT_EPS) -> float:
    a = getattr(a, "values", a)
    b = getattr(b, "values", b)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"signature length mismatch: {a.shape} vs {b.shape}")
    return float(np.minimum(a, b).sum() / (np.maximum(a, b).sum() + eps))


def similarities(query, matrix: np.ndarray, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Jaccard similarity of one query against every row of ``matrix``."""
    q = np.asarray(getattr(query, "values", query), dtype=float)
    if matrix.shape[1] != q.shape[0]:
        raise ValueError(f"signature length mismatch: {q.shape[0]} vs {matrix.shape[1]}")
    return np.minimum(matrix, q).sum(axis=1) / (np.maximum(matrix, q).sum(axis=1) + eps)


@dataclass(frozen=True)
class Match:
    exemplar_ref: int
    similarity: float
    rul: int


def retrieve_top_k(
    query,
    library: ExemplarLibrary,
    k: int = 10,
    eps: float = DEFAULT_EPS,
    exclude_run: int | None = None,
) -> list[Match]:
    """Top-k exemplars by similarity; ties go to the lower library index.

    ``exclude_run`` drops exemplars whose provenance is that run id.
    """
    if len(library) == 0:
        raise EmptyLibraryError("empty library")
    if k < 1:
        raise ValueError("k must be >= 1")
    sims = similarities(query, library.values, eps)
    order = np.argsort(-sims, kind="stable")
    if exclude_run is not None:
        order = order[library.run_ids[order] != exclude_run]
        if order.size == 0:
            raise EmptyLibraryError(f"no exemplars left after excluding run {exclude_run}")
    return [Match(int(i), float(sims[i]), int(library.rul[i])) for i in order[:k]]


def predict_rul(matches: Sequence[Match]) -> float:
    if not matches:
        raise ValueError("cannot aggregate zero matches")
    s = np.array([m.similarity for m in matches])
    r = np.array([m.rul for m in matches], dtype=float)
    total = s.sum()
    if total <= 0:
        log.warning("all %d match similarities are zero; using the unweighted mean", len(matches))
        return float(r.mean())
    est = float((s * r).sum() / total)
    # keep the convex-combination bound exact under rounding
    return min(max(est, float(r.min())), float(r.max()))


def weighted_quantile(values, weights, q: float) -> float:
    """Quantile with each point at the midpoint of its cumulative weight mass.

    Equal weights reduce to the Hazen plotting position ``(i - 0.5) / n``;
    values between midpoints are linearly interpolated, values outside are
    clamped to the extremes.
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    order = np.argsort(v, kind="stable")
    v, w = v[order], w[order]
    if w.sum() <= 0:
        w = np.ones_like(v)
    pos = (np.cumsum(w) - 0.5 * w) / w.sum()
    return float(np.interp(q, pos, v))


def prediction_interval(matches: Sequence[Match], level: float = 0.8) -> tuple[float, float]:
    if not 0.0 < level < 1.0:
        raise ValueError("interval level must lie in (0, 1)")
    r = [m.rul for m in matches]
    s = [m.similarity for m in matches]
    tail = (1.0 - level) / 2.0
    return weighted_quantile(r, s, tail), weighted_quantile(r, s, 1.0 - tail)


@dataclass(frozen=True)
class Antecedent:
    position: int
    lag: int  # cycles before the query cycle; 0 is the query cycle itself
    feature: str
    label: str
    degree: float

    def render(self) -> str:
        sub = "t" if self.lag == 0 else f"t-{self.lag}"
        return f"{self.feature}_{{{sub}}} is {self.label} ({self.degree:.2f})"


@dataclass(frozen=True)
class MinedRule:
    antecedents: tuple[Antecedent, ...]
    consequent_rul: int
    firing_strength: float
    exemplar_ref: int

    def render(self, number: int | None = None) -> str:
        head = "Rule" if number is None else f"Rule {number}"
        terms = " AND\n    ".join(a.render() for a in self.antecedents)
        return (
            f"{head} (Similarity = {self.firing_strength:.3f}):\n"
            f"  IF {terms},\n"
            f"  THEN RUL = {self.consequent_rul} cycles."
        )


def top_terms(values: np.ndarray, n: int = RULE_TERMS) -> np.ndarray:
    """Positions of the n largest degrees, ties to the lower position."""
    values = np.asarray(values)
    return np.lexsort((np.arange(len(values)), -values))[:n]


def mine_rule(match: Match, library: ExemplarLibrary, n_terms: int = RULE_TERMS) -> MinedRule:
    vec = library.values[match.exemplar_ref]
    last = library.window_length - 1
    terms = []
    for p in top_terms(vec, n_terms):
        offset, feature, label = decode_position(int(p))
        terms.append(Antecedent(int(p), last - offset, feature, label, float(vec[p])))
    return MinedRule(
        antecedents=tuple(terms),
        consequent_rul=int(library.rul[match.exemplar_ref]),
        firing_strength=match.similarity,
        exemplar_ref=match.exemplar_ref,
    )


@dataclass(frozen=True)
class Prediction:
    rul_estimate: float
    interval: tuple[float, float]
    matches: tuple[Match, ...]
    rules: tuple[MinedRule, ...]
    query_ref: tuple[int | None, int | None] = (None, None)

    def to_dict(self, library: ExemplarLibrary | None = None) -> dict:
        def prov(i):
            if library is None:
                return {}
            return {"run_id": int(library.run_ids[i]), "cycle_index": int(library.cycle_indices[i])}

        return {
            "query": {"run_id": self.query_ref[0], "cycle_index": self.query_ref[1]},
            "rul_estimate": self.rul_estimate,
            "interval": list(self.interval),
            "matches": [
                {"exemplar": m.exemplar_ref, "similarity": m.similarity, "rul": m.rul, **prov(m.exemplar_ref)}
                for m in self.matches
            ],
            "rules": [
                {
                    "exemplar": r.exemplar_ref,
                    "similarity": r.firing_strength,
                    "consequent_rul": r.consequent_rul,
                    "antecedents": [
                        {"lag": a.lag, "feature": a.feature, "label": a.label, "degree": a.degree}
                        for a in r.antecedents
                    ],
                }
                for r in self.rules
            ],
        }


def predict(
    query,
    library: ExemplarLibrary,
    k: int = 10,
    level: float = 0.8,
    eps: float = DEFAULT_EPS,
    exclude_run: int | None = None,
    query_ref: tuple[int | None, int | None] = (None, None),
) -> Prediction:
    matches = retrieve_top_k(query, library, k, eps, exclude_run)
    return Prediction(
        rul_estimate=predict_rul(matches),
        interval=prediction_interval(matches, level),
        matches=tuple(matches),
        rules=tuple(mine_rule(m, library) for m in matches),
        query_ref=query_ref,
    )


def explain(prediction: Prediction) -> str:
    assert prediction.rules, "a prediction always carries at least one rule"
    rules = sorted(prediction.rules, key=lambda r: -r.firing_strength)
    run_id, cycle = prediction.query_ref
    lo, hi = prediction.interval
    lines = []
    if run_id is not None:
        lines.append(f"Query: run {run_id}, cycle {cycle}")
    lines.append(f"Predicted RUL = {prediction.rul_estimate:.2f} cycles (interval {lo:.2f} .. {hi:.2f})")
    lines.append("")
    for n, rule in enumerate(rules, start=1):
        lines.append(rule.render(n))
    return "\n".join(lines) + "\n"


def thread_count(default: int | None = None) -> int:
    """Worker count: ``default`` (or up to 8 CPUs), capped by ``UF_PROGNOST_THREADS``."""
    n = default or min(8, os.cpu_count() or 1)
    env = os.environ.get("UF_PROGNOST_THREADS")
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            log.warning("ignoring non-integer UF_PROGNOST_THREADS=%r", env)
    return max(1, n)


def predict_batch(
    queries: Sequence[tuple[np.ndarray, tuple[int, int]]],
    library: ExemplarLibrary,
    k: int = 10,
    level: float = 0.8,
    eps: float = DEFAULT_EPS,
    exclude_same_run: bool = True,
    threads: int | None = None,
) -> list[Prediction]:
    """Predict for many (signature, (run_id, cycle_index)) queries.

    Output order follows input order regardless of thread scheduling.
    """

    def one(item):
        sig, ref = item
        return predict(sig, library, k, level, eps, ref[0] if exclude_same_run else None, ref)

    n = thread_count(threads)
    if n <= 1 or len(queries) < 64:
        return [one(q) for q in queries]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(one, queries))
