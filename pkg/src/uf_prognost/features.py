"""Hydraulic features per cycle and the composite Health Index.

Per-record transmembrane pressure is ``P_feed - P_filtrate``. A cycle collapses
its records by arithmetic mean (TMP, flux, temperature); recovery is the
within-cycle TMP swing; resistance is computed from the cycle means with a
linear viscosity correction referenced to 20 degC.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import HealthWeights
from .ingest import SensorSeries

DEFAULT_EPS = 1e-9
MIN_VISCOSITY_FACTOR = 0.1


@dataclass(frozen=True)
class CycleFeatures:
    cycle_index: int
    start_time: float
    end_time: float
    tmp: float
    flux: float
    resistance: float
    recovery: float
    temperature: float
    n_samples: int


@dataclass(frozen=True)
class NormalizedCycle:
    cycle_index: int
    r_star: float
    tmp_star: float
    j_star: float
    rec_star: float
    hi: float
    dhi: float


def compute_tmp(feed_pressure, filtrate_pressure, diagnostics: Counter | None = None):
    """Transmembrane pressure. Negative values are kept and counted under
    ``diagnostics["negative_tmp"]`` when a counter is supplied."""
    tmp = np.subtract(feed_pressure, filtrate_pressure)
    if diagnostics is not None:
        diagnostics["negative_tmp"] += int(np.count_nonzero(np.asarray(tmp) < 0))
    return tmp if np.ndim(tmp) else float(tmp)


def viscosity_correction(temperature):
    factor = np.maximum(1.0 - 0.02 * (np.asarray(temperature, dtype=float) - 20.0), MIN_VISCOSITY_FACTOR)
    return factor if np.ndim(factor) else float(factor)


def compute_resistance(tmp, flux, temperature, eps: float = DEFAULT_EPS):
    if eps <= 0:
        raise ValueError("eps must be > 0")
    r = np.asarray(tmp, dtype=float) / (np.asarray(flux, dtype=float) * viscosity_correction(temperature) + eps)
    return r if np.ndim(r) else float(r)


def compute_recovery(tmp_series_within_cycle: Sequence[float]) -> float:
    tmp = np.asarray(tmp_series_within_cycle, dtype=float)
    if tmp.size == 0:
        raise ValueError("recovery needs at least one TMP sample")
    return float(tmp.max() - tmp.min())


def aggregate_cycle(
    records: SensorSeries,
    cycle_index: int,
    eps: float = DEFAULT_EPS,
    diagnostics: Counter | None = None,
) -> CycleFeatures:
    """Collapse one cycle's records (a time-ordered sub-series) into features."""
    if len(records) == 0:
        raise ValueError("cannot aggregate an empty cycle")
    tmp = np.asarray(compute_tmp(records.feed_pressure, records.filtrate_pressure, diagnostics))
    mean_tmp = float(tmp.mean())
    mean_flux = float(records.filtrate_flow.mean())
    mean_temp = float(records.temperature.mean())
    return CycleFeatures(
        cycle_index=cycle_index,
        start_time=float(records.timestamp[0]),
        end_time=float(records.timestamp[-1]),
        tmp=mean_tmp,
        flux=mean_flux,
        resistance=compute_resistance(mean_tmp, mean_flux, mean_temp, eps),
        recovery=compute_recovery(tmp),
        temperature=mean_temp,
        n_samples=len(records),
    )


def _min_max(x: np.ndarray, constant_value: float) -> np.ndarray:
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.full_like(x, constant_value)
    return np.clip((x - lo) / (hi - lo), 0.0, 1.0)


def health_index(r_star, tmp_star, j_star, rec_star, weights: HealthWeights = HealthWeights()):
    w_r, w_tmp, w_j, w_rec = weights.as_tuple()
    hi = (
        w_r * (1.0 - np.asarray(r_star, dtype=float))
        + w_tmp * (1.0 - np.asarray(tmp_star, dtype=float))
        + w_j * np.asarray(j_star, dtype=float)
        + w_rec * np.asarray(rec_star, dtype=float)
    )
    hi = np.clip(hi, 0.0, 1.0)
    return hi if np.ndim(hi) else float(hi)


def normalize_run(
    cycles: Sequence[CycleFeatures],
    weights: HealthWeights = HealthWeights(),
    constant_value: float = 0.0,
) -> list[NormalizedCycle]:
    """Min-max normalise each feature over the given cycles and compute HI/dHI.

    A feature that is constant over the run maps to ``constant_value``
    (0 by default) at every cycle. The first cycle's dHI is 0.
    """
    if not cycles:
        raise ValueError("normalize_run needs at least one cycle")
    r = _min_max(np.array([c.resistance for c in cycles], dtype=float), constant_value)
    tmp = _min_max(np.array([c.tmp for c in cycles], dtype=float), constant_value)
    j = _min_max(np.array([c.flux for c in cycles], dtype=float), constant_value)
    rec = _min_max(np.array([c.recovery for c in cycles], dtype=float), constant_value)
    hi = np.atleast_1d(health_index(r, tmp, j, rec, weights))
    dhi = np.zeros_like(hi)
    dhi[1:] = np.diff(hi)
    return [
        NormalizedCycle(
            cycle_index=c.cycle_index,
            r_star=float(r[i]),
            tmp_star=float(tmp[i]),
            j_star=float(j[i]),
            rec_star=float(rec[i]),
            hi=float(hi[i]),
            dhi=float(dhi[i]),
        )
        for i, c in enumerate(cycles)
    ]
