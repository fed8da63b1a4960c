"""Synthetic UF sensor logs with controllable fouling.

Degradation model, per run of ``N`` cycles with progress ``p = c / (N - 1)``:

* each cycle generates ``rate`` psi of fouling, of which a share
  ``irr(p) = f + (1 - f) * p**gamma`` is irreversible (``f`` is
  ``irreversible_fraction``; ``gamma`` is drawn per run) and accumulates;
* the reversible remainder appears as a within-cycle TMP ramp that the
  backwash at the end of the cycle resets, so recovery shrinks as the run
  ages;
* permeate flux declines in proportion to accumulated irreversible fouling;
* a chemical cleaning between runs removes a fraction of the irreversible
  fouling; that fraction decays geometrically with every cleaning.

``rate`` is scaled by ``nominal_length / N`` so that short and long runs
reach a comparable end state. Noise is additive on pressures and
multiplicative on flows. The model exercises the pipeline; it is not a
fouling simulator.

The random stream is numpy's PCG64 seeded with ``config.seed`` and consumed in
a fixed order (``GENERATOR_VERSION`` changes whenever that order changes).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .ingest import SensorSeries

GENERATOR_VERSION = 1
STANDARD_SEED = 20240611


@dataclass(frozen=True)
class ScenarioConfig:
    n_runs: int = 1
    cycles_per_run: tuple[int, int] = (30, 90)
    samples_per_cycle: tuple[int, int] = (8, 12)
    tmp_baseline: float = 8.0  # psi
    tmp_fouling_rate: float = 0.6  # psi per cycle, nominal-length run
    irreversible_fraction: float = 0.3
    flux_baseline: float = 60.0  # GPM
    flux_decline_rate: float = 0.2  # GPM per cycle of nominal fouling
    backwash_spike_flow: float = 40.0  # GPM
    cleaning_every: int = 0  # 0: run lengths drawn from cycles_per_run
    cleaning_efficacy_decay: float = 0.005
    noise_std: float = 0.001
    seed: int = 0
    fouling_exponent: tuple[float, float] = (1.0, 3.0)
    backwash_samples: int = 2
    sample_interval_s: float = 10.0
    cleaning_downtime_h: float = 2.0
    filtrate_pressure: float = 5.0  # psi
    temperature: float = 20.0  # degC
    start_time: float = 1_700_000_000.0
    source_id: str = "synthetic"

    def __post_init__(self):
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        lo, hi = self.cycles_per_run
        if not 2 <= lo <= hi:
            raise ValueError("cycles_per_run must satisfy 2 <= lo <= hi")
        lo, hi = self.samples_per_cycle
        if not 2 <= lo <= hi:
            raise ValueError("samples_per_cycle must satisfy 2 <= lo <= hi")
        if not 0.0 <= self.irreversible_fraction <= 1.0:
            raise ValueError("irreversible_fraction must lie in [0, 1]")
        if self.backwash_spike_flow <= 15.0:
            raise ValueError("backwash_spike_flow must exceed the 15 GPM detection threshold")
        if self.cleaning_every < 0 or self.cleaning_every == 1:
            raise ValueError("cleaning_every must be 0 or >= 2")
        if not 0.0 <= self.cleaning_efficacy_decay < 1.0:
            raise ValueError("cleaning_efficacy_decay must lie in [0, 1)")
        if self.backwash_samples < 1:
            raise ValueError("backwash_samples must be >= 1")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        for name in ("tmp_baseline", "tmp_fouling_rate", "flux_baseline", "flux_decline_rate",
                     "sample_interval_s", "cleaning_downtime_h"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0")

    @property
    def nominal_length(self) -> float:
        if self.cleaning_every:
            return float(self.cleaning_every)
        return sum(self.cycles_per_run) / 2.0

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        for name in ("cycles_per_run", "samples_per_cycle", "fouling_exponent"):
            if name in d:
                d[name] = tuple(d[name])
        return cls(**d)


def standard_config(seed: int = STANDARD_SEED) -> ScenarioConfig:
    return ScenarioConfig(n_runs=50, cycles_per_run=(30, 90), irreversible_fraction=0.3, seed=seed)


def generate_scenario(config: ScenarioConfig) -> SensorSeries:
    rng = np.random.Generator(np.random.PCG64(config.seed))
    nominal = config.nominal_length
    f = config.irreversible_fraction
    sigma_p = config.noise_std * config.tmp_baseline
    bw = config.backwash_samples

    chunks: dict[str, list[np.ndarray]] = {k: [] for k in (
        "timestamp", "feed_pressure", "filtrate_pressure", "filtrate_flow",
        "temperature", "backwash_flow", "turbidity")}
    t = config.start_time
    fouling = 0.0  # accumulated irreversible fouling, psi

    for n in range(config.n_runs):
        if config.cleaning_every:
            length = config.cleaning_every
        else:
            length = int(rng.integers(config.cycles_per_run[0], config.cycles_per_run[1] + 1))
        gamma = float(rng.uniform(*config.fouling_exponent))
        rate = config.tmp_fouling_rate * nominal / length
        for c in range(length):
            p = c / (length - 1)
            irr = f + (1.0 - f) * p**gamma
            swing = (1.0 - irr) * rate
            m = int(rng.integers(config.samples_per_cycle[0], config.samples_per_cycle[1] + 1))
            ramp = np.concatenate([np.linspace(0.0, swing, m), np.full(bw, swing)])
            tmp = config.tmp_baseline + fouling + ramp
            flux = config.flux_baseline - config.flux_decline_rate * fouling / max(config.tmp_fouling_rate, 1e-12)
            size = m + bw
            filtrate_p = config.filtrate_pressure + sigma_p * rng.standard_normal(size)
            feed_p = config.filtrate_pressure + tmp + sigma_p * rng.standard_normal(size)
            q = flux * (1.0 + config.noise_std * rng.standard_normal(size))
            bwf = np.zeros(size)
            bwf[m:] = config.backwash_spike_flow * (1.0 + config.noise_std * rng.standard_normal(bw))
            temp = config.temperature + sigma_p * rng.standard_normal(size)
            turb = np.round(0.5 + 0.1 * rng.random(size), 4)

            chunks["timestamp"].append(t + config.sample_interval_s * np.arange(size))
            chunks["feed_pressure"].append(feed_p)
            chunks["filtrate_pressure"].append(filtrate_p)
            chunks["filtrate_flow"].append(q)
            chunks["temperature"].append(temp)
            chunks["backwash_flow"].append(bwf)
            chunks["turbidity"].append(turb)
            t += config.sample_interval_s * size
            fouling += irr * rate
        # chemical cleaning before the next run
        efficacy = (1.0 - config.cleaning_efficacy_decay) ** n
        fouling *= 1.0 - efficacy
        t += config.cleaning_downtime_h * 3600.0

    cols = {k: np.concatenate(v) for k, v in chunks.items()}
    turbidity = np.array([repr(float(x)) for x in cols.pop("turbidity")], dtype=object)
    return SensorSeries(
        **cols,
        extras={"turbidity": turbidity},
        source_id=config.source_id,
        sampling_hint=config.sample_interval_s,
    )


def standard_fixture(seed: int = STANDARD_SEED) -> SensorSeries:
    """Canonical acceptance scenario: 50 runs of 30-90 cycles, fixed seed."""
    return generate_scenario(standard_config(seed))


def noiseless(config: ScenarioConfig) -> ScenarioConfig:
    return replace(config, noise_std=0.0)
