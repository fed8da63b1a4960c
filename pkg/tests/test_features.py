import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from uf_prognost.config import ConfigError, HealthWeights
from uf_prognost.features import (
    CycleFeatures,
    aggregate_cycle,
    compute_recovery,
    compute_resistance,
    compute_tmp,
    health_index,
    normalize_run,
    viscosity_correction,
)
from uf_prognost.ingest import SensorRecord, SensorSeries


def test_tmp():
    assert compute_tmp(30, 10) == 20
    assert compute_tmp(10, 10) == 0
    diag = Counter()
    assert compute_tmp(8, 12, diag) == -4
    assert diag["negative_tmp"] == 1


def test_viscosity_correction():
    assert viscosity_correction(20) == 1.0
    assert viscosity_correction(25) == pytest.approx(0.9, rel=1e-12)
    assert viscosity_correction(70) == 0.1
    assert viscosity_correction(500) == 0.1


def test_resistance():
    assert compute_resistance(20, 10, 20, 1e-9) == pytest.approx(2.0, rel=1e-9)
    assert compute_resistance(20, 0, 20, 1e-9) == pytest.approx(2.0e10, rel=1e-12)
    assert compute_resistance(15, 8, 25, 1e-9) == pytest.approx(15 / (8 * 0.9), rel=1e-9)
    with pytest.raises(ValueError):
        compute_resistance(1, 1, 20, 0.0)


def test_recovery():
    assert compute_recovery([12, 14, 18, 13]) == 6
    assert compute_recovery([10]) == 0
    assert compute_recovery([5, 5, 5]) == 0
    with pytest.raises(ValueError):
        compute_recovery([])


def _records(rows):
    return SensorSeries.from_records([SensorRecord(*r) for r in rows])


def test_aggregate_two_records():
    # TMPs 18 and 22, fluxes 9 and 11
    c = aggregate_cycle(_records([(0, 28, 10, 9, 20, 0), (1, 32, 10, 11, 20, 0)]), 4)
    assert (c.tmp, c.flux, c.recovery, c.n_samples, c.cycle_index) == (20, 10, 4, 2, 4)
    assert c.resistance == pytest.approx(2.0, rel=1e-9)


def test_aggregate_single_record():
    c = aggregate_cycle(_records([(7, 25, 5, 12, 18, 0)]), 0)
    assert (c.tmp, c.flux, c.temperature, c.recovery) == (20, 12, 18, 0)
    assert c.start_time == c.end_time == 7


def test_aggregate_matches_hand_recompute(rng):
    rows = [(float(i), 20 + rng.normal(), 5 + rng.normal(), 10 + rng.normal(), 20 + rng.normal(), 0.0)
            for i in range(50)]
    c = aggregate_cycle(_records(rows), 0)
    tmps = [r[1] - r[2] for r in rows]
    tmp = math.fsum(tmps) / 50
    flux = math.fsum(r[3] for r in rows) / 50
    temp = math.fsum(r[4] for r in rows) / 50
    assert c.tmp == pytest.approx(tmp, rel=1e-12)
    assert c.flux == pytest.approx(flux, rel=1e-12)
    assert c.temperature == pytest.approx(temp, rel=1e-12)
    assert c.recovery == pytest.approx(max(tmps) - min(tmps), rel=1e-12)
    assert c.resistance == pytest.approx(tmp / (flux * (1 - 0.02 * (temp - 20)) + 1e-9), rel=1e-12)


def test_aggregate_empty():
    with pytest.raises(ValueError):
        aggregate_cycle(_records([]), 0)


def test_weights_default_sum_exactly_one():
    w = HealthWeights()
    assert math.fsum(w.as_tuple()) == 1.0
    assert sum(Fraction(str(x)) for x in w.as_tuple()) == 1
    with pytest.raises(ConfigError):
        HealthWeights(0.5, 0.5, 0.5, 0.0)
    with pytest.raises(ConfigError):
        HealthWeights(-0.1, 0.5, 0.5, 0.1)


def test_health_index_corners():
    assert health_index(0, 0, 1, 1) == 1.0
    assert health_index(1, 1, 0, 0) == 0.0
    assert health_index(0.5, 0.5, 0.5, 0.5) == pytest.approx(0.5, rel=1e-12)


def _cycle(i, tmp, flux, res, rec):
    return CycleFeatures(i, float(i), float(i) + 1, tmp, flux, res, rec, 20.0, 5)


def test_normalize_run_corners():
    cycles = [_cycle(0, 1, 10, 1, 5), _cycle(1, 2, 5, 2, 1), _cycle(2, 3, 0, 3, 0)]
    norm = normalize_run(cycles)
    assert norm[0].hi == 1.0
    assert norm[-1].hi == 0.0
    assert norm[0].dhi == 0.0
    assert norm[1].dhi == pytest.approx(norm[1].hi - norm[0].hi)


def test_constant_feature_maps_to_zero():
    cycles = [_cycle(0, 2, 10, 1, 5), _cycle(1, 2, 5, 2, 1)]
    norm = normalize_run(cycles)
    assert all(n.tmp_star == 0.0 for n in norm)
    assert all(n.tmp_star == 0.5 for n in normalize_run(cycles, constant_value=0.5))


finite = st.floats(-1e3, 1e3, allow_nan=False)
feature_rows = st.lists(st.tuples(finite, finite, finite, finite), min_size=1, max_size=40)


@given(feature_rows)
def test_normalized_bounds(rows):
    norm = normalize_run([_cycle(i, *r) for i, r in enumerate(rows)])
    for n in norm:
        for v in (n.r_star, n.tmp_star, n.j_star, n.rec_star, n.hi):
            assert 0.0 <= v <= 1.0
        assert -1.0 <= n.dhi <= 1.0
    assert norm[0].dhi == 0.0


unit = st.floats(0, 1)


@given(unit, unit, unit, unit, unit)
def test_hi_monotone_response(r, tmp, j, rec, bump):
    hi = health_index(r, tmp, j, rec)
    assert health_index(r, tmp, min(1.0, j + bump), rec) >= hi
    assert health_index(min(1.0, r + bump), tmp, j, rec) <= hi


@given(st.lists(st.floats(0.1, 100), min_size=2, max_size=30), st.floats(0.01, 100))
def test_normalization_scale_invariant(values, scale):
    assume(max(values) - min(values) > 1e-6 * max(values))
    base = [_cycle(i, v, 1.0, 1.0, 1.0) for i, v in enumerate(values)]
    scaled = [_cycle(i, v * scale, 1.0, 1.0, 1.0) for i, v in enumerate(values)]
    a = np.array([n.tmp_star for n in normalize_run(base)])
    b = np.array([n.tmp_star for n in normalize_run(scaled)])
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)
