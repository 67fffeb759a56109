import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qicorr._rng import substream
from qicorr.detector import (
    DetectorModel,
    SaturationError,
    correction_factor,
    dead_time_mask,
    detect,
    observed_rate,
    saturation_curve,
)
from qicorr.pairgen import NoiseModel, RawEvents, generate_noise


def events(times, duration=1.0):
    times = np.asarray(times, dtype=float)
    return RawEvents(times, np.zeros(len(times), dtype=np.uint8), "signal", duration)


def brute_dead_time(times, t_d):
    kept, last = [], None
    for t in times:
        if last is None or t - last >= t_d:
            kept.append(t)
            last = t
    return kept


def test_quantization_floor():
    out = detect(events([1.0e-9, 2.0e-9]), DetectorModel(1.0, 0.0, 81e-12), substream(0, "d"))
    # integer picoseconds: 1000 // 81, 2000 // 81
    assert out.ticks.tolist() == [1000 // 81, 2000 // 81] == [12, 24]


def test_dead_time_drops_second_click():
    out = detect(events([0.0, 10e-9]), DetectorModel(1.0, 18e-9, 81e-12), substream(0, "d"))
    assert out.ticks.tolist() == [0]
    out = detect(events([0.0, 18e-9]), DetectorModel(1.0, 18e-9, 81e-12), substream(0, "d"))
    assert len(out) == 2


def test_same_tick_collapses():
    out = detect(events([100e-12, 110e-12, 150e-12]), DetectorModel(1.0, 0.0, 81e-12), substream(0, "d"))
    assert out.ticks.tolist() == [1]


def test_unsorted_input_rejected():
    with pytest.raises(ValueError, match="sorted"):
        detect(events([2e-9, 1e-9]), DetectorModel(), substream(0, "d"))


def test_events_outside_window_are_lost():
    out = detect(events([0.5, 1.5], duration=1.0), DetectorModel(1.0, 0.0, 1e-3), substream(0, "d"))
    assert out.ticks.tolist() == [500]
    assert out.duration_ticks == 1000


def test_rate_law_and_brute_force_oracle():
    rate, t_d = 1e6, 18e-9
    photons = generate_noise(NoiseModel(rate), 1.0, seed=123)
    model = DetectorModel(1.0, t_d, 81e-12)
    clicks = detect(photons, model, substream(123, "det"))
    oracle = brute_dead_time(photons.times.tolist(), t_d)
    assert len(clicks) == len(oracle)
    expected = rate / (1 + rate * t_d)
    assert expected == pytest.approx(982_318.27, abs=0.01)
    # non-paralyzable counting variance: R T / (1 + R t_d)^3
    sd = math.sqrt(rate / (1 + rate * t_d) ** 3)
    assert abs(len(clicks) - expected) < 3 * sd


def test_efficiency_thinning():
    photons = generate_noise(NoiseModel(2e5), 1.0, seed=4)
    clicks = detect(photons, DetectorModel(0.3, 0.0, 81e-12), substream(4, "det"))
    n = len(photons)
    assert abs(len(clicks) - 0.3 * n) < 3 * math.sqrt(n * 0.21)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(0.0, 1e-6, allow_nan=False), min_size=0, max_size=300),
    st.floats(0.0, 50e-9),
)
def test_dead_time_floor_and_quantization(times, t_d):
    tick = 81e-12
    times = sorted(times)
    out = detect(events(times, duration=2e-6), DetectorModel(1.0, t_d, tick), substream(0, "p"))
    gaps = np.diff(out.ticks.astype(np.int64))
    assert np.all(gaps >= max(1, math.floor(t_d / tick)))
    kept = brute_dead_time(times, t_d)
    expected = sorted(set(math.floor(t / tick) for t in kept))
    assert out.ticks.tolist() == expected


def test_dead_time_mask_matches_loop():
    t = np.cumsum(np.random.default_rng(0).exponential(20e-9, 5000))
    assert np.array_equal(np.flatnonzero(dead_time_mask(t, 18e-9)),
                          [i for i, x in enumerate(t) if x in set(brute_dead_time(t.tolist(), 18e-9))])


def test_jitter_applied():
    times = np.arange(1, 1001) * 1e-6
    out = detect(events(times, 2e-3), DetectorModel(1.0, 0.0, 1e-12, 50e-12), substream(2, "j"))
    err = out.ticks.astype(float) * 1e-12 - times
    assert 30e-12 < np.std(err) < 70e-12


@pytest.mark.parametrize(
    "av, t_d, d",
    [
        (0.0, 18e-9, 1.0),
        (5e5, 18e-9, 1 / (1 - 0.009)),
        (1e6, 18e-9, 1 / (1 - 0.018)),
        (0.5, 1.0, 2.0),
    ],
)
def test_correction_factor(av, t_d, d):
    assert correction_factor(av, t_d) == pytest.approx(d, rel=1e-12)


def test_correction_factor_quoted_values():
    assert round(correction_factor(5e5, 18e-9), 5) == 1.00908
    assert round(correction_factor(1e6, 18e-9), 5) == 1.01833


def test_correction_factor_pole():
    assert correction_factor(1 / 18e-9 * (1 - 1e-9), 18e-9) > 1e8
    with pytest.raises(SaturationError):
        correction_factor(1 / 18e-9, 18e-9)
    with pytest.raises(SaturationError):
        correction_factor(1e9, 18e-9)


def test_correction_inverts_rate_law():
    for r in (1e3, 1e5, 1e6, 1e7):
        av = observed_rate(r, 18e-9)
        assert av * correction_factor(av, 18e-9) == pytest.approx(r, rel=1e-12)


def test_saturation_curve_shape():
    det = DetectorModel(1.0, 18e-9, 81e-12)
    rates = [0.0, 1e4, 1e5, 1e6, 1e7, 3e7, 1e8]
    reports = saturation_curve(det, rates, duration=2e-2, seed=5)
    assert reports[0].observed_rate == 0 and reports[0].correction_factor == 1.0
    av = [r.observed_rate for r in reports]
    assert all(b >= a for a, b in zip(av, av[1:]))
    assert all(a < 1 / 18e-9 for a in av)
    # linear region: within 3 sigma of the incident rate
    assert abs(av[2] - 1e5) < 3 * math.sqrt(1e5 / 2e-2)
    assert av[-1] < 0.4 * rates[-1]  # flattened
    for r in reports:
        assert r.correction_factor >= 1.0 and not r.overflow
        # d * AV recovers the incident rate
        if r.incident_rate >= 1e6:
            assert r.observed_rate * r.correction_factor == pytest.approx(r.incident_rate, rel=0.05)


def test_detector_model_validation():
    with pytest.raises(ValueError):
        DetectorModel(efficiency=1.1)
    with pytest.raises(ValueError):
        DetectorModel(tick=0.0)
    with pytest.raises(ValueError):
        DetectorModel(dead_time=-1.0)
