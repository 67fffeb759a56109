import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import stream
from qicorr.correlator import (
    CorrelogramConfig,
    NoPeakError,
    UndefinedG2Error,
    accidental_rate,
    brute_force_correlogram,
    coincidences,
    correlogram,
    g2,
    peak_bin,
    scan_delay,
    snr,
)
from qicorr.detector import TimestampStream


def test_single_pair_lands_at_minus_forty():
    cfg = CorrelogramConfig(1, -100, 100)
    corr = correlogram(stream([100]), stream([140]), cfg)
    assert corr.counts.sum() == 1
    assert corr.lags[np.flatnonzero(corr.counts)[0]] == -40


def test_bin_edges_half_open():
    cfg = CorrelogramConfig(5, -10, 10)
    corr = correlogram(stream([10, 15, 20]), stream([15]), cfg)
    # lags -5, 0, 5 -> bins [-5,0), [0,5), [5,10)
    assert corr.counts.tolist() == [0, 1, 1, 1]


def test_lag_range_endpoint_excluded():
    cfg = CorrelogramConfig(1, -3, 3)
    corr = correlogram(stream([3]), stream([0]), cfg)
    assert corr.counts.sum() == 0
    corr = correlogram(stream([0]), stream([3]), cfg)
    assert corr.counts.tolist() == [1, 0, 0, 0, 0, 0]


def test_self_correlation_symmetric():
    rng = np.random.default_rng(0)
    a = stream(rng.integers(0, 5000, 400))
    cfg = CorrelogramConfig(1, -50, 51)
    c = correlogram(a, a, cfg).counts
    assert np.array_equal(c, c[::-1])


ticks = st.lists(st.integers(0, 3000), max_size=200)


@settings(max_examples=200, deadline=None)
@given(ticks, ticks, st.integers(1, 7), st.integers(-400, 400), st.integers(1, 60))
def test_matches_brute_force(a, b, width, lag_min, nbins):
    cfg = CorrelogramConfig(width, lag_min, lag_min + width * nbins)
    sa, sb = stream(a, duration=3001), stream(b, duration=3001)
    corr = correlogram(sa, sb, cfg)
    assert np.array_equal(corr.counts, brute_force_correlogram(sa.ticks, sb.ticks, cfg))
    assert corr.counts.sum() <= len(a) * len(b)


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_partitioned_lag_range_is_identical(workers):
    rng = np.random.default_rng(7)
    a = stream(rng.integers(0, 10**6, 20000), duration=10**6)
    b = stream(rng.integers(0, 10**6, 20000), duration=10**6)
    cfg = CorrelogramConfig(3, -600, 600)
    assert np.array_equal(correlogram(a, b, cfg).counts, correlogram(a, b, cfg, workers=workers).counts)


def test_mismatched_ticks_rejected():
    a = stream([1, 2], tick=81e-12)
    b = stream([1, 2], tick=1e-12)
    with pytest.raises(ValueError, match="tick"):
        correlogram(a, b, CorrelogramConfig())


def test_unsorted_rejected():
    a = TimestampStream(np.array([5, 1], dtype=np.uint64), 0, 10)
    with pytest.raises(ValueError, match="sorted"):
        correlogram(a, stream([1]), CorrelogramConfig())


@pytest.mark.parametrize(
    "kwargs",
    [dict(bin_width=0), dict(lag_min=5, lag_max=5), dict(bin_width=3, lag_min=0, lag_max=10)],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        CorrelogramConfig(**kwargs)


def test_scan_delay_and_antisymmetry():
    rng = np.random.default_rng(3)
    ref = np.sort(rng.integers(0, 10**7, 3000))
    sig = ref + 49
    noise = rng.integers(0, 10**7, 3000)
    a = stream(np.r_[sig, noise], duration=10**7 + 100)
    b = stream(ref, duration=10**7 + 100)
    cfg = CorrelogramConfig(1, -200, 200)
    assert scan_delay(a, b, cfg) == 49
    assert scan_delay(b, a, cfg) == -49


def test_peak_tie_breaks_toward_zero():
    cfg = CorrelogramConfig(1, -5, 5)
    corr = correlogram(stream([10, 20]), stream([13, 17]), cfg)
    # lags: -3, -7(out), 7(out), 3 -> tie between -3 and 3, then smaller lag
    assert corr.lags[peak_bin(corr)] == -3
    corr = correlogram(stream([10, 30]), stream([8, 31]), cfg)
    # lags 2 and -1 -> |-1| wins
    assert corr.lags[peak_bin(corr)] == -1


def test_empty_correlogram_has_no_peak():
    with pytest.raises(NoPeakError):
        scan_delay(stream([]), stream([5]), CorrelogramConfig())


def test_g2_arithmetic():
    # C=50, N_s=N_r=1e5/s, dt=1 ns, T=1 s -> 50/(1e10 * 1e-9 * 1) = 5
    tick = 1e-9
    cfg = CorrelogramConfig(1, 0, 1)
    a = TimestampStream(np.arange(100_000, dtype=np.uint64) * 10_000 + 5, 1, 10**9, tick)
    b = TimestampStream(np.arange(100_000, dtype=np.uint64) * 10_000 + 5, 0, 10**9, tick)
    corr = correlogram(a, b, cfg)
    corr.counts[:] = 50
    est = g2(corr)
    assert est.peak_g2 == pytest.approx(5.0, rel=1e-12)
    assert est.accidental_rate == pytest.approx(10.0, rel=1e-12)


def test_g2_requires_singles():
    corr = correlogram(stream([]), stream([1]), CorrelogramConfig())
    with pytest.raises(UndefinedG2Error):
        g2(corr)


def test_independent_streams_give_unit_g2():
    rng = np.random.default_rng(11)
    dur = 10**9
    a = stream(rng.integers(0, dur, 200_000), duration=dur)
    b = stream(rng.integers(0, dur, 200_000), duration=dur)
    corr = correlogram(a, b, CorrelogramConfig(20, -2000, 2000))
    est = g2(corr)
    expected = 200_000 * 200_000 * 20 / dur
    eps = 4 / math.sqrt(expected)
    assert np.mean(np.abs(est.g2 - 1) <= 3 / math.sqrt(expected)) > 0.95
    assert abs(est.g2.mean() - 1) < eps
    assert not est.significant


def test_coincidences_window():
    assert coincidences(stream([100, 200]), stream([90, 150]), 5, 15) == 1


def test_accidental_rate_formula():
    assert accidental_rate(4e3, 6e3, 1e4, 1e-8) == pytest.approx(1.0)
    assert accidental_rate(0, 0, 1e4, 1e-8) == 0.0
    with pytest.raises(ValueError):
        accidental_rate(-1, 0, 0, 0)


@pytest.mark.parametrize("g, s", [(261.0, 260.0), (1.0, 0.0), (2.0, 1.0)])
def test_snr(g, s):
    assert snr(g) == s


def test_snr_rejects_negative():
    with pytest.raises(ValueError):
        snr(-0.1)
