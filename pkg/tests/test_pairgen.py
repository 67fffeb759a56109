import math

import numpy as np
import pytest
from scipy import stats

from qicorr._rng import substream
from qicorr.pairgen import (
    NOISE,
    PAIR,
    SPEED_OF_LIGHT,
    TC,
    TPC,
    ChannelModel,
    NoiseModel,
    PolarizationState,
    RawEvents,
    SourceModel,
    apply_channel,
    generate_noise,
    generate_pairs,
    merge_events,
    polarization_survival,
    survival_probability,
)


def test_zero_rate_gives_empty_streams():
    sig, ref = generate_pairs(SourceModel(0.0), 1.0)
    assert len(sig) == 0 and len(ref) == 0
    assert len(generate_noise(NoiseModel(0.0), 1.0, seed=3)) == 0


def test_signal_lags_twin_by_extra_path():
    sig, ref = generate_pairs(SourceModel(1e4, 0.0, 1.2, seed=5), 0.1)
    lag = sig.times - ref.times
    # 1.2 m / 299792458 m/s
    assert np.allclose(lag, 4.00277e-9, rtol=0, atol=1e-14)
    assert np.all(sig.origin == PAIR)


def test_jitter_is_zero_mean_gaussian_on_the_signal_arm():
    sigma = 200e-12
    model = SourceModel(5e4, sigma, 1.2, seed=1)
    sig, ref = generate_pairs(model, 1.0)
    assert sig.is_sorted() and ref.is_sorted()
    # sums are invariant to the re-sort, so the mean jitter is recoverable
    n = len(sig)
    mean_jitter = (sig.times.sum() - ref.times.sum()) / n - model.signal_delay
    assert abs(mean_jitter) < 3 * sigma / math.sqrt(n)


def test_noise_count_within_three_sigma():
    ev = generate_noise(NoiseModel(1e6), 1.0, seed=11)
    assert abs(len(ev) - 1e6) < 3 * math.sqrt(1e6)
    assert ev.is_sorted()
    assert np.all(ev.origin == NOISE)
    assert ev.times.min() >= 0 and ev.times.max() < 1.0


def test_same_seed_same_stream():
    a = generate_noise(NoiseModel(1e5), 0.1, seed=42)
    b = generate_noise(NoiseModel(1e5), 0.1, seed=42)
    c = generate_noise(NoiseModel(1e5), 0.1, seed=43)
    assert a.times.tobytes() == b.times.tobytes()
    assert a.times.tobytes() != c.times.tobytes()
    s1, r1 = generate_pairs(SourceModel(1e5, 1e-10, seed=9), 0.1)
    s2, r2 = generate_pairs(SourceModel(1e5, 1e-10, seed=9), 0.1)
    assert s1.times.tobytes() == s2.times.tobytes()
    assert r1.times.tobytes() == r2.times.tobytes()


def test_substreams_are_independent_of_each_other():
    first = substream(1, "a").random(5)
    substream(1, "b").random(1000)
    assert np.array_equal(first, substream(1, "a").random(5))
    assert not np.array_equal(first, substream(1, "b").random(5))


def test_poisson_subinterval_counts_chi_square():
    # 100 seeded runs; counts in [0.2, 0.7) s at 50/s should be Poisson(25)
    counts = []
    for seed in range(100):
        t = generate_noise(NoiseModel(50.0), 1.0, seed=seed).times
        counts.append(np.count_nonzero((t >= 0.2) & (t < 0.7)))
    counts = np.array(counts)
    mu = 25.0
    edges = [0, 19, 22, 24, 26, 28, 31, np.inf]
    observed = np.histogram(counts, bins=edges)[0]
    cdf = stats.poisson.cdf(np.array(edges[1:]) - 1, mu)
    probs = np.diff(np.concatenate([[0.0], cdf]))
    probs[-1] = 1.0 - cdf[-2]
    _, p = stats.chisquare(observed, probs * len(counts))
    assert p > 0.01


@pytest.mark.parametrize(
    "kwargs",
    [
        {"pair_rate": -1.0},
        {"pair_rate": math.nan},
        {"pair_rate": 1.0, "pair_jitter_sigma": -1e-12},
        {"pair_rate": 1.0, "signal_extra_path": -0.1},
        {"pair_rate": math.inf},
    ],
)
def test_source_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        SourceModel(**kwargs)


def test_channel_rejects_bad_probabilities():
    with pytest.raises(ValueError):
        ChannelModel(object_reflectance=1.5)
    with pytest.raises(ValueError):
        ChannelModel(arrangement="XX")
    with pytest.raises(ValueError):
        NoiseModel(-1.0)
    with pytest.raises(ValueError):
        PolarizationState("linear", math.pi)


def test_generate_rejects_nonpositive_duration():
    with pytest.raises(ValueError):
        generate_pairs(SourceModel(1.0), 0.0)
    with pytest.raises(ValueError):
        generate_noise(NoiseModel(1.0), -1.0, seed=0)


def test_polarization_extremes():
    h = PolarizationState("H")
    assert polarization_survival(h, 0.0) == pytest.approx(1.0)
    assert polarization_survival(h, math.pi / 4) == pytest.approx(0.0, abs=1e-30)
    assert polarization_survival(PolarizationState("V"), 0.0) == pytest.approx(0.0, abs=1e-30)
    assert polarization_survival(PolarizationState("RHC"), 0.3) == 0.5
    assert polarization_survival(PolarizationState.parse("linear:0.0"), 0.0) == pytest.approx(1.0)


def test_survival_probabilities():
    p_pair, p_noise = survival_probability(ChannelModel(TPC, 0.13, 1.0, 0.0))
    assert p_pair == pytest.approx(0.13)
    assert p_noise == 0.5
    p_pair, _ = survival_probability(ChannelModel(TPC, 0.13, 1.0, math.pi / 4))
    assert p_pair == pytest.approx(0.0, abs=1e-30)
    p_pair, p_noise = survival_probability(ChannelModel(TPC, 1.0, 1.0, math.pi / 4, 1.0))
    assert p_pair == pytest.approx(0.5)
    p_pair, p_noise = survival_probability(ChannelModel(TC, 0.13, 1.0, 0.7))
    assert p_pair == pytest.approx(0.13 * 0.25)
    assert p_noise == 0.5
    # TC has no angle dependence
    assert survival_probability(ChannelModel(TC, 0.13, 1.0, 0.0)) == survival_probability(
        ChannelModel(TC, 0.13, 1.0, 1.0))
    assert survival_probability(ChannelModel(), noise_polarized=True)[1] == 1.0


def _mixed(n_pair, n_noise, seed=0):
    rng = np.random.default_rng(seed)
    times = np.sort(rng.random(n_pair + n_noise))
    origin = rng.permutation(np.r_[np.zeros(n_pair), np.ones(n_noise)]).astype(np.uint8)
    return RawEvents(times, origin, "signal", 1.0)


@pytest.mark.parametrize(
    "channel, p_pair, p_noise",
    [
        (ChannelModel(TPC, 0.13, 1.0, 0.0), 0.13, 0.5),
        (ChannelModel(TPC, 1.0, 1.0, math.pi / 4), 0.0, 0.5),
        (ChannelModel(TPC, 1.0, 1.0, math.pi / 8), 0.5, 0.5),
        (ChannelModel(TC, 1.0, 1.0, 0.0), 0.25, 0.5),
    ],
)
def test_thinning_within_three_sigma(channel, p_pair, p_noise):
    ev = _mixed(40_000, 40_000)
    out = apply_channel(ev, channel, substream(1, "thin"))
    assert out.is_sorted()
    for origin, p in ((PAIR, p_pair), (NOISE, p_noise)):
        n = ev.count(origin)
        k = out.count(origin)
        sd = math.sqrt(n * p * (1 - p))
        assert abs(k - n * p) <= max(3 * sd, 0.0)


def test_tc_tpc_noise_symmetry_pair_asymmetry():
    ev = _mixed(100_000, 100_000, seed=2)
    tpc = apply_channel(ev, ChannelModel(TPC, 1.0, 1.0, 0.0), substream(3, "x"))
    tc = apply_channel(ev, ChannelModel(TC, 1.0, 1.0, 0.0), substream(3, "x"))
    assert tc.count(NOISE) / tpc.count(NOISE) == pytest.approx(1.0, abs=0.03)
    assert tc.count(PAIR) / tpc.count(PAIR) == pytest.approx(0.25, abs=0.01)


def test_merge_keeps_order_and_origins():
    sig, _ = generate_pairs(SourceModel(1e4, seed=1), 0.1)
    noise = generate_noise(NoiseModel(1e4), 0.1, seed=1)
    both = merge_events(sig, noise)
    assert both.is_sorted()
    assert both.count(PAIR) == len(sig) and both.count(NOISE) == len(noise)


def test_speed_of_light_delay():
    assert SourceModel(1.0, signal_extra_path=1.2).signal_delay == pytest.approx(1.2 / SPEED_OF_LIGHT)
