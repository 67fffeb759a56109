"""Cross-correlograms and g2 from two sorted timestamp streams.

Lags are ``signal_tick - reference_tick``; bin ``k`` covers
``[lag_min + k*bin_width, lag_min + (k+1)*bin_width)``.  Counting is all-pairs
and uses integer tick arithmetic only.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

__all__ = [
    "CorrelogramConfig",
    "Correlogram",
    "G2Estimate",
    "NoPeakError",
    "UndefinedG2Error",
    "correlogram",
    "brute_force_correlogram",
    "coincidences",
    "peak_bin",
    "scan_delay",
    "g2",
    "accidental_rate",
    "snr",
]

_INT64_MAX = np.iinfo(np.int64).max


class NoPeakError(ValueError):
    """The correlogram holds no coincidences at all."""


class UndefinedG2Error(ValueError):
    """g2 needs non-zero singles on both channels and a positive duration."""


@dataclass(frozen=True)
class CorrelogramConfig:
    bin_width: int = 1
    lag_min: int = -100
    lag_max: int = 100

    def __post_init__(self):
        for name in ("bin_width", "lag_min", "lag_max"):
            if int(getattr(self, name)) != getattr(self, name):
                raise ValueError(f"{name} must be an integer number of ticks")
        if self.bin_width < 1:
            raise ValueError("bin_width must be >= 1 tick")
        if self.lag_min >= self.lag_max:
            raise ValueError("lag_min must be < lag_max")
        if (self.lag_max - self.lag_min) % self.bin_width:
            raise ValueError("lag_max - lag_min must be a whole number of bins")

    @property
    def n_bins(self):
        return (self.lag_max - self.lag_min) // self.bin_width

    @property
    def lags(self):
        """Lower edge of every bin, in ticks."""
        return self.lag_min + self.bin_width * np.arange(self.n_bins, dtype=np.int64)

    @classmethod
    def around(cls, center, half_width, bin_width=1):
        """Bins aligned so that ``center`` starts a bin, spanning about +-half_width."""
        nb = max(1, -(-half_width // bin_width))
        return cls(bin_width, center - nb * bin_width, center + nb * bin_width)


@dataclass
class Correlogram:
    counts: np.ndarray
    n_s: int
    n_r: int
    duration: float
    config: CorrelogramConfig
    tick: float

    @property
    def lags(self):
        return self.config.lags

    @property
    def bin_seconds(self):
        return self.config.bin_width * self.tick


@dataclass
class G2Estimate:
    g2: np.ndarray
    peak_lag: int
    peak_g2: float
    accidental_rate: float
    significant: bool

    @property
    def snr(self):
        return snr(self.peak_g2)


@njit(cache=True, nogil=True)
def _sweep(a, b, lag_min, lag_max, width, nbins):
    counts = np.zeros(nbins, dtype=np.int64)
    m = b.shape[0]
    lo = 0
    for i in range(a.shape[0]):
        s = a[i]
        while lo < m and b[lo] <= s - lag_max:
            lo += 1
        j = lo
        hi = s - lag_min
        while j < m and b[j] <= hi:
            counts[(s - b[j] - lag_min) // width] += 1
            j += 1
    return counts


def _as_int64(stream):
    ticks = np.ascontiguousarray(stream.ticks, dtype=np.uint64)
    if len(ticks) and ticks[-1] > _INT64_MAX // 2:
        raise ValueError("tick values beyond 2**62 are not supported")
    return ticks.view(np.int64)


def _check_pair(a, b):
    if not math.isclose(a.tick, b.tick, rel_tol=1e-12):
        raise ValueError(f"tick units differ: {a.tick!r} s vs {b.tick!r} s")
    if not (a.is_sorted() and b.is_sorted()):
        raise ValueError("timestamp streams must be sorted")


def correlogram(a, b, cfg, workers=1):
    """Histogram of ``a - b`` over all pairs of clicks (``a`` signal, ``b`` reference).

    Single forward sweep with two cursors over ``b``; cost is
    O(len(a) + len(b) + pairs in range).  With ``workers > 1`` the lag range
    is split into contiguous blocks of bins counted concurrently.
    """
    _check_pair(a, b)
    sa, sb = _as_int64(a), _as_int64(b)
    w = cfg.bin_width
    if workers <= 1 or cfg.n_bins < 2:
        counts = _sweep(sa, sb, cfg.lag_min, cfg.lag_max, w, cfg.n_bins)
    else:
        edges = np.linspace(0, cfg.n_bins, min(workers, cfg.n_bins) + 1).astype(int)
        blocks = [(cfg.lag_min + lo * w, cfg.lag_min + hi * w, hi - lo)
                  for lo, hi in zip(edges[:-1], edges[1:])]
        with ThreadPoolExecutor(len(blocks)) as pool:
            parts = pool.map(lambda blk: _sweep(sa, sb, blk[0], blk[1], w, blk[2]), blocks)
            counts = np.concatenate(list(parts))
    duration = min(a.duration_ticks, b.duration_ticks) * a.tick
    return Correlogram(counts.astype(np.uint64), len(a), len(b), duration, cfg, a.tick)


def brute_force_correlogram(a_ticks, b_ticks, cfg):
    """All-pairs O(n*m) reference count; for testing only."""
    a = np.asarray(a_ticks, dtype=np.int64)
    b = np.asarray(b_ticks, dtype=np.int64)
    lags = np.subtract.outer(a, b).ravel()
    lags = lags[(lags >= cfg.lag_min) & (lags < cfg.lag_max)]
    return np.bincount((lags - cfg.lag_min) // cfg.bin_width, minlength=cfg.n_bins).astype(np.uint64)


def coincidences(a, b, lag_lo, lag_hi):
    """Number of pairs with ``lag_lo <= a - b < lag_hi``."""
    cfg = CorrelogramConfig(lag_hi - lag_lo, lag_lo, lag_hi)
    return int(correlogram(a, b, cfg).counts[0])


def peak_bin(corr):
    """Index of the largest bin; ties go to the bin whose lag is closest to zero."""
    counts = corr.counts
    if counts.size == 0 or counts.max() == 0:
        raise NoPeakError("correlogram is empty")
    candidates = np.flatnonzero(counts == counts.max())
    lags = corr.lags[candidates]
    return int(candidates[np.lexsort((lags, np.abs(lags)))[0]])


def scan_delay(a, b, cfg):
    """Lag (ticks, lower bin edge) of the correlogram maximum."""
    corr = correlogram(a, b, cfg)
    return int(corr.lags[peak_bin(corr)])


def g2(corr, z_threshold=5.0):
    """Normalized correlogram ``C(tau) / (N_s N_r dt T)`` with rates ``N = counts/T``.

    The denominator is the accidental count per bin expected from two
    independent streams.  The peak is called significant when it exceeds
    that expectation by ``z_threshold`` Poisson standard deviations.
    """
    T = corr.duration
    if corr.n_s <= 0 or corr.n_r <= 0 or T <= 0:
        raise UndefinedG2Error("g2 needs non-zero singles on both channels and T > 0")
    rate_s, rate_r = corr.n_s / T, corr.n_r / T
    acc_rate = rate_s * rate_r * corr.bin_seconds
    expected = acc_rate * T
    values = corr.counts.astype(np.float64) / expected
    try:
        k = peak_bin(corr)
    except NoPeakError:
        k = int(np.argmin(np.abs(corr.lags)))
    peak = float(values[k])
    significant = bool(corr.counts[k] - expected > z_threshold * math.sqrt(expected))
    return G2Estimate(values, int(corr.lags[k]), peak, acc_rate, significant)


def accidental_rate(signal_arm_rate, noise_rate, reference_rate, window):
    """Expected accidental coincidences per second, ``(N + N_b) N_r tau``.

    ``signal_arm_rate`` is the pair-origin singles rate reaching the signal
    detector and ``noise_rate`` the background rate there.
    """
    for v in (signal_arm_rate, noise_rate, reference_rate, window):
        if v < 0:
            raise ValueError("rates and window must be >= 0")
    return (signal_arm_rate + noise_rate) * reference_rate * window


def snr(g2_peak):
    """Signal-to-noise ratio as the excess of the g2 peak over the accidental level."""
    if g2_peak < 0:
        raise ValueError("g2 must be >= 0")
    return g2_peak - 1.0
