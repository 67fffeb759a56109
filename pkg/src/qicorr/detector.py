"""Single-photon detector model: efficiency, timing jitter, non-paralyzable
dead time and time-tagger quantization, plus the saturation bookkeeping used
to correct visibilities.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ._rng import substream

__all__ = [
    "DetectorModel",
    "TimestampStream",
    "RateReport",
    "SaturationError",
    "detect",
    "dead_time_mask",
    "observed_rate",
    "correction_factor",
    "saturation_curve",
]

DEFAULT_DEAD_TIME = 18e-9
DEFAULT_TICK = 81e-12


class SaturationError(ValueError):
    """Observed rate times dead time reached 1; the correction factor diverges."""


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 1.0
    dead_time: float = DEFAULT_DEAD_TIME
    tick: float = DEFAULT_TICK
    jitter_sigma: float = 0.0

    def __post_init__(self):
        for name in ("efficiency", "dead_time", "tick", "jitter_sigma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must lie in [0, 1]")
        if self.dead_time < 0:
            raise ValueError("dead_time must be >= 0")
        if self.tick <= 0:
            raise ValueError("tick must be > 0")
        if self.jitter_sigma < 0:
            raise ValueError("jitter_sigma must be >= 0")


@dataclass
class TimestampStream:
    """Sorted click times of one detector in integer ticks."""

    ticks: np.ndarray
    channel_id: int
    duration_ticks: int
    tick: float = DEFAULT_TICK

    def __post_init__(self):
        self.ticks = np.asarray(self.ticks, dtype=np.uint64)
        if self.ticks.ndim != 1:
            raise ValueError("ticks must be 1-d")
        self.duration_ticks = int(self.duration_ticks)

    def __len__(self):
        return len(self.ticks)

    @property
    def duration(self):
        """Acquisition time in seconds."""
        return self.duration_ticks * self.tick

    @property
    def rate(self):
        return len(self.ticks) / self.duration if self.duration_ticks else 0.0

    def is_sorted(self):
        return bool(np.all(self.ticks[1:] >= self.ticks[:-1]))


@dataclass(frozen=True)
class RateReport:
    incident_rate: float
    observed_rate: float
    correction_factor: float
    overflow: bool = False


@njit(cache=True)
def _dead_time_keep(times, dead_time):
    keep = np.zeros(times.shape[0], dtype=np.bool_)
    last = -np.inf
    for i in range(times.shape[0]):
        if times[i] - last >= dead_time:
            keep[i] = True
            last = times[i]
    return keep


def dead_time_mask(times, dead_time):
    """Boolean mask of the clicks a non-paralyzable detector registers."""
    times = np.ascontiguousarray(times, dtype=np.float64)
    return _dead_time_keep(times, float(dead_time))


def detect(events, model, rng, channel_id=0):
    """Turn photon arrivals into a :class:`TimestampStream`.

    Order of operations: efficiency thinning, Gaussian jitter, dead time
    (measured from the last registered click), floor to ticks, and collapse
    of clicks sharing a tick.  Clicks jittered outside ``[0, duration)`` are
    lost.
    """
    times = np.asarray(events.times, dtype=np.float64)
    if np.any(times[1:] < times[:-1]):
        raise ValueError("detect requires time-sorted events")
    duration = events.duration
    n = len(times)
    if model.efficiency < 1.0:
        times = times[rng.random(n) < model.efficiency]
    if model.jitter_sigma > 0:
        times = np.sort(times + rng.normal(0.0, model.jitter_sigma, size=len(times)))
    times = times[(times >= 0.0) & (times < duration)]
    if model.dead_time > 0:
        times = times[dead_time_mask(times, model.dead_time)]
    ticks = np.floor(times / model.tick).astype(np.uint64)
    if len(ticks) > 1:
        ticks = ticks[np.concatenate(([True], ticks[1:] != ticks[:-1]))]
    duration_ticks = int(math.floor(duration / model.tick))
    return TimestampStream(ticks, channel_id, duration_ticks, model.tick)


def observed_rate(incident_rate, dead_time):
    """Expected registered rate of a non-paralyzable detector, ``R/(1+R*t_d)``."""
    return incident_rate / (1.0 + incident_rate * dead_time)


def correction_factor(observed, dead_time):
    """Inverse live fraction ``1/(1 - AV*t_d)`` for observed rate ``AV``.

    >>> round(correction_factor(5e5, 18e-9), 5)
    1.00908
    """
    if observed < 0 or dead_time < 0:
        raise ValueError("rate and dead time must be >= 0")
    duty = observed * dead_time
    if duty >= 1.0:
        raise SaturationError(f"AV*t_d = {duty:.6g} >= 1: detector fully saturated")
    return 1.0 / (1.0 - duty)


def saturation_curve(model, incident_rates, duration=1e-2, seed=0):
    """Observed rate and correction factor for Poisson light at each incident rate.

    Each point is simulated on its own seeded stream; the incident rate is
    the photon rate in front of the detector (efficiency is applied inside).
    """
    from .pairgen import NoiseModel, generate_noise

    reports = []
    for i, rate in enumerate(incident_rates):
        if rate < 0:
            raise ValueError("incident rates must be >= 0")
        photons = generate_noise(NoiseModel(rate), duration, seed=(int(seed) + i) % 2**64)
        clicks = detect(photons, model, substream(seed, "saturation", i))
        av = len(clicks) / duration
        try:
            d = correction_factor(av, model.dead_time)
            reports.append(RateReport(rate, av, d))
        except SaturationError:
            reports.append(RateReport(rate, av, math.inf, overflow=True))
    return reports
