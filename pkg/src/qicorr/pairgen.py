"""Seeded event generation for the photon-pair source, thermal noise and the
return-path optics of the two detection arrangements.

Times are float64 seconds.  Streams are arrays, not lists of records: a
:class:`RawEvents` holds the arrival times of one channel together with the
origin of every photon.

Arrangements
------------
``TPC``  time + polarization correlation.  The returning signal passes a
         quarter-wave plate twice and is picked off by a polarizing beam
         splitter, so a co-polarized pair photon survives with
         ``cos^2(2*theta)``; unpolarized noise survives with 1/2.
``TC``   time correlation only.  A 50:50 beam splitter is crossed on the way
         out and on the way back, so pair photons survive with 1/4 and the
         noise (injected on the return path) with 1/2.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import substream

__all__ = [
    "SPEED_OF_LIGHT",
    "PAIR",
    "NOISE",
    "SIGNAL",
    "REFERENCE",
    "TPC",
    "TC",
    "PolarizationState",
    "SourceModel",
    "NoiseModel",
    "ChannelModel",
    "RawEvents",
    "generate_pairs",
    "generate_noise",
    "merge_events",
    "polarization_survival",
    "survival_probability",
    "apply_channel",
]

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# origin codes
PAIR = 0
NOISE = 1

SIGNAL = "signal"
REFERENCE = "reference"

TPC = "TPC"
TC = "TC"

_KINDS = ("H", "V", "RHC", "LHC", "linear")


def _check_finite(**values):
    for name, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


def _check_probability(**values):
    for name, v in values.items():
        _check_finite(**{name: v})
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v!r}")


@dataclass(frozen=True)
class PolarizationState:
    kind: str = "H"
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown polarization kind {self.kind!r}")
        _check_finite(angle=self.angle)
        if self.kind == "linear" and not 0.0 <= self.angle < math.pi:
            raise ValueError(f"linear polarization angle must be in [0, pi), got {self.angle}")

    @classmethod
    def parse(cls, text):
        """Parse ``"H"``, ``"V"``, ``"RHC"``, ``"LHC"`` or ``"linear:<radians>"``."""
        text = str(text).strip()
        if text.startswith("linear"):
            _, _, angle = text.partition(":")
            return cls("linear", float(angle or 0.0))
        return cls(text.upper())

    def __str__(self):
        return f"linear:{self.angle!r}" if self.kind == "linear" else self.kind

    @property
    def linear_angle(self):
        """Angle from horizontal for linear states, ``None`` for circular ones."""
        if self.kind == "H":
            return 0.0
        if self.kind == "V":
            return math.pi / 2
        if self.kind == "linear":
            return self.angle
        return None


@dataclass(frozen=True)
class SourceModel:
    pair_rate: float
    pair_jitter_sigma: float = 0.0
    signal_extra_path: float = 1.2
    reference_delay: float = 0.0
    signal_polarization: PolarizationState = field(default_factory=PolarizationState)
    reference_polarization: PolarizationState = field(default_factory=PolarizationState)
    seed: int = 0

    def __post_init__(self):
        _check_finite(
            pair_rate=self.pair_rate,
            pair_jitter_sigma=self.pair_jitter_sigma,
            signal_extra_path=self.signal_extra_path,
            reference_delay=self.reference_delay,
        )
        if self.pair_rate < 0:
            raise ValueError("pair_rate must be >= 0")
        if self.pair_jitter_sigma < 0:
            raise ValueError("pair_jitter_sigma must be >= 0")
        if self.signal_extra_path < 0:
            raise ValueError("signal_extra_path must be >= 0")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def signal_delay(self):
        """Free-space delay of the signal arm in seconds."""
        return self.signal_extra_path / SPEED_OF_LIGHT


@dataclass(frozen=True)
class NoiseModel:
    noise_rate: float = 0.0
    polarized: bool = False

    def __post_init__(self):
        _check_finite(noise_rate=self.noise_rate)
        if self.noise_rate < 0:
            raise ValueError("noise_rate must be >= 0")


@dataclass(frozen=True)
class ChannelModel:
    arrangement: str = TPC
    object_reflectance: float = 0.13
    collection_efficiency: float = 1.0
    qwp_angle: float = 0.0
    depolarization_fraction: float = 0.0

    def __post_init__(self):
        if self.arrangement not in (TPC, TC):
            raise ValueError(f"arrangement must be 'TPC' or 'TC', got {self.arrangement!r}")
        _check_probability(
            object_reflectance=self.object_reflectance,
            collection_efficiency=self.collection_efficiency,
            depolarization_fraction=self.depolarization_fraction,
        )
        _check_finite(qwp_angle=self.qwp_angle)


@dataclass
class RawEvents:
    """Photon arrivals on one channel, sorted by time.

    ``polarization`` is the state of the pair photons in the stream (noise
    photons are described by ``noise_polarized``).
    """

    times: np.ndarray
    origin: np.ndarray
    channel: str
    duration: float
    polarization: PolarizationState = field(default_factory=PolarizationState)
    noise_polarized: bool = False

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.origin = np.asarray(self.origin, dtype=np.uint8)
        if self.times.shape != self.origin.shape or self.times.ndim != 1:
            raise ValueError("times and origin must be 1-d arrays of equal length")

    def __len__(self):
        return len(self.times)

    def is_sorted(self):
        return bool(np.all(self.times[1:] >= self.times[:-1]))

    def select(self, mask):
        return RawEvents(self.times[mask], self.origin[mask], self.channel,
                         self.duration, self.polarization, self.noise_polarized)

    def count(self, origin):
        return int(np.count_nonzero(self.origin == origin))


def _poisson_times(rng, rate, duration):
    # sorted uniforms as normalized exponential spacings: O(n), no sort
    n = rng.poisson(rate * duration)
    gaps = rng.standard_exponential(n + 1)
    times = np.cumsum(gaps[:n])
    total = times[-1] + gaps[n] if n else gaps[0]
    times *= duration / total
    return times


def generate_pairs(model, duration):
    """Emit the (signal, reference) streams of a CW pair source over ``[0, duration)``.

    Emission times are a homogeneous Poisson process.  The reference photon
    arrives at ``t + reference_delay``; its twin at
    ``t + signal_extra_path/c + N(0, pair_jitter_sigma)``.
    """
    _check_finite(duration=duration)
    if duration <= 0:
        raise ValueError("duration must be > 0")
    rng = substream(model.seed, "pairs")
    t = _poisson_times(rng, model.pair_rate, duration)
    ref = t + model.reference_delay
    sig = t + model.signal_delay
    if model.pair_jitter_sigma > 0:
        sig = sig + rng.normal(0.0, model.pair_jitter_sigma, size=len(t))
        sig.sort()
    origin = np.zeros(len(t), dtype=np.uint8)
    signal = RawEvents(sig, origin, SIGNAL, duration, model.signal_polarization)
    reference = RawEvents(ref, origin.copy(), REFERENCE, duration, model.reference_polarization)
    return signal, reference


def generate_noise(model, duration, seed):
    """Thermal background photons arriving at the signal detector path."""
    _check_finite(duration=duration)
    if duration <= 0:
        raise ValueError("duration must be > 0")
    rng = substream(seed, "noise")
    t = _poisson_times(rng, model.noise_rate, duration)
    return RawEvents(t, np.full(len(t), NOISE, dtype=np.uint8), SIGNAL, duration,
                     noise_polarized=model.polarized)


def merge_events(a, b):
    """Time-ordered union of two streams of the same channel."""
    if a.channel != b.channel:
        raise ValueError(f"cannot merge channels {a.channel!r} and {b.channel!r}")
    times = np.concatenate([a.times, b.times])
    origin = np.concatenate([a.origin, b.origin])
    order = np.argsort(times, kind="stable")
    # the pair stream's polarization wins; a pure-noise stream has none of its own
    pol = a.polarization if a.count(PAIR) or not b.count(PAIR) else b.polarization
    return RawEvents(times[order], origin[order], a.channel, max(a.duration, b.duration),
                     pol, a.noise_polarized or b.noise_polarized)


def polarization_survival(state, qwp_angle):
    """Probability that a photon in ``state`` reaches the PBS detection port.

    The double-passed quarter-wave plate acts as a half-wave plate; with the
    plate at ``qwp_angle`` a horizontally polarized photon leaves vertical
    with probability ``cos^2(2*theta)``.  Circular input is split evenly.
    """
    alpha = state.linear_angle
    if alpha is None:
        return 0.5
    return math.cos(2.0 * qwp_angle - alpha) ** 2


def survival_probability(channel, polarization=PolarizationState(), noise_polarized=False):
    """Composite survival probabilities ``(pair, noise)`` of the return path."""
    scatter = channel.object_reflectance * channel.collection_efficiency
    if channel.arrangement == TC:
        return scatter * 0.5 * 0.5, 0.5
    dep = channel.depolarization_fraction
    p_pol = (1.0 - dep) * polarization_survival(polarization, channel.qwp_angle) + dep * 0.5
    p_noise = 1.0 if noise_polarized else 0.5
    return scatter * p_pol, p_noise


def apply_channel(events, channel, rng):
    """Thin a signal-arm stream by the return-path optics (one draw per photon)."""
    p_pair, p_noise = survival_probability(channel, events.polarization, events.noise_polarized)
    p = np.where(events.origin == PAIR, p_pair, p_noise)
    keep = rng.random(len(events)) < p
    return events.select(keep)
