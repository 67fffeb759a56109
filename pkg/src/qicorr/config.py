"""Experiment configuration: a flat TOML file of dotted keys with unit suffixes.

Example::

    duration_s = 0.5
    seed = 7
    source.pair_rate_per_s = 2.0e6
    source.signal_extra_path_m = 1.2
    noise.rate_per_s = 1.0e5
    channel.arrangement = "TPC"
    channel.qwp_angle_deg = 0.0
    detector.signal.efficiency = 0.5
    detector.signal.dead_time_ns = 18
    correlator.bin_width_ticks = 1

Keys may equally be grouped under ``[source]``-style tables; the file is
flattened to dotted paths before interpretation.  Unknown keys and every
invalid value are reported with their key path.
"""

import math
import sys
from dataclasses import dataclass, field, replace

from .correlator import CorrelogramConfig
from .detector import DetectorModel
from .pairgen import TPC, ChannelModel, NoiseModel, PolarizationState, SourceModel

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config", "flatten"]


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending dotted key path."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


# key path -> (section, field, scale to SI or converter)
_PS, _NS = 1e-12, 1e-9
_KEYS = {
    "duration_s": ("run", "duration", 1.0),
    "seed": ("run", "seed", int),
    "source.pair_rate_per_s": ("source", "pair_rate", 1.0),
    "source.pair_jitter_ps": ("source", "pair_jitter_sigma", _PS),
    "source.signal_extra_path_m": ("source", "signal_extra_path", 1.0),
    "source.reference_delay_ns": ("source", "reference_delay", _NS),
    "source.signal_polarization": ("source", "signal_polarization", PolarizationState.parse),
    "source.reference_polarization": ("source", "reference_polarization", PolarizationState.parse),
    "noise.rate_per_s": ("noise", "noise_rate", 1.0),
    "noise.polarized": ("noise", "polarized", bool),
    "channel.arrangement": ("channel", "arrangement", lambda s: str(s).upper()),
    "channel.object_reflectance": ("channel", "object_reflectance", 1.0),
    "channel.collection_efficiency": ("channel", "collection_efficiency", 1.0),
    "channel.qwp_angle_deg": ("channel", "qwp_angle", math.pi / 180.0),
    "channel.depolarization_fraction": ("channel", "depolarization_fraction", 1.0),
    "correlator.bin_width_ticks": ("correlator", "bin_width", int),
    "correlator.lag_min_ticks": ("correlator", "lag_min", int),
    "correlator.lag_max_ticks": ("correlator", "lag_max", int),
}
for _arm in ("signal", "reference"):
    _KEYS.update({
        f"detector.{_arm}.efficiency": (f"detector.{_arm}", "efficiency", 1.0),
        f"detector.{_arm}.dead_time_ns": (f"detector.{_arm}", "dead_time", _NS),
        f"detector.{_arm}.tick_ps": (f"detector.{_arm}", "tick", _PS),
        f"detector.{_arm}.jitter_ps": (f"detector.{_arm}", "jitter_sigma", _PS),
    })


@dataclass(frozen=True)
class ExperimentConfig:
    source: SourceModel
    noise: NoiseModel = field(default_factory=NoiseModel)
    channel: ChannelModel = field(default_factory=ChannelModel)
    signal_detector: DetectorModel = field(default_factory=DetectorModel)
    reference_detector: DetectorModel = field(default_factory=DetectorModel)
    correlator: CorrelogramConfig = field(default_factory=lambda: CorrelogramConfig(1, -200, 200))
    duration: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ConfigError("duration_s", "must be > 0")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        if not math.isclose(self.signal_detector.tick, self.reference_detector.tick, rel_tol=1e-12):
            raise ConfigError("detector.reference.tick_ps", "both detectors share one time tagger tick")

    @property
    def tick(self):
        return self.signal_detector.tick

    def with_(self, **changes):
        """Copy with top-level fields or ``section__field`` overrides replaced.

        >>> cfg = ExperimentConfig(SourceModel(1e3))
        >>> cfg.with_(noise__noise_rate=5.0).noise.noise_rate
        5.0
        """
        top, nested = {}, {}
        for key, value in changes.items():
            if "__" in key:
                section, name = key.split("__", 1)
                nested.setdefault(section, {})[name] = value
            else:
                top[key] = value
        for section, fields in nested.items():
            top[section] = replace(top.get(section, getattr(self, section)), **fields)
        return replace(self, **top)

    def to_flat(self):
        """Dotted-key dictionary in file units (inverse of :func:`parse_config`)."""
        out = {}
        for key, (section, name, conv) in _KEYS.items():
            if section == "run":
                value = getattr(self, name)
            else:
                value = getattr(self._section(section), name)
            if isinstance(conv, float):
                value = value / conv
            elif conv == PolarizationState.parse:
                value = str(value)
            out[key] = value
        return out

    def dumps(self):
        lines = []
        for key, value in self.to_flat().items():
            if isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, str):
                text = f'"{value}"'
            else:
                text = repr(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"

    def _section(self, section):
        return {
            "source": self.source,
            "noise": self.noise,
            "channel": self.channel,
            "correlator": self.correlator,
            "detector.signal": self.signal_detector,
            "detector.reference": self.reference_detector,
        }[section]


def flatten(tree, prefix=""):
    out = {}
    for key, value in tree.items():
        path = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, path + "."))
        else:
            out[path] = value
    return out


_FIELD_TO_KEY = {(sec, name): key for key, (sec, name, _) in _KEYS.items()}


def _build(section, cls, values):
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        msg = str(exc)
        # name the key whose field the validator complained about
        for name in sorted(values, key=len, reverse=True):
            if msg.startswith(name) or f" {name} " in f" {msg} ":
                raise ConfigError(_FIELD_TO_KEY[(section, name)], msg) from None
        raise ConfigError(section, msg) from None


def parse_config(text, seed=None):
    """Parse TOML ``text`` into an :class:`ExperimentConfig`.

    ``seed`` overrides the file's seed (the CLI's ``--seed``).
    """
    try:
        tree = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"not valid TOML: {exc}") from None
    flat = flatten(tree)
    sections = {}
    for key, raw in flat.items():
        if key not in _KEYS:
            raise ConfigError(key, "unknown key")
        section, name, conv = _KEYS[key]
        try:
            if isinstance(conv, float):
                if isinstance(raw, bool) or not isinstance(raw, (int, float)):
                    raise TypeError("expected a number")
                value = float(raw) * conv
            elif conv is int:
                if isinstance(raw, bool) or not isinstance(raw, int):
                    raise TypeError("expected an integer")
                value = raw
            elif conv is bool:
                if not isinstance(raw, bool):
                    raise TypeError("expected true or false")
                value = raw
            else:
                value = conv(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(key, str(exc)) from None
        sections.setdefault(section, {})[name] = value

    run = sections.get("run", {})
    if seed is not None:
        run["seed"] = seed
    if "source" not in sections or "pair_rate" not in sections["source"]:
        raise ConfigError("source.pair_rate_per_s", "required")
    run_seed = run.get("seed", 0)
    if not 0 <= run_seed < 2**64:
        raise ConfigError("seed", "must be a 64-bit unsigned integer")
    source = _build("source", SourceModel, {**sections["source"], "seed": run_seed})
    noise = _build("noise", NoiseModel, sections.get("noise", {}))
    channel_values = {"arrangement": TPC, **sections.get("channel", {})}
    channel = _build("channel", ChannelModel, channel_values)
    sig = _build("detector.signal", DetectorModel, sections.get("detector.signal", {}))
    ref = _build("detector.reference", DetectorModel, sections.get("detector.reference", {}))
    corr_values = {"bin_width": 1, "lag_min": -200, "lag_max": 200, **sections.get("correlator", {})}
    corr = _build("correlator", CorrelogramConfig, corr_values)
    duration = run.get("duration", 1.0)
    if not (math.isfinite(duration) and duration > 0):
        raise ConfigError("duration_s", "must be > 0")
    return ExperimentConfig(source, noise, channel, sig, ref, corr, duration, run_seed)


def load_config(path, seed=None):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), seed=seed)
