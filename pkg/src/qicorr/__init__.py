"""Photon-pair correlation ranging: event simulation and timestamp correlation.

Modules
-------
pairgen     pair source, thermal noise and return-path optics (TC / TPC)
detector    efficiency, jitter, dead time, tick quantization, correction factor
correlator  two-cursor cross-correlogram, g2, accidentals, SNR
analysis    pipeline, noise / wave-plate / visibility sweeps, fits
config      TOML experiment configuration
tsfile      binary timestamp files and CSV figure data
recipes     configurations matching the reported operating points
"""

from .analysis import (
    FitError,
    compare_arrangements,
    fit_sinusoid,
    fit_visibility_curve,
    measure,
    predict,
    simulate,
    sweep_accidentals,
    sweep_noise,
    sweep_qwp,
    sweep_visibility,
    visibility,
    visibility_model,
)
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .correlator import CorrelogramConfig, accidental_rate, correlogram, g2, scan_delay, snr
from .detector import DetectorModel, TimestampStream, correction_factor, detect, saturation_curve
from .pairgen import (
    TC,
    TPC,
    ChannelModel,
    NoiseModel,
    PolarizationState,
    SourceModel,
    apply_channel,
    generate_noise,
    generate_pairs,
)

__version__ = "0.1.0"
