"""Detector saturation: observed rate and correction factor.

A non-paralyzable detector with 18 ns dead time counts R/(1 + R t_d); the
factor d = 1/(1 - AV t_d) undoes the loss from the observed rate AV alone.
"""

import numpy as np

from qicorr.detector import DetectorModel, saturation_curve

det = DetectorModel(efficiency=1.0, dead_time=18e-9)
rates = np.logspace(4, 7.5, 8)
print(f"{'incident/s':>11} {'observed/s':>11} {'model':>11} {'d':>7} {'d*AV/R':>7}")
for r in saturation_curve(det, rates, duration=2e-2, seed=1):
    model = r.incident_rate / (1 + r.incident_rate * det.dead_time)
    print(f"{r.incident_rate:11.4g} {r.observed_rate:11.4g} {model:11.4g} "
          f"{r.correction_factor:7.4f} {r.correction_factor * r.observed_rate / r.incident_rate:7.4f}")
