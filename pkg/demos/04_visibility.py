"""Visibility against noise and the dead-time corrected fit.

For each noise level the peak bin is counted at the maximum (0 deg) and the
minimum (45 deg).  Fitting V = C_corr/(C_corr + 2 C_ac d) recovers the true
coincidence count; dropping the correction (d = 1) biases it low.
"""

from qicorr.analysis import fit_visibility_curve, predict, sweep_visibility
from qicorr.recipes import VISIBILITY_REFERENCE_NOISE, visibility_reference_config

cfg = visibility_reference_config(duration=0.5)
sw = sweep_visibility(cfg, VISIBILITY_REFERENCE_NOISE, peak_lag=49)

print(f"{'noise/s':>9} {'C_max':>6} {'C_min':>6} {'V':>6} {'d':>6}")
for row in sw.rows():
    print(f"{row['x']:9.3g} {int(row['c_max']):6d} {int(row['c_min']):6d} {row['visibility']:6.3f} {row['d']:6.3f}")

truth = predict(cfg).true_coincidence_rate * cfg.duration
for correct in (True, False):
    fit = fit_visibility_curve(sw.c_ac, sw.visibility, sw.observed_rate, float(sw.c_max[0]),
                               cfg.signal_detector, sigma_v=sw.sigma_v, correct_dead_time=correct)
    label = "with d" if correct else "d = 1 "
    print(f"{label}: C_corr = {fit.c_corr:.1f} +- {fit.sigma_c_corr:.1f} (configured {truth:.1f})")
