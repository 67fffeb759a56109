"""SNR against injected noise for both receiver arrangements.

The polarization-filtered receiver (TPC) keeps more of the returned pair
photons than the beam-splitter one (TC), so its SNR stays a fixed factor
above at every noise level.  Results go to noise_sweep.csv.
"""

import sys

import numpy as np

from qicorr.analysis import compare_arrangements, predict
from qicorr.recipes import SNR_REFERENCE_NOISE, snr_reference_config
from qicorr.tsfile import write_csv

duration = float(sys.argv[1]) if len(sys.argv) > 1 else 0.5
cfg = snr_reference_config(duration=duration)
tpc, tc, ratio = compare_arrangements(cfg, SNR_REFERENCE_NOISE, peak_lag=49)

print(f"{'noise/s':>10} {'SNR TPC':>9} {'SNR TC':>8} {'ratio':>6} {'predicted':>9}")
rows = []
for i, nb in enumerate(SNR_REFERENCE_NOISE):
    a = predict(cfg.with_(noise__noise_rate=nb, channel__arrangement="TPC"), 49).snr
    b = predict(cfg.with_(noise__noise_rate=nb, channel__arrangement="TC"), 49).snr
    print(f"{nb:10.3g} {tpc.snr[i]:9.3f} {tc.snr[i]:8.3f} {ratio[i]:6.2f} {a / b:9.2f}")
    rows.append({"x": nb, "snr_tpc": tpc.snr[i], "snr_tc": tc.snr[i], "ratio": ratio[i]})

print(f"mean ratio {np.mean(ratio):.2f}")
write_csv("noise_sweep.csv", rows, ["x", "snr_tpc", "snr_tc", "ratio"])
