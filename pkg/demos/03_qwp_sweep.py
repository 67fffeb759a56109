"""Wave-plate sweep: coincidences follow cos^2(2 theta).

Without noise the minimum at 45 degrees is empty.  Adding background lifts
the floor in proportion to the noise rate while the amplitude stays put.
"""

import numpy as np

from qicorr.analysis import fit_sinusoid, sweep_qwp
from qicorr.recipes import visibility_reference_config

cfg = visibility_reference_config(duration=0.3).with_(reference_detector__efficiency=0.5)
angles = np.radians(np.arange(0, 91, 7.5))

for nb in (0.0, 2e6, 8e6):
    res = sweep_qwp(cfg.with_(noise__noise_rate=nb), angles, peak_lag=49)
    fit = fit_sinusoid(res)
    curve = " ".join(f"{int(c):4d}" for c in res.counts)
    print(f"noise {nb:8.2g}/s  counts {curve}")
    print(f"{'':17}floor {fit.c_min:7.1f} +- {fit.sigma_c_min:4.1f}   "
          f"max {fit.c_max:7.1f}   phase {np.degrees(fit.phase):+.2f} deg   V = {fit.visibility:.3f}")
