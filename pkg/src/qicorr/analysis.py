"""Experiment orchestration, closed-form predictions and model fits.

The pipeline for one measurement point is

    generate_pairs + generate_noise -> apply_channel (signal arm)
        -> detect (both arms) -> correlogram -> g2

Sweeps repeat it over noise levels or wave-plate angles with one derived seed
per point, so TC and TPC sweeps built from the same base seed see the same
pair emissions and the same noise photons.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize, stats

from ._rng import substream
from .correlator import (
    NoPeakError,
    UndefinedG2Error,
    correlogram,
    g2 as g2_estimate,
    peak_bin,
    snr as snr_from_g2,
)
from .detector import correction_factor, detect, observed_rate
from .pairgen import (
    PAIR,
    REFERENCE,
    SIGNAL,
    TC,
    TPC,
    apply_channel,
    generate_noise,
    generate_pairs,
    merge_events,
    survival_probability,
)

__all__ = [
    "FitError",
    "FitWarning",
    "Run",
    "Measurement",
    "Prediction",
    "SweepResult",
    "VisibilitySweep",
    "QwpFit",
    "VisibilityPoint",
    "VisibilityFit",
    "point_seed",
    "simulate",
    "measure",
    "peak_fraction",
    "predict",
    "locate_peak",
    "sweep_noise",
    "sweep_qwp",
    "sweep_accidentals",
    "sweep_visibility",
    "compare_arrangements",
    "fit_sinusoid",
    "visibility",
    "visibility_error",
    "visibility_model",
    "fit_visibility_curve",
    "linear_fit",
]

SIGNAL_CHANNEL = 1
REFERENCE_CHANNEL = 0


class FitError(RuntimeError):
    """A fit did not converge or its parameters are not identifiable."""


class FitWarning(UserWarning):
    pass


def point_seed(seed, index):
    """64-bit seed for sweep point ``index``; point 0 runs on ``seed`` itself."""
    if index == 0:
        return int(seed)
    state = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(seed) >> 32, int(index)])
    lo, hi = state.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


# ---------------------------------------------------------------------------
# single runs


@dataclass
class Run:
    signal: object  # TimestampStream
    reference: object
    pair_photons: int  # pair-origin photons reaching the signal detector
    noise_photons: int


def simulate(config, block_signal=False):
    """Run the full generation and detection chain for one configuration.

    ``block_signal`` removes the pair photons from the signal arm before the
    return optics, leaving only background on the signal detector (the
    accidental-coincidence calibration).
    """
    seed = config.seed
    source = config.source
    if source.seed != seed:
        source = replace(source, seed=seed)
    T = config.duration
    sig_pairs, ref = generate_pairs(source, T)
    if block_signal:
        sig_pairs = sig_pairs.select(np.zeros(len(sig_pairs), dtype=bool))
    noise = generate_noise(config.noise, T, seed)
    # thin each population on its own substream, then merge the survivors
    arm = merge_events(apply_channel(sig_pairs, config.channel, substream(seed, "channel", "pairs")),
                       apply_channel(noise, config.channel, substream(seed, "channel", "noise")))
    sig_clicks = detect(arm, config.signal_detector, substream(seed, "detector", SIGNAL), SIGNAL_CHANNEL)
    ref_clicks = detect(ref, config.reference_detector, substream(seed, "detector", REFERENCE),
                        REFERENCE_CHANNEL)
    return Run(sig_clicks, ref_clicks, arm.count(PAIR), len(arm) - arm.count(PAIR))


@dataclass
class Measurement:
    correlogram: object
    g2: object  # G2Estimate over every bin
    lag: int  # lower edge of the evaluated bin
    counts: int  # coincidences in that bin
    g2_value: float
    rate_s: float
    rate_r: float

    @property
    def snr(self):
        return snr_from_g2(self.g2_value) if math.isfinite(self.g2_value) else math.nan

    @property
    def sigma(self):
        return math.sqrt(self.counts)


def _bin_index(cfg, lag):
    k = (lag - cfg.lag_min) // cfg.bin_width
    if not 0 <= k < cfg.n_bins:
        raise ValueError(f"lag {lag} lies outside the correlogram range")
    return int(k)


def measure(config, peak_lag=None, block_signal=False):
    """Simulate ``config`` and read coincidences and g2 at ``peak_lag``.

    Without ``peak_lag`` the correlogram maximum is used.
    """
    run = simulate(config, block_signal=block_signal)
    corr = correlogram(run.signal, run.reference, config.correlator)
    k = peak_bin(corr) if peak_lag is None else _bin_index(config.correlator, peak_lag)
    try:
        est = g2_estimate(corr)
        value = float(est.g2[k])
    except UndefinedG2Error:  # an empty arm still has a well-defined (zero) count
        est, value = None, math.nan
    T = corr.duration
    return Measurement(corr, est, int(corr.lags[k]), int(corr.counts[k]), value,
                       corr.n_s / T, corr.n_r / T)


# ---------------------------------------------------------------------------
# closed-form expectations


def _ramp_mean(mu, s, a):
    """E[(X - a)_+] for X ~ N(mu, s^2)."""
    if s == 0:
        return max(mu - a, 0.0)
    z = (mu - a) / s
    return (mu - a) * stats.norm.cdf(z) + s * stats.norm.pdf(z)


def peak_fraction(delay, sigma, tick, lag_lo, lag_hi):
    """Probability that a twin pair lands at a tick lag in ``[lag_lo, lag_hi)``.

    The continuous lag is ``N(delay, sigma)``; with a uniformly distributed
    tick phase the floored lag is ``k`` with probability
    ``E[max(0, 1 - |lag/tick - k|)]``, summed here over the window.
    """
    mu, s = delay / tick, sigma / tick
    total = 0.0
    for k in range(int(lag_lo), int(lag_hi)):
        total += _ramp_mean(mu, s, k - 1) - 2.0 * _ramp_mean(mu, s, k) + _ramp_mean(mu, s, k + 1)
    return total


@dataclass(frozen=True)
class Prediction:
    pair_rate_at_signal: float  # pair photons reaching the signal detector, before efficiency
    noise_rate_at_signal: float
    signal_incident: float  # after efficiency, before dead time
    reference_incident: float
    signal_observed: float
    reference_observed: float
    true_coincidence_rate: float  # in the evaluated bin
    accidental_rate: float
    peak_fraction: float
    lag: int

    @property
    def coincidence_rate(self):
        return self.true_coincidence_rate + self.accidental_rate

    @property
    def g2(self):
        return self.coincidence_rate / self.accidental_rate if self.accidental_rate else math.inf

    @property
    def snr(self):
        return self.g2 - 1.0


def expected_lag(config):
    """Tick lag at which most twin pairs are expected."""
    delay = config.source.signal_delay - config.source.reference_delay
    return int(math.floor(delay / config.tick))


def predict(config, lag=None, block_signal=False):
    """Expected singles, coincidence and g2 values for ``config`` at bin ``lag``.

    Dead time enters through the live fractions ``1/(1 + R t_d)`` of both
    detectors; the time-tagger quantization through :func:`peak_fraction`.
    """
    src, det_s, det_r = config.source, config.signal_detector, config.reference_detector
    cfg = config.correlator
    p_pair, p_noise = survival_probability(config.channel, src.signal_polarization,
                                           config.noise.polarized)
    pair_at_sig = 0.0 if block_signal else src.pair_rate * p_pair
    noise_at_sig = config.noise.noise_rate * p_noise
    inc_s = (pair_at_sig + noise_at_sig) * det_s.efficiency
    inc_r = src.pair_rate * det_r.efficiency
    av_s, av_r = observed_rate(inc_s, det_s.dead_time), observed_rate(inc_r, det_r.dead_time)
    live_s, live_r = 1.0 / (1.0 + inc_s * det_s.dead_time), 1.0 / (1.0 + inc_r * det_r.dead_time)
    if lag is None:
        lag = expected_lag(config)
    lo = cfg.lag_min + _bin_index(cfg, lag) * cfg.bin_width
    sigma = math.sqrt(src.pair_jitter_sigma**2 + det_s.jitter_sigma**2 + det_r.jitter_sigma**2)
    frac = peak_fraction(src.signal_delay - src.reference_delay, sigma, config.tick, lo, lo + cfg.bin_width)
    true_rate = pair_at_sig * det_s.efficiency * det_r.efficiency * frac * live_s * live_r
    acc = av_s * av_r * cfg.bin_width * config.tick
    return Prediction(pair_at_sig, noise_at_sig, inc_s, inc_r, av_s, av_r, true_rate, acc, frac, lo)


def locate_peak(config):
    """Find the coincidence peak on a noise-free run at the maximum-transmission angle.

    Falls back to the geometric lag when the run shows no coincidences.
    """
    quiet = config.with_(noise__noise_rate=0.0, channel__qwp_angle=0.0)
    try:
        return measure(quiet).lag
    except (NoPeakError, ValueError):
        return int(config.correlator.lag_min
                   + _bin_index(config.correlator, expected_lag(config)) * config.correlator.bin_width)


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepResult:
    x: np.ndarray
    counts: np.ndarray
    g2: np.ndarray
    snr: np.ndarray
    sigma: np.ndarray  # Poisson error sqrt(N) of counts
    rate_s: np.ndarray
    rate_r: np.ndarray
    lag: int
    kind: str = "noise"
    arrangement: str = TPC
    errors: list = field(default_factory=list)

    def __len__(self):
        return len(self.x)

    @property
    def g2_sigma(self):
        """Poisson error of g2, ``sqrt(C)/expected_accidentals``."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.counts > 0, self.g2 * self.sigma / np.maximum(self.counts, 1), np.nan)

    def rows(self):
        for i in range(len(self.x)):
            yield {"x": self.x[i], "counts": self.counts[i], "g2": self.g2[i],
                   "snr": self.snr[i], "sigma": self.sigma[i]}


def _run_points(jobs, workers):
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda job: job(), jobs))
    return [job() for job in jobs]


def _guarded(fn):
    def job():
        try:
            return fn()
        except Exception as exc:  # a failed point is recorded, the sweep carries on
            return exc
    return job


def _collect(xs, results, lag, kind, arrangement):
    n = len(xs)
    out = {k: np.full(n, np.nan) for k in ("counts", "g2", "snr", "sigma", "rate_s", "rate_r")}
    errors = []
    for i, res in enumerate(results):
        if isinstance(res, Exception):
            errors.append((i, f"{type(res).__name__}: {res}"))
            continue
        out["counts"][i] = res.counts
        out["g2"][i] = res.g2_value
        out["snr"][i] = res.snr
        out["sigma"][i] = res.sigma
        out["rate_s"][i] = res.rate_s
        out["rate_r"][i] = res.rate_r
    return SweepResult(np.asarray(xs, dtype=float), lag=lag, kind=kind, arrangement=arrangement,
                       errors=errors, **out)


def sweep_noise(config, noise_levels, arrangement=None, peak_lag=None, workers=1):
    """Peak g2 and SNR versus injected noise rate ``N_b`` (photons/s).

    The evaluated bin is found once on a noise-free run (``locate_peak``)
    unless ``peak_lag`` is given, so low-SNR points are not biased by
    picking the largest fluctuation.
    """
    if len(noise_levels) < 2:
        raise ValueError("a noise sweep needs at least 2 levels")
    return _noise_sweep(config, noise_levels, arrangement, peak_lag, workers)


def _noise_sweep(config, noise_levels, arrangement=None, peak_lag=None, workers=1):
    if arrangement is not None:
        config = config.with_(channel__arrangement=arrangement)
    lag = locate_peak(config) if peak_lag is None else peak_lag
    jobs = [
        _guarded(lambda nb=nb, i=i: measure(
            config.with_(noise__noise_rate=float(nb), seed=point_seed(config.seed, i)), lag))
        for i, nb in enumerate(noise_levels)
    ]
    return _collect(noise_levels, _run_points(jobs, workers), lag, "noise", config.channel.arrangement)


def sweep_qwp(config, angles, peak_lag=None, workers=1):
    """Coincidences in the peak bin versus wave-plate angle (radians).

    Each angle runs on its own seed, so the points are independent Poisson
    draws as the fit assumes.
    """
    angles = np.asarray(angles, dtype=float)
    if len(angles) < 2 or np.ptp(angles) < math.pi / 4 - 1e-12:
        raise ValueError("angles must cover at least half a period (pi/4)")
    lag = locate_peak(config) if peak_lag is None else peak_lag
    jobs = [
        _guarded(lambda i=i, th=th: measure(
            config.with_(channel__qwp_angle=float(th), seed=point_seed(config.seed, i)), lag))
        for i, th in enumerate(angles)
    ]
    return _collect(angles, _run_points(jobs, workers), lag, "qwp", config.channel.arrangement)


def sweep_accidentals(config, noise_levels, workers=1):
    """Blocked-signal coincidences summed over the whole correlogram range.

    Returns the sweep and the window length in seconds.
    """
    cfg = config.correlator

    def point(i, nb):
        run = simulate(config.with_(noise__noise_rate=float(nb), seed=point_seed(config.seed, i)),
                       block_signal=True)
        corr = correlogram(run.signal, run.reference, cfg)
        T = corr.duration
        total = int(corr.counts.sum())
        expected = len(run.signal) * len(run.reference) * (cfg.lag_max - cfg.lag_min) * config.tick / T
        g = total / expected if expected > 0 else math.nan
        return Measurement(corr, None, cfg.lag_min, total, g, len(run.signal) / T, len(run.reference) / T)

    jobs = [_guarded(lambda i=i, nb=nb: point(i, nb)) for i, nb in enumerate(noise_levels)]
    res = _collect(noise_levels, _run_points(jobs, workers), cfg.lag_min, "accidentals",
                   config.channel.arrangement)
    return res, (cfg.lag_max - cfg.lag_min) * config.tick


@dataclass
class VisibilitySweep:
    x: np.ndarray  # injected noise rate
    c_max: np.ndarray
    c_min: np.ndarray
    visibility: np.ndarray
    sigma_v: np.ndarray
    observed_rate: np.ndarray  # signal detector rate at the maximum
    d: np.ndarray
    lag: int
    errors: list = field(default_factory=list)

    def __len__(self):
        return len(self.x)

    @property
    def c_ac(self):
        return self.c_min

    def rows(self):
        for i in range(len(self.x)):
            yield {"x": self.x[i], "c_max": self.c_max[i], "c_min": self.c_min[i],
                   "c_ac": self.c_min[i], "visibility": self.visibility[i],
                   "sigma_v": self.sigma_v[i], "observed_rate": self.observed_rate[i], "d": self.d[i]}


def sweep_visibility(config, noise_levels, peak_lag=None, workers=1):
    """Maximum (0 rad) and floor (pi/4) coincidences for each noise level.

    ``C_min`` is the accidental count ``C_ac``; ``d`` comes from the signal
    detector's observed rate at the maximum.  The two angles of a point run
    on distinct seeds so that ``C_max`` and ``C_min`` are independent.
    """
    lag = locate_peak(config) if peak_lag is None else peak_lag
    t_d = config.signal_detector.dead_time

    def point(i, nb):
        base = config.with_(noise__noise_rate=float(nb))
        hi = measure(base.with_(channel__qwp_angle=0.0, seed=point_seed(config.seed, 2 * i)), lag)
        lo = measure(base.with_(channel__qwp_angle=math.pi / 4, seed=point_seed(config.seed, 2 * i + 1)), lag)
        v = visibility(hi.counts, lo.counts)
        return hi.counts, lo.counts, v, visibility_error(hi.counts, lo.counts), hi.rate_s, \
            correction_factor(hi.rate_s, t_d)

    jobs = [_guarded(lambda i=i, nb=nb: point(i, nb)) for i, nb in enumerate(noise_levels)]
    n = len(noise_levels)
    cols = np.full((6, n), np.nan)
    errors = []
    for i, res in enumerate(_run_points(jobs, workers)):
        if isinstance(res, Exception):
            errors.append((i, f"{type(res).__name__}: {res}"))
        else:
            cols[:, i] = res
    return VisibilitySweep(np.asarray(noise_levels, dtype=float), *cols, lag=lag, errors=errors)


def compare_arrangements(config, noise_levels, peak_lag=None, workers=1):
    """TPC and TC noise sweeps at the same pair rate and seeds.

    Returns ``(tpc, tc, ratio)`` with ``ratio = SNR_TPC / SNR_TC`` per point.
    """
    lag = locate_peak(config.with_(channel__arrangement=TPC)) if peak_lag is None else peak_lag
    tpc = sweep_noise(config, noise_levels, TPC, lag, workers)
    tc = sweep_noise(config, noise_levels, TC, lag, workers)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = tpc.snr / tc.snr
    return tpc, tc, ratio


# ---------------------------------------------------------------------------
# wave-plate sinusoid


@dataclass
class QwpFit:
    c_max: float
    c_min: float
    phase: float
    residual_norm: float
    sigma_c_max: float = math.nan
    sigma_c_min: float = math.nan
    sigma_phase: float = math.nan
    chi2: float = math.nan
    degenerate: bool = False

    @property
    def amplitude(self):
        return self.c_max - self.c_min

    @property
    def visibility(self):
        return visibility(self.c_max, self.c_min)


def _sinusoid(p, theta):
    floor, amp, phase = p
    return floor + amp * np.cos(2.0 * theta - phase) ** 2


def fit_sinusoid(sweep=None, theta=None, counts=None, sigma=None):
    """Least-squares fit of ``floor + A cos^2(2 theta - phase)``.

    Accepts a :class:`SweepResult` or explicit arrays.  Points are weighted
    by their Poisson errors (``sqrt(N)``, at least 1).  A Levenberg-Marquardt
    solve is started from the exact linear solution in ``cos 4theta`` and
    ``sin 4theta``; a negative floor is refitted with the floor bounded at 0.
    A vanishing amplitude leaves the phase undetermined: the fit is returned
    with ``degenerate=True`` and a :class:`FitWarning`.
    """
    if sweep is not None:
        theta, counts, sigma = sweep.x, sweep.counts, sweep.sigma
    theta = np.asarray(theta, dtype=float)
    y = np.asarray(counts, dtype=float)
    ok = np.isfinite(y)
    theta, y = theta[ok], y[ok]
    if sigma is None:
        sigma = np.sqrt(np.maximum(y, 0.0))
    else:
        sigma = np.asarray(sigma, dtype=float)[ok]
    sigma = np.maximum(sigma, 1.0)
    if len(theta) < 4 or np.ptp(theta) < math.pi / 4 - 1e-12:
        raise FitError("need at least 4 points spanning half a period")

    design = np.column_stack([np.ones_like(theta), np.cos(4 * theta), np.sin(4 * theta)])
    coef, *_ = np.linalg.lstsq(design / sigma[:, None], y / sigma, rcond=None)
    half_amp = math.hypot(coef[1], coef[2])
    p0 = np.array([coef[0] - half_amp, 2.0 * half_amp, 0.5 * math.atan2(coef[2], coef[1])])

    def resid(p):
        return (_sinusoid(p, theta) - y) / sigma

    scale = max(float(np.max(np.abs(y))), 1.0)
    degenerate = half_amp <= 1e-9 * scale
    if degenerate:
        sol_x = p0
        jac = None
    else:
        sol = optimize.least_squares(resid, p0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if sol.x[0] < 0:
            lower = [0.0, -np.inf, -np.inf]
            start = np.array([0.0, max(p0[1], 1e-12), p0[2]])
            sol = optimize.least_squares(resid, start, method="trf", bounds=(lower, np.inf),
                                         xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if not sol.success:
            raise FitError(f"sinusoid fit did not converge: {sol.message}")
        sol_x, jac = sol.x.copy(), sol.jac

    floor, amp, phase = sol_x
    if amp < 0:
        floor, amp, phase = floor + amp, -amp, phase + math.pi / 2
    phase = (phase + math.pi / 2) % math.pi - math.pi / 2

    r = _sinusoid((floor, amp, phase), theta) - y
    chi2 = float(np.sum((r / sigma) ** 2))
    s_max = s_min = s_phase = math.nan
    if jac is not None:
        jtj = jac.T @ jac
        if np.linalg.matrix_rank(jtj) < 3:
            degenerate = True
        else:
            cov = np.linalg.inv(jtj)
            s_min = math.sqrt(cov[0, 0])
            s_max = math.sqrt(max(cov[0, 0] + cov[1, 1] + 2 * cov[0, 1], 0.0))
            s_phase = math.sqrt(cov[2, 2])
    if degenerate:
        warnings.warn("sinusoid amplitude is zero; phase is undetermined", FitWarning, stacklevel=2)
        # with A = 0 the floor is the weighted mean
        w = 1.0 / sigma**2
        floor = float(np.sum(w * y) / np.sum(w))
        amp = 0.0
        s_min = s_max = math.sqrt(1.0 / np.sum(w))
        chi2 = float(np.sum(((y - floor) / sigma) ** 2))
        r = floor - y
    return QwpFit(float(floor + amp), float(floor), float(phase), float(np.linalg.norm(r)),
                  s_max, s_min, s_phase, chi2, bool(degenerate))


# ---------------------------------------------------------------------------
# visibility


def visibility(c_max, c_min):
    """Contrast ``(C_max - C_min)/(C_max + C_min)`` of the wave-plate sweep."""
    if c_max < 0 or c_min < 0:
        raise ValueError("coincidence counts must be >= 0")
    if c_max + c_min <= 0:
        raise ValueError("visibility undefined for C_max = C_min = 0")
    return (c_max - c_min) / (c_max + c_min)


def visibility_error(c_max, c_min):
    """Propagated error of :func:`visibility` with Poisson ``sqrt(N)`` counts."""
    total = c_max + c_min
    if total <= 0:
        raise ValueError("visibility undefined for C_max = C_min = 0")
    return 2.0 * math.sqrt(c_max * c_min * total) / total**2


def visibility_model(c_corr, c_ac, d=1.0):
    """``C_corr / (C_corr + 2 C_ac d)``: visibility from true and accidental coincidences."""
    if c_corr < 0 or c_ac < 0 or d < 0:
        raise ValueError("inputs must be >= 0")
    den = c_corr + 2.0 * c_ac * d
    if den == 0:
        raise ValueError("visibility model undefined: zero denominator")
    return c_corr / den


@dataclass(frozen=True)
class VisibilityPoint:
    visibility: float
    c_corr: float
    c_ac: float
    d: float


@dataclass
class VisibilityFit:
    c_corr: float
    sigma_c_corr: float
    d: np.ndarray
    residuals: np.ndarray
    chi2: float
    points: list


def fit_visibility_curve(c_ac, v, observed_rates, c_corr_guess, detector, sigma_v=None,
                         correct_dead_time=True):
    """Fit ``C_corr`` in ``V = C_corr/(C_corr + 2 C_ac d)`` over a noise sweep.

    ``d`` is computed per point from the observed signal-detector rate and the
    detector's dead time; ``correct_dead_time=False`` forces ``d = 1``.
    ``sigma_v`` weights the points (unweighted when omitted); the reported
    ``sigma_c_corr`` comes from the weighted Jacobian at the optimum.
    """
    c_ac = np.asarray(c_ac, dtype=float)
    v = np.asarray(v, dtype=float)
    rates = np.asarray(observed_rates, dtype=float)
    if not (len(c_ac) == len(v) == len(rates)):
        raise ValueError("c_ac, v and observed_rates must have equal lengths")
    keep = np.isfinite(c_ac) & np.isfinite(v) & np.isfinite(rates)
    if sigma_v is not None:
        sigma_v = np.asarray(sigma_v, dtype=float)
        keep &= np.isfinite(sigma_v)
        sigma_v = sigma_v[keep]
    c_ac, v, rates = c_ac[keep], v[keep], rates[keep]
    if len(v) < 3:
        raise ValueError("need at least 3 points")
    if correct_dead_time:
        d = np.array([correction_factor(r, detector.dead_time) for r in rates])
    else:
        d = np.ones_like(rates)
    sig = np.ones_like(v) if sigma_v is None else np.asarray(sigma_v, dtype=float)
    if np.any(sig <= 0):
        # noise-free points carry zero propagated error; give them the smallest nonzero one
        positive = sig[sig > 0]
        sig = np.where(sig > 0, sig, positive.min() if positive.size else 1.0)
    acc = c_ac * d
    if not np.any(acc > 0):
        raise FitError("all accidental terms are zero; C_corr is not identifiable")

    def resid(p):
        return (p[0] / (p[0] + 2.0 * acc) - v) / sig

    sol = optimize.least_squares(resid, [float(c_corr_guess)], method="lm",
                                 xtol=1e-15, ftol=1e-15, gtol=1e-15)
    if not sol.success or not np.isfinite(sol.x[0]) or sol.x[0] <= 0:
        raise FitError(f"visibility fit did not converge: {sol.message}")
    c = float(sol.x[0])
    jtj = float(sol.jac[:, 0] @ sol.jac[:, 0])
    if jtj <= 0:
        raise FitError("visibility fit is degenerate (zero Jacobian)")
    sigma_c = math.sqrt(1.0 / jtj)
    if sigma_v is None:
        # unweighted: scale by the residual variance
        dof = max(len(v) - 1, 1)
        sigma_c *= math.sqrt(float(np.sum(sol.fun**2)) / dof)
    model = c / (c + 2.0 * acc)
    points = [VisibilityPoint(float(m), c, float(a), float(di)) for m, a, di in zip(model, c_ac, d)]
    return VisibilityFit(c, sigma_c, d, v - model, float(np.sum(sol.fun**2)), points)


def linear_fit(x, y):
    """Ordinary least-squares line; returns ``(slope, intercept, r_squared)``."""
    res = stats.linregress(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return float(res.slope), float(res.intercept), float(res.rvalue**2)
