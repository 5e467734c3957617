"""
Monte Carlo photon streams from a pulsed, blinking two-level emitter.

Times are in ps from the start of the run.  The emitter switches between a
bright (ON) and a dark (OFF) state with exponential dwell times; only an ON
emitter can be excited by a laser pulse.  Pulses are processed in fixed-size
blocks, each with its own seed, so the output does not depend on how many
threads share the work.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import _seeding

BLOCK_PULSES = 1 << 20
FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
CHANNEL_A = 0
CHANNEL_B = 1


@dataclass(frozen=True)
class BlinkModel:
    """Mean dwell times [ns] in the bright and dark manifolds."""
    mean_on_dwell: float = 252.0
    mean_off_dwell: float = 167.0

    def __post_init__(self):
        if self.mean_on_dwell <= 0 or self.mean_off_dwell <= 0:
            raise ValueError("dwell times must be positive")


@dataclass(frozen=True)
class SimConfig:
    rep_rate_mhz: float = 40.0
    lifetime_ns: float = 0.499
    excitation_prob: float = 0.9
    two_photon_prob: float = 0.0
    detection_efficiency: float = 0.3
    dark_count_rate: float = 100.0      # counts per second, both detectors together
    irf_fwhm_ps: float = 100.0
    duration_s: float = 0.25
    rng_seed: int = 42

    def __post_init__(self):
        for name in ("excitation_prob", "two_photon_prob", "detection_efficiency"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.rep_rate_mhz <= 0:
            raise ValueError("repetition rate must be positive")
        if self.duration_s <= 0:
            raise ValueError("duration must be positive")
        if self.lifetime_ns <= 0:
            raise ValueError("lifetime must be positive")
        if self.dark_count_rate < 0 or self.irf_fwhm_ps < 0:
            raise ValueError("dark count rate and IRF width must be >= 0")

    @property
    def period_ps(self) -> float:
        return 1e6 / self.rep_rate_mhz

    @property
    def n_pulses(self) -> int:
        return int(round(self.duration_s * self.rep_rate_mhz * 1e6))


@dataclass(frozen=True, eq=False)
class TimestampStream:
    """Detection times [ps], sorted, with HBT channel tags (0 = A, 1 = B)."""
    times: np.ndarray
    channels: np.ndarray
    rep_rate_mhz: float

    def __post_init__(self):
        t = np.ascontiguousarray(self.times, dtype=np.float64)
        c = np.ascontiguousarray(self.channels, dtype=np.uint8)
        if t.shape != c.shape or t.ndim != 1:
            raise ValueError("times and channels must be 1-D arrays of equal length")
        if c.size and c.max() > 1:
            raise ValueError("channels must be 0 (A) or 1 (B)")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "channels", c)

    def __len__(self):
        return self.times.size

    @property
    def is_sorted(self) -> bool:
        return bool(np.all(np.diff(self.times) >= 0))


def on_fraction(blink: BlinkModel) -> float:
    """Stationary probability of the bright state."""
    return blink.mean_on_dwell / (blink.mean_on_dwell + blink.mean_off_dwell)


def blink_envelope(blink: BlinkModel):
    """Bunching amplitude and correlation time [ns] of the telegraph process.

    Side peaks follow ``g2(t) = 1 + A exp(-|t| / tau_blink)`` with
    ``A = off/on`` and ``tau_blink = 1 / (1/on + 1/off)``.
    """
    A = blink.mean_off_dwell / blink.mean_on_dwell
    tau = 1.0 / (1.0 / blink.mean_on_dwell + 1.0 / blink.mean_off_dwell)
    return A, tau


class Telegraph:
    """Two-state telegraph sampled at increasing times (ps).

    Switch times are drawn sequentially in chunks from one generator and
    kept in a buffer, so the path is identical whatever sampling calls are
    made against it.
    """

    _CHUNK = 4096

    def __init__(self, blink: BlinkModel, rng: np.random.Generator):
        self._rng = rng
        self._mean = (blink.mean_off_dwell * 1e3, blink.mean_on_dwell * 1e3)  # by state
        self._state = bool(rng.random() < on_fraction(blink))
        first = rng.standard_exponential() * self._mean[int(self._state)]
        self._pending = np.array([first])
        self._last_state = not self._state  # state after the last buffered switch

    def _extend(self, until: float):
        while self._pending[-1] <= until:
            e = self._rng.standard_exponential(self._CHUNK)
            means = np.where(np.arange(self._CHUNK) % 2 == 0,
                             self._mean[int(self._last_state)],
                             self._mean[int(not self._last_state)])
            new = self._pending[-1] + np.cumsum(e * means)
            self._pending = np.concatenate([self._pending, new])
            # an even chunk size leaves the parity of the last state unchanged

    def sample(self, times: np.ndarray) -> np.ndarray:
        """Boolean ON indicator at ``times`` (ascending, not before earlier calls)."""
        if times.size == 0:
            return np.zeros(0, dtype=bool)
        self._extend(times[-1])
        flips = np.searchsorted(self._pending, times, side="right")
        states = (flips % 2 == 0) == self._state
        used = int(flips[-1])
        if used:
            if used % 2:
                self._state = not self._state
            self._pending = self._pending[used:]
        return states


def _emit_block(cfg: SimConfig, k0: int, on: np.ndarray, block: int):
    rng = _seeding.rng_for(cfg.rng_seed, _seeding.EMISSION, block)
    m = on.size
    period = cfg.period_ps
    tau = cfg.lifetime_ns * 1e3
    t_pulse = (k0 + np.arange(m)) * period
    excited = np.flatnonzero(on & (rng.random(m) < cfg.excitation_prob))
    first = t_pulse[excited] + rng.exponential(tau, excited.size)
    twin = excited[rng.random(excited.size) < cfg.two_photon_prob]
    second = t_pulse[twin] + rng.exponential(tau, twin.size)
    photons = np.concatenate([first, second])
    photons = photons[rng.random(photons.size) < cfg.detection_efficiency]
    n_dark = rng.poisson(cfg.dark_count_rate * m * period * 1e-12)
    dark = k0 * period + rng.random(n_dark) * (m * period)
    events = np.concatenate([photons, dark])
    sigma = cfg.irf_fwhm_ps * FWHM_TO_SIGMA
    if sigma > 0:
        events = events + rng.normal(0.0, sigma, events.size)
    channels = (rng.random(events.size) < 0.5).astype(np.uint8)
    return events, channels


def simulate_stream(cfg: SimConfig, blink: Optional[BlinkModel] = None,
                    threads: Optional[int] = None) -> TimestampStream:
    """Simulate detected photons for ``cfg.n_pulses`` laser pulses.

    Per pulse at ``k / f``: sample the telegraph; if ON, excite with
    ``excitation_prob`` and emit after an exponential delay, plus an
    independent second photon with ``two_photon_prob``; keep each photon with
    ``detection_efficiency``; add Poisson dark counts; blur every event with
    the Gaussian IRF; send it to channel A or B with equal probability.
    Events outside ``[0, duration)`` are dropped.

    ``blink=None`` means an emitter that never blinks.  ``threads`` defaults
    to ``HMRR_THREADS``; it does not change the result.
    """
    n = cfg.n_pulses
    threads = _seeding.thread_count() if threads is None else max(1, int(threads))
    telegraph = None
    if blink is not None:
        telegraph = Telegraph(blink, _seeding.rng_for(cfg.rng_seed, _seeding.TELEGRAPH))

    def block_states():
        for b, k0 in enumerate(range(0, n, BLOCK_PULSES)):
            m = min(BLOCK_PULSES, n - k0)
            if telegraph is None:
                on = np.ones(m, dtype=bool)
            else:
                on = telegraph.sample((k0 + np.arange(m)) * cfg.period_ps)
            yield b, k0, on

    if threads == 1:
        parts = [_emit_block(cfg, k0, on, b) for b, k0, on in block_states()]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_emit_block, cfg, k0, on, b) for b, k0, on in block_states()]
            parts = [f.result() for f in futures]

    times = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0)
    chans = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0, np.uint8)
    order = np.argsort(times, kind="stable")
    times, chans = times[order], chans[order]
    keep = (times >= 0) & (times < n * cfg.period_ps)
    return TimestampStream(times[keep], chans[keep], cfg.rep_rate_mhz)


def telegraph_autocorrelation(blink: BlinkModel, rep_rate_mhz: float, n_pulses: int,
                              max_lag: int, seed: int = 0):
    """Normalised autocovariance of the ON indicator sampled at the pulses.

    Returns ``(lags, c)`` with ``c[n] = <s_k s_{k+n}> / <s>^2 - 1``, which for a
    telegraph process equals ``A exp(-n T / tau_blink)``.  Also returns the
    empirical ON fraction.
    """
    period = 1e6 / rep_rate_mhz
    tel = Telegraph(blink, _seeding.rng_for(seed, _seeding.ORACLE))
    s = np.empty(n_pulses, dtype=np.float64)
    for k0 in range(0, n_pulses, BLOCK_PULSES):
        m = min(BLOCK_PULSES, n_pulses - k0)
        s[k0:k0 + m] = tel.sample((k0 + np.arange(m)) * period)
    p = s.mean()
    lags = np.arange(1, max_lag + 1)
    c = np.array([np.dot(s[:-n], s[n:]) / (n_pulses - n) for n in lags]) / p**2 - 1.0
    return lags, c, p


def fit_envelope(lags, c, period_ns: float, min_value: float = 0.02):
    """Log-linear fit of ``A exp(-lag T / tau)`` to autocovariance values."""
    lags = np.asarray(lags, dtype=float)
    c = np.asarray(c, dtype=float)
    use = c > min_value
    if use.sum() < 2:
        raise ValueError("not enough positive correlation to fit an envelope")
    slope, icpt = np.polyfit(lags[use] * period_ns, np.log(c[use]), 1, w=c[use])
    return math.exp(icpt), -1.0 / slope


def analytic_g2_zero(cfg: SimConfig, blink: Optional[BlinkModel], n_side_peaks: int = 20) -> float:
    """Expected normalised zero-delay peak area for the emission model.

    Counts pair probabilities directly: a same-pulse cross-channel pair needs
    a second photon, both detected and split over the two detectors; a pair
    between pulses 0 and n needs two independent emissions, correlated only
    through the telegraph.  Dark counts add an accidental floor to every
    peak.  The side-peak reference is the mean over the ``n_side_peaks``
    peaks nearest zero, as used by the histogram normaliser.
    """
    p_on = 1.0 if blink is None else on_fraction(blink)
    pe, p2, eta = cfg.excitation_prob, cfg.two_photon_prob, cfg.detection_efficiency
    period_s = 1.0 / (cfg.rep_rate_mhz * 1e6)
    pulses = cfg.n_pulses
    half = n_side_peaks // 2
    if blink is None:
        bunch = 1.0
    else:
        A, tau_b = blink_envelope(blink)
        n = np.arange(1, half + 1)
        bunch = float(np.mean(1.0 + A * np.exp(-n * period_s * 1e9 / tau_b)))
    zero = pulses * p_on * pe * p2 * eta**2 / 2.0
    mean_photons = p_on * pe * (1.0 + p2) * eta          # detected per pulse
    side = pulses * (mean_photons / 2.0) ** 2 * bunch
    # accidental pairs involving dark counts in a one-period window
    dark_per_period = cfg.dark_count_rate * period_s
    acc = pulses * (2.0 * (mean_photons / 2.0) * (dark_per_period / 2.0)
                    + (dark_per_period / 2.0) ** 2)
    return (zero + acc) / (side + acc)
