"""
Executable acceptance table.

Each figure group computes a set of numbers end to end and compares them
with their expected values.  Criteria are numbered 1-11; ``numerics`` covers
the correctness gates (correlator oracle, fit recovery, determinism) that do
not belong to a single figure.
"""

from __future__ import annotations

import hashlib
import math
import os
import tempfile
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .. import _kernels, _seeding
from ..cavity_qed import (
    CouplingModel,
    EmitterSpec,
    lifetime_vs_detuning,
    mode_volume_for_purcell,
    purcell_from_lifetimes,
    purcell_from_qv,
)
from ..fitkit import ModelSpec, evaluate, fit, jacobian_check
from ..photostat import (
    BlinkModel,
    SimConfig,
    TimestampStream,
    analytic_g2_zero,
    blink_envelope,
    fit_envelope,
    hbt_correlate,
    normalize_g2,
    on_fraction,
    simulate_stream,
    telegraph_autocorrelation,
)
from ..ring_model import (
    CavityMode,
    RingGeometry,
    TaperSpec,
    WaveguideParams,
    critical_coupler,
    free_spectral_range,
    group_index_for_fsr,
    mode_comb,
    q_from_linewidth,
    q_from_losses,
    taper_loss,
)
from ..thermo_tuning import HeaterSpec, TuningState, co_tune, power_to_resonance, wavelength_at_power

FIGURES = ("fig2", "fig3", "fig4", "fig5", "numerics")


@dataclass(frozen=True)
class Check:
    id: str
    criterion: int
    figure: str
    description: str
    anchor: str
    value: object
    expected: str
    passed: bool
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "id": self.id, "criterion": self.criterion, "figure": self.figure,
            "description": self.description, "anchor": self.anchor,
            "value": _jsonable(self.value), "expected": self.expected,
            "passed": bool(self.passed), "seconds": round(self.seconds, 3),
        }

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] C{self.criterion:<2d} {self.id}: {self.description} = {_short(self.value)} (expected {self.expected})"


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        return float(v) if math.isfinite(v) else None
    return v


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_short(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


class _Recorder:
    def __init__(self, figure):
        self.figure = figure
        self.checks = []
        self._t = time.perf_counter()

    def add(self, id, criterion, description, anchor, value, expected, passed):
        now = time.perf_counter()
        self.checks.append(Check(id, criterion, self.figure, description, anchor, value,
                                 expected, bool(passed), now - self._t))
        self._t = now


def _within(v, target, tol):
    return abs(v - target) <= tol


# ------------------------------------------------------------------ devices

def _device(group_index=2.87):
    wg = WaveguideParams(group_index=group_index, intrinsic_loss=0.78, reference_wavelength=910.0)
    return wg, RingGeometry(15.0, 25.0)


def check_fig2():
    """Criteria 1-5: losses, Q, FSR and heater tuning."""
    r = _Recorder("fig2")
    t1 = taper_loss(TaperSpec(10.0, 0.983))
    t2 = taper_loss(TaperSpec(10.0, 0.998))
    r.add("taper-loss-baseline", 1, "taper_loss(0.983, 10 um) [dB/mm]",
          "reported 7.45 dB/mm", t1, "7.45 +- 0.01", _within(t1, 7.45, 0.01))
    r.add("taper-loss-optimized", 1, "taper_loss(0.998, 10 um) [dB/mm]",
          "reported 0.87 dB/mm", t2, "0.87 +- 0.01", _within(t2, 0.87, 0.01))

    q_lw = q_from_linewidth(914.7, 0.117)
    r.add("q-linewidth", 2, "q_from_linewidth(914.7 nm, 0.117 nm)",
          "reported Q of 7800", q_lw, "in [7700, 7900]", 7700 <= q_lw <= 7900)

    ng_oracle = group_index_for_fsr(2.0, RingGeometry(15.0, 25.0), 910.0)
    wg, geom = _device(2.87)
    q0 = float(q_from_losses(wg, t1, 910.0))
    q1 = float(q_from_losses(wg, t2, 910.0))
    r.add("q-budget", 3, "q_from_losses(n_g=2.87, 0.78 + 7.45 dB/mm, 910 nm)",
          f"reported Q above 1.0e4; n_g from a 2 nm FSR is {ng_oracle:.4f}", q0,
          "in [0.95e4, 1.15e4]", 0.95e4 <= q0 <= 1.15e4)
    r.add("q-ratio", 3, "Q(0.87 dB/mm taper) / Q(7.45 dB/mm taper)",
          "derived from the loss formula", q1 / q0, "in [4.5, 5.5]", 4.5 <= q1 / q0 <= 5.5)

    fsr = free_spectral_range(wg, geom, 910.0)
    r.add("fsr", 4, "free_spectral_range(2.87, R=15 um, L_s=25 um, 910 nm) [nm]",
          "reported FSR of about 2 nm", fsr, "2.00 +- 0.02", _within(fsr, 2.0, 0.02))
    total = wg.intrinsic_loss + t1
    modes = mode_comb(critical_coupler(total, geom), wg, geom, (900.0, 920.0))
    centers = np.array([m.center_wavelength for m in modes])
    spacing = np.diff(centers)
    ref = np.array([free_spectral_range(wg, geom, 0.5 * (a + b)) for a, b in zip(centers[:-1], centers[1:])])
    dev = float(np.max(np.abs(spacing / ref - 1.0))) if spacing.size else float("nan")
    r.add("mode-comb-spacing", 4, "max |spacing / FSR(midpoint) - 1| over modes in 900-920 nm",
          "FSR formula", dev, "< 0.01", spacing.size >= 5 and dev < 0.01)

    heater = HeaterSpec(23.8, 0.13, 30.0)
    qd1 = TuningState.at_rest("QD1", 913.6)
    shift = wavelength_at_power(qd1, heater, 30.0) - qd1.base_wavelength
    r.add("tuning-shift", 5, "shift at 30 mW with gamma = 0.13 nm/mW [nm]",
          "reported shift of about 4 nm over 0-30 mW", shift, "3.9 +- 0.1", _within(shift, 3.9, 0.1))
    sol = power_to_resonance(qd1, heater, 914.7)
    r.add("tuning-power", 5, "power_to_resonance(913.6 -> 914.7 nm) [mW]",
          "derived from the 1.1 nm detuning", sol.power_mw, "8.46 +- 0.01",
          _within(sol.power_mw, 8.46, 0.01))
    return r.checks


def check_fig3():
    """Criterion 6: Purcell factor and lifetime-detuning curve."""
    r = _Recorder("fig3")
    F, Fp = purcell_from_lifetimes(2.25, 0.499, 0.9)
    r.add("purcell", 6, "purcell_from_lifetimes(2.25, 0.499, 0.9).Fp",
          "reported Fp = 4.9", Fp, "4.90 +- 0.02", _within(Fp, 4.90, 0.02))
    emitter = EmitterSpec("QD1", 913.6, 2.25, 0.9)
    coupling = CouplingModel(CavityMode(914.7, 0.117), F)
    rows = lifetime_vs_detuning(emitter, coupling, [0.0, -1.1])
    r.add("lifetime-resonant", 6, "tau(detuning = 0) [ns]", "reported 0.499 ns",
          float(rows[0, 1]), "0.499 +- 0.001", _within(rows[0, 1], 0.499, 1e-3))
    r.add("lifetime-detuned", 6, "tau(|detuning| = 1.1 nm, w = 0.117 nm) [ns]",
          "reported far-detuned lifetime 2.25 ns", float(rows[1, 1]), ">= 2.24",
          rows[1, 1] >= 2.24)
    v = mode_volume_for_purcell(10457.0, 6.0)
    fp_qv = purcell_from_qv(7800.0, 132.0)
    r.add("qv-inversion", 6, "mode volume for Fp = 6 at Q = 10457 [(lambda/n)^3]",
          "derived by inverting Fp = 3 Q / (4 pi^2 V)", v, "132 +- 1", _within(v, 132.0, 1.0))
    r.add("qv-forward", 6, "purcell_from_qv(7800, 132)", "derived from the same formula",
          fp_qv, "4.5 +- 0.05", _within(fp_qv, 4.5, 0.05))
    return r.checks


# ------------------------------------------------------------- photon stats

PIPELINE_PULSES = 10**7


def _pipeline_config(two_photon_prob, seed=42):
    return SimConfig(rep_rate_mhz=40.0, lifetime_ns=0.499, excitation_prob=0.9,
                     two_photon_prob=two_photon_prob, detection_efficiency=0.3,
                     dark_count_rate=100.0, irf_fwhm_ps=100.0,
                     duration_s=PIPELINE_PULSES / 40e6, rng_seed=seed)


def g2_standard_error(hist) -> float:
    """Poisson error of the zero-delay area over the mean of the side peaks."""
    z = hist.g2_zero * hist.normalization_constant
    s = hist.normalization_constant
    k = len(hist.side_peak_areas)
    return math.sqrt(z / s**2 + hist.g2_zero**2 / (k * s))


def fit_g2_histogram(hist, rep_rate_mhz: float, irf_fwhm_ps: float, fixed: Optional[dict] = None,
                     refine: int = 3):
    """Fit ``g2_comb`` to a normalised histogram (time axis converted to ns).

    The first pass weights bins by ``1/max(raw, 1)``.  That is biased low where
    counts are small, as in the zero-delay peak, so ``refine`` further passes
    reweight by the fitted model (``1/mu``); the fixed point of that iteration
    is the Poisson maximum-likelihood estimate.
    """
    tau_ns = hist.tau * 1e-3
    raw = np.asarray(hist.raw_counts, dtype=float)
    s = hist.normalization_constant
    pins = {"f": rep_rate_mhz * 1e-3, "irf_fwhm": irf_fwhm_ps * 1e-3}
    pins.update(fixed or {})
    options = {"bin_width": hist.bin_width * 1e-3}
    spec = ModelSpec("g2_comb", fixed_parameters=pins, options=options)
    res = fit(spec, tau_ns, hist.counts, weights=s**2 / np.maximum(raw, 1.0))
    for _ in range(refine):
        mu = evaluate(spec, tau_ns, res.parameters) * s
        start = {k: v for k, v in res.parameters.items() if k not in pins}
        spec = ModelSpec("g2_comb", fixed_parameters=pins, initial_guess=start, options=options)
        res = fit(spec, tau_ns, hist.counts, weights=s**2 / np.maximum(mu, 1e-2))
    return res


def check_fig4():
    """Criteria 7-8: blinking statistics and the g2 pipeline."""
    r = _Recorder("fig4")
    blink = BlinkModel(252.0, 167.0)
    p = on_fraction(blink)
    r.add("on-fraction", 7, "on_fraction(252 ns, 167 ns)", "reported efficiency of 60.1%",
          p, "0.601 +- 0.001", _within(p, 0.601, 0.001))

    A, tau_b = blink_envelope(blink)
    lags, c, _ = telegraph_autocorrelation(blink, 40.0, PIPELINE_PULSES, 40, seed=7)
    A_mc, tau_mc = fit_envelope(lags, c, 25.0)
    ok = abs(A_mc / A - 1) < 0.05 and abs(tau_mc / tau_b - 1) < 0.05
    r.add("blink-envelope", 7, "blink_envelope (A, tau_blink [ns]) vs 1e7-pulse telegraph",
          "derived telegraph oracle; analytic A = 0.663, tau = 100.4 ns",
          {"A": A, "tau_blink": tau_b, "A_mc": A_mc, "tau_blink_mc": tau_mc},
          "within 5%", ok)

    window = 262500.0  # 10.5 periods: room for 20 side peaks
    ideal = _pipeline_config(0.0)
    stream0 = simulate_stream(ideal, blink)
    h0 = normalize_g2(hbt_correlate(stream0, window, 100.0), 40.0)
    r.add("g2-ideal", 8, "normalised g2(0), two_photon_prob = 0, 1e7 pulses",
          "derived: same-pulse pairs impossible", h0.g2_zero, "< 0.01", h0.g2_zero < 0.01)

    multi = _pipeline_config(0.004)
    h1 = normalize_g2(hbt_correlate(simulate_stream(multi, blink), window, 100.0), 40.0)
    expect = analytic_g2_zero(multi, blink)
    sigma = g2_standard_error(h1)
    r.add("g2-two-photon", 8, "normalised g2(0), two_photon_prob = 0.004, 1e7 pulses",
          "derived pair-probability oracle",
          {"g2_zero": h1.g2_zero, "oracle": expect, "sigma": sigma},
          "|g2 - oracle| <= 3 sigma", abs(h1.g2_zero - expect) <= 3 * sigma)

    # Preset scenario: two-photon probability chosen so the oracle gives 0.008.
    from .scenario import DEFAULT_SCENARIO
    preset = _pipeline_config(DEFAULT_SCENARIO["sim"]["two_photon_prob"])
    target = analytic_g2_zero(preset, blink)
    h2 = normalize_g2(hbt_correlate(simulate_stream(preset, blink), window, 100.0), 40.0)
    res = fit_g2_histogram(h2, 40.0, 100.0)
    g2_fit = res.parameters["g2_zero"]
    se = res.standard_errors["g2_zero"]
    r.add("g2-fit-preset", 8, "g2_comb fit of the preset scenario (target g2(0) = 0.008)",
          "reported g2(0) = 0.008 +- 0.004 used as the preset value",
          {"g2_zero_fit": g2_fit, "stderr": se, "target": target, "converged": res.converged},
          "converged and |fit - target| <= 3 stderr",
          res.converged and abs(g2_fit - target) <= 3 * se)

    wide = normalize_g2(hbt_correlate(stream0, 2012500.0, 100.0), 40.0)
    res_b = fit_g2_histogram(wide, 40.0, 100.0)
    A_fit, tb_fit = res_b.parameters["A_blink"], res_b.parameters["tau_blink"]
    ok = res_b.converged and abs(A_fit / A - 1) < 0.10 and abs(tb_fit / tau_b - 1) < 0.10
    r.add("g2-fit-envelope", 7, "g2_comb fit (A_blink, tau_blink [ns]) over +-2 us",
          "derived telegraph analytics", {"A_blink": A_fit, "tau_blink": tb_fit},
          "within 10% of (0.663, 100.4)", ok)
    return r.checks


def check_fig5():
    """Two heated devices brought onto one wavelength (tuning, criterion 5)."""
    r = _Recorder("fig5")
    heater = HeaterSpec(23.8, 0.13, 30.0)
    qd2 = TuningState.at_rest("QD2", 911.4)
    qd3 = TuningState.at_rest("QD3", 911.9)
    plan = co_tune([(qd2, heater), (qd3, heater)], [912.41, 912.41])
    err = max(abs(s.achieved_nm - 912.41) for s in plan)
    single = [power_to_resonance(s, heater, 912.41).power_mw for s in (qd2, qd3)]
    same = all(abs(a.power_mw - b) <= 1e-12 for a, b in zip(plan, single))
    r.add("co-tune", 5, "co_tune QD2 (911.4 nm), QD3 (911.9 nm) -> 912.41 nm",
          "reported common wavelength 912.41 nm",
          {"P_QD2_mW": plan[0].power_mw, "P_QD3_mW": plan[1].power_mw, "max_error_nm": err},
          "both within 1e-6 nm, equal to per-device solutions", err <= 1e-6 and same)

    leaky = HeaterSpec(23.8, 0.13, 30.0, crosstalk_rate=0.01)
    plan = co_tune([(qd2, leaky), (qd3, leaky)], [912.41, 912.41])
    P = [s.power_mw for s in plan]
    back = [911.4 + 0.13 * P[0] + 0.01 * P[1], 911.9 + 0.13 * P[1] + 0.01 * P[0]]
    err = max(abs(b - 912.41) for b in back)
    r.add("co-tune-crosstalk", 5, "co_tune with 0.01 nm/mW crosstalk, substituted back",
          "derived linear-solve residual", {"P_mW": P, "max_error_nm": err}, "<= 1e-6 nm",
          err <= 1e-6)
    return r.checks


# ------------------------------------------------------------------ numerics

def brute_force_histogram(times, channels, window, bin_width):
    """All-pairs coincidence counts by signed delay ``t_B - t_A``."""
    t = np.asarray(times, dtype=float)
    c = np.asarray(channels)
    a, b = t[c == 0], t[c == 1]
    d = (b[None, :] - a[:, None]).ravel()
    d = d[np.abs(d) <= window]
    n_half = int(round(window / bin_width))
    edges = np.arange(-n_half, n_half + 1) * bin_width
    counts, _ = np.histogram(d, bins=edges)
    return counts


def random_stream(rng, n_max=5000, span=200000):
    n = int(rng.integers(2, n_max + 1))
    times = np.sort(rng.integers(0, span, n)).astype(float)
    return TimestampStream(times, rng.integers(0, 2, n), 40.0)


def check_correlator(n_streams=20):
    rng = _seeding.rng_for(2024, _seeding.ORACLE, 9)
    from .._kernels import _pycore
    backends = {"active": _kernels.correlate_sorted, "python": _pycore.correlate_sorted}
    mismatches = {k: 0 for k in backends}
    for _ in range(n_streams):
        s = random_stream(rng)
        window = float(rng.integers(1, 50)) * 100.0
        expect = brute_force_histogram(s.times, s.channels, window, 100.0)
        for name, fn in backends.items():
            got = fn(s.times, s.channels, window, 100.0, expect.size)
            if not np.array_equal(np.asarray(got), expect):
                mismatches[name] += 1
    return mismatches


def _rel_err(got: dict, truth: dict) -> float:
    return max(abs(got[k] - v) / abs(v) for k, v in truth.items())


ZERO_NOISE_CASES = (
    ("lorentzian", np.linspace(914.2, 915.2, 201),
     {"x0": 914.7, "w": 0.117, "A": -0.8, "y0": 1.0}, {}, {}),
    ("linear", np.linspace(0.0, 30.0, 31), {"slope": 0.13, "intercept": 913.6}, {}, {}),
    ("decay_irf", np.arange(0.0, 12.5, 0.016),
     {"a1": 1.2e4, "tau1": 0.499, "t0": 1.3, "bg": 3.0, "irf_fwhm": 0.1}, {}, {}),
    ("g2_comb", np.arange(-262.45, 262.5, 0.1),
     {"tau_lifetime": 0.499, "f": 0.04, "g2_zero": 0.05, "A_blink": 0.66,
      "tau_blink": 100.4, "irf_fwhm": 0.1},
     {"f": 0.04}, {}),
)


def zero_noise_recovery():
    """Largest relative parameter error per model on noiseless data."""
    out = {}
    for model_id, x, truth, pins, options in ZERO_NOISE_CASES:
        spec = ModelSpec(model_id, fixed_parameters=pins, options=options)
        y = evaluate(spec, x, truth)
        res = fit(spec, x, y)
        free = {k: v for k, v in truth.items() if k not in pins}
        out[model_id] = (_rel_err(res.parameters, free), res.converged)
    return out


def synthetic_decay(taus, fractions, peak_counts, seed, t_max=25.0, bin_ns=0.016,
                    t0=1.0, irf_fwhm=0.1, bg=2.0):
    """Poisson TCSPC histogram from a known multi-exponential decay."""
    t = np.arange(0.0, t_max, bin_ns)
    n = len(taus)
    params = {"t0": t0, "bg": 0.0, "irf_fwhm": irf_fwhm}
    for i, (tau, fr) in enumerate(zip(taus, fractions), 1):
        params[f"a{i}"] = fr
        params[f"tau{i}"] = tau
    spec = ModelSpec("decay_irf", options={"n_components": n})
    shape = evaluate(spec, t, params)
    scale = peak_counts / shape.max()
    for i in range(1, n + 1):
        params[f"a{i}"] *= scale
    params["bg"] = bg
    mean = evaluate(spec, t, params)
    rng = _seeding.rng_for(seed, _seeding.ORACLE, 1)
    return t, rng.poisson(mean).astype(float), params


def poisson_lifetime_recovery(seed=11):
    out = {}
    for tau in (0.499, 2.25):
        t, y, truth = synthetic_decay([tau], [1.0], 1e4, seed)
        spec = ModelSpec("decay_irf", fixed_parameters={"irf_fwhm": 0.1},
                         options={"n_components": 1})
        res = fit(spec, t, y)
        out[tau] = (res.parameters["tau1"], res.converged)
    return out


def two_component_recovery(seed=11):
    t, y, _ = synthetic_decay([0.499, 2.25], [0.8, 0.2], 1e4, seed)
    spec = ModelSpec("decay_irf", fixed_parameters={"irf_fwhm": 0.1},
                     options={"n_components": 2})
    res = fit(spec, t, y)
    taus = sorted([res.parameters["tau1"], res.parameters["tau2"]])
    return taus, res.converged


def jacobian_errors():
    lor = jacobian_check(ModelSpec("lorentzian"),
                         {"x0": 914.7, "w": 0.117, "A": -0.8, "y0": 1.0},
                         np.linspace(914.2, 915.2, 201))
    lin = jacobian_check(ModelSpec("linear"), {"slope": 0.13, "intercept": 913.6},
                         np.linspace(0.0, 30.0, 31))
    dec = jacobian_check(ModelSpec("decay_irf", options={"n_components": 2}),
                         {"a1": 8e3, "tau1": 0.499, "a2": 2e3, "tau2": 2.25, "t0": 1.0,
                          "bg": 5.0, "irf_fwhm": 0.1},
                         np.arange(0.0, 12.5, 0.016))
    return {"lorentzian": lor, "linear": lin, "decay_irf": dec}


def determinism_digests(threads=(1, 4), duration_s=0.25):
    """Run the ``simulate`` command once per thread count; return stream digests."""
    from .cli import main
    digests = {}
    old = os.environ.get("HMRR_THREADS")
    try:
        for n in threads:
            os.environ["HMRR_THREADS"] = str(n)
            with tempfile.TemporaryDirectory() as d:
                code = main(["simulate", "--seed", "42", "--duration-s", str(duration_s),
                             "--out", d, "--quiet"])
                if code != 0:
                    raise RuntimeError(f"simulate exited with {code}")
                with open(os.path.join(d, "stream.csv"), "rb") as fh:
                    digests[n] = hashlib.sha256(fh.read()).hexdigest()
    finally:
        if old is None:
            os.environ.pop("HMRR_THREADS", None)
        else:
            os.environ["HMRR_THREADS"] = old
    return digests


def check_numerics():
    """Criteria 9-11."""
    r = _Recorder("numerics")
    mism = check_correlator()
    r.add("correlator-oracle", 9, f"hbt_correlate vs all-pairs count, 20 streams ({_kernels.BACKEND} and python)",
          "derived brute-force oracle", mism, "0 mismatches", all(v == 0 for v in mism.values()))

    zn = zero_noise_recovery()
    r.add("fit-zero-noise", 10, "max relative parameter error on noiseless data",
          "derived generator oracle", {k: v[0] for k, v in zn.items()}, "< 1e-6, converged",
          all(e < 1e-6 and conv for e, conv in zn.values()))
    pl = poisson_lifetime_recovery()
    errs = {str(k): abs(v[0] / k - 1) for k, v in pl.items()}
    r.add("fit-poisson-lifetime", 10, "relative lifetime error, 1e4 peak counts, 100 ps IRF",
          "derived generator oracle", errs, "< 0.02",
          all(e < 0.02 for e in errs.values()) and all(v[1] for v in pl.values()))
    taus, conv = two_component_recovery()
    e2 = max(abs(taus[0] / 0.499 - 1), abs(taus[1] / 2.25 - 1))
    r.add("fit-two-component", 10, "two-component lifetimes (0.499, 2.25 ns) max relative error",
          "derived generator oracle", e2, "< 0.05", conv and e2 < 0.05)
    jac = jacobian_errors()
    r.add("jacobian-checks", 10, "jacobian_check (lorentzian, linear, decay_irf)",
          "finite-difference oracles", jac, "< 1e-6, < 1e-12, < 1e-4",
          jac["lorentzian"] < 1e-6 and jac["linear"] < 1e-12 and jac["decay_irf"] < 1e-4)

    dig = determinism_digests()
    r.add("determinism", 11, "simulate stream digest with HMRR_THREADS = 1 and 4",
          "reproducibility contract", {str(k): v[:16] for k, v in dig.items()},
          "identical", len(set(dig.values())) == 1)
    return r.checks


RUNNERS: dict = {
    "fig2": check_fig2,
    "fig3": check_fig3,
    "fig4": check_fig4,
    "fig5": check_fig5,
    "numerics": check_numerics,
}


def run(figures, progress: Optional[Callable[[Check], None]] = None) -> list:
    checks = []
    for fig in figures:
        if fig not in RUNNERS:
            raise ValueError(f"unknown figure {fig!r}; choose from {', '.join(FIGURES)} or all")
        for c in RUNNERS[fig]():
            checks.append(c)
            if progress:
                progress(c)
    return checks


def report(figures, checks) -> dict:
    return {"figures": list(figures), "passed": all(c.passed for c in checks),
            "checks": [c.to_dict() for c in checks]}
