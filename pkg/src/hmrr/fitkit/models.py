"""Model functions for the fit engine.

Every model is a plain function of an abscissa array plus named parameters,
so it can be used to generate synthetic data as well as to fit it.  The
registry at the bottom binds each model to its parameter names, an optional
analytic Jacobian and an initial-guess heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import erfc, erfcx

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))  # 1/2.3548


# --------------------------------------------------------------------------
# Lorentzian and linear
# --------------------------------------------------------------------------

def model_lorentzian(x, x0, w, A, y0):
    """Lorentzian peak ``y0 + A (w/2)^2 / ((x - x0)^2 + (w/2)^2)``.

    ``w`` is the full width at half maximum; negative ``A`` gives a dip.
    """
    if w <= 0:
        raise ValueError(f"Lorentzian width must be positive, got {w}")
    x = np.asarray(x, dtype=float)
    h2 = (0.5 * w) ** 2
    return y0 + A * h2 / ((x - x0) ** 2 + h2)


def _lorentzian_jac(x, x0, w, A, y0):
    x = np.asarray(x, dtype=float)
    h = 0.5 * w
    d = x - x0
    den = d * d + h * h
    return np.column_stack([
        A * h * h * 2.0 * d / den**2,
        A * h * d * d / den**2,
        h * h / den,
        np.ones_like(x),
    ])


def model_linear(x, slope, intercept):
    return slope * np.asarray(x, dtype=float) + intercept


def _linear_jac(x, slope, intercept):
    x = np.asarray(x, dtype=float)
    return np.column_stack([x, np.ones_like(x)])


# --------------------------------------------------------------------------
# Gaussian-convolved exponentials
# --------------------------------------------------------------------------

def exp_gauss(t, tau, sigma):
    """One-sided decay ``H(t) exp(-t/tau)`` convolved with a unit-area Gaussian.

    Evaluates ``0.5 exp(sigma^2/2tau^2 - t/tau) erfc((sigma/tau - t/sigma)/sqrt2)``
    without overflow by switching to the scaled complementary error function
    where its argument is positive.
    """
    t = np.asarray(t, dtype=float)
    if sigma <= 0:
        return np.where(t > 0, np.exp(-np.clip(t, 0, None) / tau), np.where(t == 0, 0.5, 0.0))
    with np.errstate(over="ignore"):
        # a vanishing sigma sends z to +-inf, where both branches have finite limits
        z = (sigma / tau - t / sigma) / math.sqrt(2.0)
    out = np.empty_like(z)
    pos = z >= 0
    with np.errstate(over="ignore"):
        out[pos] = 0.5 * np.exp(-0.5 * (t[pos] / sigma) ** 2) * erfcx(z[pos])
    neg = ~pos
    out[neg] = 0.5 * np.exp(0.5 * (sigma / tau) ** 2 - t[neg] / tau) * erfc(z[neg])
    return out


def model_decay_irf(t, amplitudes, lifetimes, t0, bg, irf_fwhm):
    """Multi-exponential decay convolved with a Gaussian instrument response.

    ``irf_fwhm`` shares the time unit of ``t`` and the lifetimes.  Each
    component tends to ``a exp(-(t - t0)/tau)`` well after ``t0``.
    """
    t = np.asarray(t, dtype=float)
    sigma = irf_fwhm * FWHM_TO_SIGMA
    y = np.full_like(t, float(bg))
    for a, tau in zip(amplitudes, lifetimes):
        if tau <= 0:
            raise ValueError(f"lifetimes must be positive, got {tau}")
        y += a * exp_gauss(t - t0, tau, sigma)
    return y


def _two_sided(t, tau, sigma):
    return exp_gauss(t, tau, sigma) + exp_gauss(-t, tau, sigma)


def g2_peak_weights(n, period, A_blink, tau_blink, n_side_peaks=20):
    """Side-peak weights ``1 + A exp(-|n| T / tau_blink)`` rescaled to unit mean.

    The mean is taken over ``n = +-1 .. +-n_side_peaks/2``, the same peaks the
    histogram normaliser uses.  The zero-delay weight is not handled here.
    """
    n = np.asarray(n)
    half = n_side_peaks // 2
    ref = np.arange(1, half + 1)
    if A_blink == 0:
        return np.ones(n.shape, dtype=float)
    env = 1.0 + A_blink * np.exp(-np.abs(n) * period / tau_blink)
    mean = np.mean(1.0 + A_blink * np.exp(-ref * period / tau_blink))
    return env / mean


def model_g2_comb(tau, tau_lifetime, f, g2_zero, A_blink, tau_blink, irf_fwhm,
                  bin_width=None, n_side_peaks=20):
    """Pulsed second-order correlation comb.

    A train of two-sided exponential peaks at ``n/f`` convolved with the
    Gaussian instrument response.  The zero-delay peak is weighted by
    ``g2_zero``; the others follow the blinking envelope, rescaled so the
    ``n_side_peaks`` nearest side peaks average one.

    With ``bin_width=None`` every peak has unit height before weighting, so
    with ``A_blink=0`` and no IRF this is exactly ``sum_n exp(-|tau - n/f|/tau_lifetime)``.
    With a ``bin_width`` each peak has unit area and the output is the expected
    content of a bin of that width in a histogram normalised by its mean
    side-peak area.

    All times share one unit and ``f`` is in the inverse of that unit.
    """
    if f <= 0 or tau_lifetime <= 0:
        raise ValueError("repetition rate and lifetime must be positive")
    tau = np.asarray(tau, dtype=float)
    period = 1.0 / f
    sigma = irf_fwhm * FWHM_TO_SIGMA
    if bin_width is None:
        shape_norm = erfcx(sigma / (math.sqrt(2.0) * tau_lifetime)) if sigma > 0 else 1.0
    else:
        shape_norm = 2.0 * tau_lifetime / bin_width
    reach = int(math.ceil(40.0 * max(tau_lifetime, sigma) / period))
    nearest = np.rint(tau / period).astype(np.int64)
    y = np.zeros_like(tau)
    for m in range(-reach, reach + 1):
        n = nearest + m
        c = g2_peak_weights(n, period, A_blink, tau_blink, n_side_peaks)
        c = np.where(n == 0, g2_zero, c)
        y += c * _two_sided(tau - n * period, tau_lifetime, sigma)
    return y / shape_norm


# --------------------------------------------------------------------------
# Initial guesses
# --------------------------------------------------------------------------

def _guess_lorentzian(x, y, options):
    order = np.argsort(x)
    x, y = x[order], y[order]
    k = max(1, len(x) // 10)
    y0 = float(np.median(np.concatenate([y[:k], y[-k:]])))
    dev = y - y0
    i = int(np.argmax(np.abs(dev)))
    A = float(dev[i])
    x0 = float(x[i])
    area = float(np.trapezoid(dev, x))
    w = 2.0 * area / (math.pi * A) if A != 0 else 0.0
    if not w > 0:
        w = (x[-1] - x[0]) / 10.0
    return {"x0": x0, "w": w, "A": A, "y0": y0}


def _guess_linear(x, y, options):
    if np.ptp(x) == 0:
        # degenerate abscissa; leave the singularity for the optimizer to report
        return {"slope": 0.0, "intercept": float(np.mean(y))}
    slope, intercept = np.polyfit(x, y, 1)
    return {"slope": float(slope), "intercept": float(intercept)}


def _tail_regression(x, y):
    """Log-linear regression of a decaying tail; returns (tau, amplitude at x[0])."""
    keep = y > 0
    if keep.sum() < 2:
        return None
    slope, icpt = np.polyfit(x[keep], np.log(y[keep]), 1)
    if slope >= 0:
        return None
    return -1.0 / slope, math.exp(icpt + slope * x[keep][0])


def _guess_decay(x, y, options):
    n_comp = int(options.get("n_components", 1))
    irf = float(options.get("irf_fwhm", 0.0)) or (x[1] - x[0]) * 2.0
    sigma = irf * FWHM_TO_SIGMA
    order = np.argsort(x)
    x, y = x[order], y[order]
    ipk = int(np.argmax(y))
    pre = y[x < x[ipk] - 4 * sigma]
    bg = float(np.median(pre)) if pre.size >= 3 else float(np.min(y))
    t0 = float(x[ipk]) - sigma
    sig = y - bg
    peak = sig[ipk]
    tail = (x > x[ipk] + 3 * sigma) & (sig > max(peak * 1e-3, 0))
    xt, yt = x[tail], sig[tail]
    guess = {"t0": t0, "bg": bg, "irf_fwhm": irf}
    span = (x[-1] - x[ipk]) / 5.0
    if xt.size < 4:
        taus = [span * 2.0 ** -i for i in range(n_comp)]
        amps = [peak / n_comp] * n_comp
    elif n_comp == 1:
        fitted = _tail_regression(xt, yt)
        tau = fitted[0] if fitted else span
        taus, amps = [tau], [peak]
    else:
        half = xt.size // 2
        slow = _tail_regression(xt[half:], yt[half:])
        tau_s, a_s = slow if slow else (span, peak / 2)
        a_s_t0 = a_s * math.exp((xt[half] - t0) / tau_s)
        fast_sig = yt[:half] - a_s_t0 * np.exp(-(xt[:half] - t0) / tau_s)
        fast = _tail_regression(xt[:half], fast_sig)
        tau_f, _ = fast if fast else (tau_s / 4, peak / 2)
        if tau_f >= tau_s:
            tau_f = tau_s / 4
        a_f = max(peak - a_s_t0, peak * 0.1)
        taus = list(np.geomspace(tau_f, tau_s, n_comp))
        amps = [a_f] + [a_s_t0 / (n_comp - 1)] * (n_comp - 1)
    for i, (a, tau) in enumerate(zip(amps, taus), start=1):
        guess[f"a{i}"] = float(a)
        guess[f"tau{i}"] = float(tau)
    return guess


def peak_areas(tau, y, period, n_values):
    """Sum ``y`` over bins whose centres lie within half a period of each ``n*period``."""
    tau = np.asarray(tau, dtype=float)
    idx = np.floor(tau / period + 0.5).astype(np.int64)
    return np.array([y[idx == n].sum() for n in n_values])


def _guess_g2(x, y, options, fixed):
    f = fixed.get("f", options.get("f"))
    if f is None:
        raise ValueError("g2_comb needs the repetition rate f pinned or supplied as an option")
    period = 1.0 / f
    n_side = int(options.get("n_side_peaks", 20))
    bw = options.get("bin_width")
    dx = float(np.median(np.diff(np.sort(x)))) if x.size > 1 else 1.0
    n_max = int(np.floor(np.max(np.abs(x)) / period - 0.5))
    ns = np.arange(1, max(n_max, 1) + 1)
    pos = peak_areas(x, y, period, ns)
    neg = peak_areas(x, y, period, -ns)
    side = 0.5 * (pos + neg)
    half = n_side // 2
    mean_ref = side[:half].mean() if side[:half].size else 1.0
    zero = peak_areas(x, y, period, [0])[0]
    g2_zero = zero / mean_ref if mean_ref > 0 else 0.0
    far = side[-max(3, len(side) // 5):].mean()
    excess = side / far - 1.0 if far > 0 else np.zeros_like(side)
    good = excess > 0.02
    A_blink, tau_blink = 0.5, 5 * period
    if good.sum() >= 2:
        slope, icpt = np.polyfit(ns[good] * period, np.log(excess[good]), 1)
        if slope < 0:
            A_blink, tau_blink = math.exp(icpt), -1.0 / slope
    # peak height over area gives the lifetime of a two-sided exponential
    i1 = np.floor(x / period + 0.5).astype(np.int64) == 1
    height = y[i1].max() if i1.any() else 0.0
    area = side[0] if side.size else 0.0
    if bw is not None:
        height = height / bw      # bin contents -> density; area is already an integral
    else:
        area = area * dx          # unit-height samples -> integral
    tau_l = 0.5 * area / height if height > 0 else 0.05 * period
    tau_l = max(tau_l, dx)
    irf = fixed.get("irf_fwhm", options.get("irf_fwhm"))
    irf = float(irf) if irf is not None else float(max(0.5 * tau_l, 2.0 * dx))
    return {
        "tau_lifetime": float(tau_l),
        "f": float(f),
        "g2_zero": float(g2_zero),
        "A_blink": float(A_blink),
        "tau_blink": float(tau_blink),
        "irf_fwhm": irf,
    }


# --------------------------------------------------------------------------
# Registry
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelDef:
    model_id: str
    param_names: Callable[[dict], list]
    evaluate: Callable[[np.ndarray, dict, dict], np.ndarray]
    guess: Callable[..., dict]
    jacobian: Optional[Callable[[np.ndarray, dict, dict], np.ndarray]] = None
    count_data: bool = False


def _decay_names(options):
    n = int(options.get("n_components", 1))
    names = []
    for i in range(1, n + 1):
        names += [f"a{i}", f"tau{i}"]
    return names + ["t0", "bg", "irf_fwhm"]


def _decay_eval(x, p, options):
    n = int(options.get("n_components", 1))
    amps = [p[f"a{i}"] for i in range(1, n + 1)]
    taus = [p[f"tau{i}"] for i in range(1, n + 1)]
    return model_decay_irf(x, amps, taus, p["t0"], p["bg"], p["irf_fwhm"])


def _g2_eval(x, p, options):
    return model_g2_comb(
        x, p["tau_lifetime"], p["f"], p["g2_zero"], p["A_blink"], p["tau_blink"],
        p["irf_fwhm"], bin_width=options.get("bin_width"),
        n_side_peaks=int(options.get("n_side_peaks", 20)),
    )


MODELS = {
    "lorentzian": ModelDef(
        "lorentzian",
        lambda o: ["x0", "w", "A", "y0"],
        lambda x, p, o: model_lorentzian(x, p["x0"], p["w"], p["A"], p["y0"]),
        lambda x, y, o, fixed: _guess_lorentzian(x, y, o),
        lambda x, p, o: _lorentzian_jac(x, p["x0"], p["w"], p["A"], p["y0"]),
    ),
    "linear": ModelDef(
        "linear",
        lambda o: ["slope", "intercept"],
        lambda x, p, o: model_linear(x, p["slope"], p["intercept"]),
        lambda x, y, o, fixed: _guess_linear(x, y, o),
        lambda x, p, o: _linear_jac(x, p["slope"], p["intercept"]),
    ),
    "decay_irf": ModelDef(
        "decay_irf",
        _decay_names,
        _decay_eval,
        lambda x, y, o, fixed: _guess_decay(x, y, {**o, **fixed}),
        None,
        count_data=True,
    ),
    "g2_comb": ModelDef(
        "g2_comb",
        lambda o: ["tau_lifetime", "f", "g2_zero", "A_blink", "tau_blink", "irf_fwhm"],
        _g2_eval,
        _guess_g2,
        None,
        count_data=True,
    ),
}
