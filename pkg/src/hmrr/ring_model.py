"""
Racetrack resonator model: losses, quality factors, free spectral range and
all-pass transmission spectra.

Lengths follow the units the device is usually described in: bend radius and
straight sections in um, wavelengths and linewidths in nm, propagation and
taper losses in dB/mm.  The only place a loss leaves dB/mm is
:func:`db_per_mm_to_power_attenuation`.

The round-trip phase uses a constant group index in optical frequency,

    phi(lambda) = 2 pi n_g L_rt (1/lambda - 1/lambda_anchor)   (mod 2 pi)

so resonances are evenly spaced in 1/lambda and one of them sits exactly on
the anchor wavelength.  Near any resonance the local spacing is
``lambda^2 / (n_g L_rt)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .fitkit import ModelSpec, fit

DEFAULT_ANCHOR_NM = 914.7
LINEARIZATION_HALF_WINDOW_NM = 20.0


class UnboundedQError(ValueError):
    """Raised when the total loss is zero, so the Q model has no finite value."""


@dataclass(frozen=True)
class WaveguideParams:
    """
    Parameters
    ----------
    group_index : float
        Group index n_g of the ring waveguide.
    intrinsic_loss : float
        Propagation loss alpha_int [dB/mm].
    reference_wavelength : float
        Wavelength at which n_g is quoted [nm].
    """
    group_index: float = 2.87
    intrinsic_loss: float = 0.78
    reference_wavelength: float = 910.0

    def __post_init__(self):
        if self.group_index < 1:
            raise ValueError(f"group index must be >= 1, got {self.group_index}")
        if self.intrinsic_loss < 0:
            raise ValueError(f"intrinsic loss must be >= 0 dB/mm, got {self.intrinsic_loss}")
        if self.reference_wavelength <= 0:
            raise ValueError(f"reference wavelength must be positive, got {self.reference_wavelength}")


@dataclass(frozen=True)
class RingGeometry:
    """Racetrack with two bends of radius ``bend_radius`` and two straights [um]."""
    bend_radius: float = 15.0
    straight_length: float = 25.0

    def __post_init__(self):
        if self.bend_radius <= 0:
            raise ValueError(f"bend radius must be positive, got {self.bend_radius}")
        if self.straight_length < 0:
            raise ValueError(f"straight length must be >= 0, got {self.straight_length}")

    @property
    def round_trip_length(self) -> float:
        """L_rt = 2 pi R + 2 L_s [um]."""
        return 2.0 * math.pi * self.bend_radius + 2.0 * self.straight_length


@dataclass(frozen=True)
class TaperSpec:
    """Mode transformer between the top waveguide and the ring.

    ``length`` in um, ``tip_width`` in nm (informational only) and
    ``coupling_efficiency`` is the power transfer efficiency eta.
    """
    length: float = 10.0
    coupling_efficiency: float = 0.983
    tip_width: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.coupling_efficiency <= 1:
            raise ValueError(
                f"coupling efficiency must lie in (0, 1], got {self.coupling_efficiency}")
        if self.length <= 0:
            raise ValueError(f"taper length must be positive, got {self.length}")


@dataclass(frozen=True)
class CouplerSpec:
    """All-pass coupler: self-coupling amplitude r and single-pass amplitude a."""
    self_coupling: float
    single_pass_amplitude: float

    def __post_init__(self):
        if not 0 <= self.self_coupling < 1:
            raise ValueError(f"self-coupling r must lie in [0, 1), got {self.self_coupling}")
        if not 0 < self.single_pass_amplitude <= 1:
            raise ValueError(
                f"single-pass amplitude a must lie in (0, 1], got {self.single_pass_amplitude}")


@dataclass(frozen=True)
class CavityMode:
    """One resonance: centre and FWHM [nm], loaded Q and spacing to the next mode [nm]."""
    center_wavelength: float
    fwhm: float
    loaded_q: float = field(default=None)
    fsr_at_mode: float = float("nan")

    def __post_init__(self):
        if self.fwhm <= 0:
            raise ValueError(f"mode FWHM must be positive, got {self.fwhm}")
        q = self.center_wavelength / self.fwhm
        if self.loaded_q is None:
            object.__setattr__(self, "loaded_q", q)
        elif abs(self.loaded_q - q) > 1e-6 * q:
            raise ValueError(f"loaded Q {self.loaded_q} inconsistent with lambda/FWHM = {q}")


@dataclass(frozen=True)
class QBudget:
    """Result of :func:`q_from_losses` with the unit bookkeeping spelled out."""
    q: float
    alpha_total_db_per_mm: float
    alpha_power_per_m: float
    wavelength_nm: float
    group_index: float
    conversion: str = "alpha[1/m] = alpha[dB/mm] * 1000 * ln(10)/10 (power attenuation)"

    def __float__(self):
        return float(self.q)


# --------------------------------------------------------------------------
# Losses and quality factors
# --------------------------------------------------------------------------

def db_per_mm_to_power_attenuation(alpha_db_per_mm):
    """Convert a loss in dB/mm into a Napierian power attenuation in 1/m."""
    return np.asarray(alpha_db_per_mm) * 1e3 * math.log(10.0) / 10.0


def taper_loss(taper: TaperSpec) -> float:
    """Distributed loss of the mode transformer, ``-10 log10(eta) / l`` [dB/mm]."""
    return -10.0 * math.log10(taper.coupling_efficiency) / (taper.length * 1e-3)


def q_from_losses(wg: WaveguideParams, extra_loss: float, wavelength: float) -> QBudget:
    """Quality factor ``2 pi n_g / (lambda alpha_total)`` from distributed losses.

    ``extra_loss`` [dB/mm] is added to the waveguide's intrinsic loss, usually
    the taper contribution from :func:`taper_loss`.

    Raises
    ------
    UnboundedQError
        If the total loss is zero.
    """
    if extra_loss < 0:
        raise ValueError(f"extra loss must be >= 0 dB/mm, got {extra_loss}")
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    total = wg.intrinsic_loss + extra_loss
    if total == 0:
        raise UnboundedQError("total loss is zero: Q is unbounded in this model")
    alpha = float(db_per_mm_to_power_attenuation(total))
    q = 2.0 * math.pi * wg.group_index / (wavelength * 1e-9 * alpha)
    return QBudget(q=q, alpha_total_db_per_mm=total, alpha_power_per_m=alpha,
                   wavelength_nm=wavelength, group_index=wg.group_index)


def q_from_linewidth(center: float, fwhm: float) -> float:
    if fwhm <= 0:
        raise ValueError(f"FWHM must be positive, got {fwhm}")
    return center / fwhm


def free_spectral_range(wg: WaveguideParams, geom: RingGeometry, wavelength: float) -> float:
    """FSR = lambda^2 / (n_g L_rt) [nm]."""
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    return wavelength**2 / (wg.group_index * geom.round_trip_length * 1e3)


def group_index_for_fsr(fsr: float, geom: RingGeometry, wavelength: float) -> float:
    """Invert :func:`free_spectral_range` for the group index."""
    return wavelength**2 / (fsr * geom.round_trip_length * 1e3)


# --------------------------------------------------------------------------
# Coupler construction
# --------------------------------------------------------------------------

def single_pass_amplitude(total_loss_db_per_mm: float, geom: RingGeometry) -> float:
    """Round-trip field amplitude ``a = exp(-alpha L_rt / 2)``."""
    alpha = float(db_per_mm_to_power_attenuation(total_loss_db_per_mm))
    return math.exp(-0.5 * alpha * geom.round_trip_length * 1e-6)


def _optical_length_nm(wg: WaveguideParams, geom: RingGeometry) -> float:
    return wg.group_index * geom.round_trip_length * 1e3


def resonance_fwhm(coupler: CouplerSpec, wg: WaveguideParams, geom: RingGeometry,
                   wavelength: float) -> float:
    """Exact half-depth width of the transmission dip centred at ``wavelength`` [nm]."""
    ra = coupler.self_coupling * coupler.single_pass_amplitude
    if ra <= 0:
        return float("inf")
    s = (1.0 - ra) / (2.0 * math.sqrt(ra))
    if s >= 1.0:
        return float("inf")
    du = 2.0 * math.asin(s) / (2.0 * math.pi * _optical_length_nm(wg, geom))
    u = 1.0 / wavelength
    return 2.0 * du / (u * u - du * du)


def coupler_for_fwhm(fwhm: float, wg: WaveguideParams, geom: RingGeometry,
                     total_loss_db_per_mm: float, wavelength: float) -> CouplerSpec:
    """Choose r so the resonance at ``wavelength`` has the requested FWHM.

    Raises
    ------
    ValueError
        If the loss alone already makes the resonance broader than requested.
    """
    a = single_pass_amplitude(total_loss_db_per_mm, geom)
    u = 1.0 / wavelength
    du = (math.sqrt(1.0 + (fwhm * u) ** 2) - 1.0) / fwhm
    s = math.sin(math.pi * _optical_length_nm(wg, geom) * du)
    x = -s + math.sqrt(s * s + 1.0)
    r = x * x / a
    if not 0 <= r < 1:
        raise ValueError(
            f"FWHM {fwhm} nm is narrower than the loss-limited width "
            f"{resonance_fwhm(CouplerSpec(0.999999999, a), wg, geom, wavelength):.4g} nm")
    return CouplerSpec(self_coupling=r, single_pass_amplitude=a)


def coupler_for_loaded_q(target_q: float, wg: WaveguideParams, geom: RingGeometry,
                         total_loss_db_per_mm: float, wavelength: float) -> CouplerSpec:
    return coupler_for_fwhm(wavelength / target_q, wg, geom, total_loss_db_per_mm, wavelength)


def coupler_for_fitted_fwhm(fwhm: float, wg: WaveguideParams, geom: RingGeometry,
                            total_loss_db_per_mm: float, wavelength: float,
                            anchor_wavelength: Optional[float] = None,
                            tol: float = 1e-9, max_iter: int = 20) -> CouplerSpec:
    """Like :func:`coupler_for_fwhm`, but matches the Lorentzian-fitted width.

    The dip of an all-pass ring is not exactly Lorentzian, so a Lorentzian fit
    over +-1.5 linewidths reads a slightly different width than the exact
    half-depth value.  A few fixed-point steps on the requested width remove
    the difference.  ``wavelength`` must be a resonance of the phase model.
    """
    anchor = wavelength if anchor_wavelength is None else anchor_wavelength
    request = fwhm
    coupler = coupler_for_fwhm(request, wg, geom, total_loss_db_per_mm, wavelength)
    for _ in range(max_iter):
        got = abs(fit_dip(coupler, wg, geom, wavelength, anchor).parameters["w"])
        if abs(got - fwhm) <= tol * fwhm:
            break
        request *= fwhm / got
        coupler = coupler_for_fwhm(request, wg, geom, total_loss_db_per_mm, wavelength)
    return coupler


def critical_coupler(total_loss_db_per_mm: float, geom: RingGeometry) -> CouplerSpec:
    """Critically coupled preset, r = a."""
    a = single_pass_amplitude(total_loss_db_per_mm, geom)
    return CouplerSpec(self_coupling=a if a < 1 else 0.999999, single_pass_amplitude=a)


# --------------------------------------------------------------------------
# Spectra
# --------------------------------------------------------------------------

def round_trip_phase(wavelength, wg: WaveguideParams, geom: RingGeometry,
                     anchor_wavelength: float = DEFAULT_ANCHOR_NM):
    wavelength = np.asarray(wavelength, dtype=float)
    return 2.0 * math.pi * _optical_length_nm(wg, geom) * (1.0 / wavelength - 1.0 / anchor_wavelength)


def transmission_spectrum(coupler: CouplerSpec, wg: WaveguideParams, geom: RingGeometry,
                          wavelength_grid, anchor_wavelength: float = DEFAULT_ANCHOR_NM):
    """All-pass ring transmission on a sorted wavelength grid.

    Returns
    -------
    wavelengths, transmission : ndarray
        Normalised transmitted power, in [0, 1].
    """
    lam = np.asarray(wavelength_grid, dtype=float)
    if lam.size == 0:
        raise ValueError("wavelength grid is empty")
    if np.any(np.diff(lam) < 0):
        raise ValueError("wavelength grid must be sorted ascending")
    r = coupler.self_coupling
    a = coupler.single_pass_amplitude
    cphi = np.cos(round_trip_phase(lam, wg, geom, anchor_wavelength))
    num = a * a - 2.0 * r * a * cphi + r * r
    den = 1.0 - 2.0 * r * a * cphi + (r * a) ** 2
    return lam, np.clip(num / den, 0.0, 1.0)


def resonance_wavelengths(wg: WaveguideParams, geom: RingGeometry, band,
                          anchor_wavelength: float = DEFAULT_ANCHOR_NM) -> np.ndarray:
    """Exact resonance positions of the phase model inside ``band`` (ascending)."""
    lo, hi = band
    nl = _optical_length_nm(wg, geom)
    u0 = 1.0 / anchor_wavelength
    k_lo = math.ceil((1.0 / hi - u0) * nl - 1e-12)
    k_hi = math.floor((1.0 / lo - u0) * nl + 1e-12)
    ks = np.arange(k_lo, k_hi + 1)
    return np.sort(1.0 / (u0 + ks / nl))


def _check_band(wg, band):
    lo, hi = band
    if not lo < hi:
        raise ValueError(f"band must be (low, high) with low < high, got {band}")
    ref = wg.reference_wavelength
    if lo < ref - LINEARIZATION_HALF_WINDOW_NM or hi > ref + LINEARIZATION_HALF_WINDOW_NM:
        raise ValueError(
            f"band {band} nm leaves the +-{LINEARIZATION_HALF_WINDOW_NM:g} nm window around "
            f"the group-index reference {ref:g} nm where the phase model holds")


def fit_dip(coupler: CouplerSpec, wg: WaveguideParams, geom: RingGeometry, center: float,
            anchor_wavelength: float = DEFAULT_ANCHOR_NM, n_points: int = 301):
    """Lorentzian fit of the dip at ``center`` over +-1.5 linewidths.

    Returns the :class:`~hmrr.fitkit.FitResult`.
    """
    width = resonance_fwhm(coupler, wg, geom, center)
    if not math.isfinite(width):
        raise ValueError("resonance is too broad to isolate a dip")
    grid = np.linspace(center - 1.5 * width, center + 1.5 * width, n_points)
    lam, t = transmission_spectrum(coupler, wg, geom, grid, anchor_wavelength)
    return fit(ModelSpec("lorentzian"), lam, t)


def mode_comb(coupler: CouplerSpec, wg: WaveguideParams, geom: RingGeometry, band,
              anchor_wavelength: float = DEFAULT_ANCHOR_NM) -> list:
    """Every resonance inside ``band`` with Lorentzian-fitted centre and width.

    ``fsr_at_mode`` is the distance to the next resonance on the long-wavelength side.
    """
    _check_band(wg, band)
    lo, hi = band
    centers = resonance_wavelengths(wg, geom, (lo, hi), anchor_wavelength)
    modes = []
    for c in centers:
        res = fit_dip(coupler, wg, geom, float(c), anchor_wavelength)
        x0 = res.parameters["x0"]
        w = abs(res.parameters["w"])
        nxt = 1.0 / (1.0 / c - 1.0 / _optical_length_nm(wg, geom))
        modes.append(CavityMode(center_wavelength=x0, fwhm=w,
                                loaded_q=q_from_linewidth(x0, w), fsr_at_mode=nxt - c))
    return modes
