"""
Emitter-cavity coupling: Purcell factors from measured lifetimes, the
detuning dependence of the decay, and the textbook Q/V estimate.

The decay model assumes only the zero-phonon fraction of the emission is
cavity-enhanced:

    Gamma(Delta) = Gamma_o (1 + zpl * F * L(Delta)),  L = 1 / (1 + (2 Delta / w)^2)

which reproduces ``F = (tau_o/tau_c - 1) / zpl`` at zero detuning and the
bare lifetime far from resonance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .ring_model import CavityMode


@dataclass(frozen=True)
class EmitterSpec:
    label: str
    bare_wavelength: float          # nm, at zero heater power
    off_resonant_lifetime: float    # ns
    zpl_fraction: float = 0.9

    def __post_init__(self):
        if self.off_resonant_lifetime <= 0:
            raise ValueError(f"lifetime must be positive, got {self.off_resonant_lifetime}")
        if not 0 < self.zpl_fraction <= 1:
            raise ValueError(f"ZPL fraction must lie in (0, 1], got {self.zpl_fraction}")


@dataclass(frozen=True)
class CouplingModel:
    """Lorentzian enhancement profile around one cavity mode.

    ``detuning_fwhm`` defaults to the mode linewidth.
    """
    mode: CavityMode
    resonant_enhancement: float
    detuning_fwhm: Optional[float] = None

    def __post_init__(self):
        if self.resonant_enhancement < 0:
            raise ValueError("resonant enhancement must be >= 0")
        if self.detuning_fwhm is None:
            object.__setattr__(self, "detuning_fwhm", self.mode.fwhm)
        if self.detuning_fwhm <= 0:
            raise ValueError("detuning FWHM must be positive")


class Purcell(NamedTuple):
    F: float
    Fp: float


def purcell_from_lifetimes(tau_o: float, tau_c: float, zpl_fraction: float) -> Purcell:
    """``F = (tau_o/tau_c - 1)/zpl`` and ``Fp = 1 + F``.

    Raises
    ------
    ValueError
        For non-positive lifetimes, a ZPL fraction outside (0, 1], or
        ``tau_c > tau_o`` (anti-Purcell regime not modeled).
    """
    if tau_c <= 0 or tau_o <= 0:
        raise ValueError("lifetimes must be positive")
    if not 0 < zpl_fraction <= 1:
        raise ValueError(f"ZPL fraction must lie in (0, 1], got {zpl_fraction}")
    if tau_c > tau_o:
        raise ValueError(
            f"on-resonance lifetime {tau_c} exceeds off-resonance {tau_o}: "
            "anti-Purcell regime not modeled")
    F = (tau_o / tau_c - 1.0) / zpl_fraction
    return Purcell(F, 1.0 + F)


def lorentzian_profile(detuning, fwhm):
    d = np.asarray(detuning, dtype=float)
    return 1.0 / (1.0 + (2.0 * d / fwhm) ** 2)


def lifetime_vs_detuning(emitter: EmitterSpec, coupling: CouplingModel, detunings) -> np.ndarray:
    """Rows of (detuning_nm, lifetime_ns)."""
    d = np.asarray(detunings, dtype=float)
    L = lorentzian_profile(d, coupling.detuning_fwhm)
    tau = emitter.off_resonant_lifetime / (
        1.0 + emitter.zpl_fraction * coupling.resonant_enhancement * L)
    return np.column_stack([d, tau])


def purcell_from_qv(q: float, mode_volume: float) -> float:
    """``(3 / 4 pi^2) Q / V`` with V in units of (lambda/n)^3."""
    if q <= 0 or mode_volume <= 0:
        raise ValueError("Q and mode volume must be positive")
    return 3.0 / (4.0 * math.pi**2) * q / mode_volume


def mode_volume_for_purcell(q: float, purcell: float) -> float:
    """Mode volume in (lambda/n)^3 that gives ``purcell`` at quality factor ``q``."""
    if q <= 0 or purcell <= 0:
        raise ValueError("Q and Purcell factor must be positive")
    return 3.0 / (4.0 * math.pi**2) * q / purcell


def orientation_penalty(f_ideal: float, position_factor: float, dipole_factor: float) -> float:
    for name, v in (("position_factor", position_factor), ("dipole_factor", dipole_factor)):
        if not 0 <= v <= 1:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return f_ideal * position_factor * dipole_factor


def purcell_record(label: str, tau_o: float, tau_c: float, zpl_fraction: float) -> dict:
    F, Fp = purcell_from_lifetimes(tau_o, tau_c, zpl_fraction)
    return {"label": label, "tau_o_ns": tau_o, "tau_c_ns": tau_c, "zpl": zpl_fraction,
            "F": F, "Fp": Fp}
