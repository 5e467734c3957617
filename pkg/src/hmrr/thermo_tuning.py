"""
Microheater tuning of emitter lines.

Heater power is ``V^2 / R``; with R in kOhm and V in volts the result is in mW.
The emitter line red-shifts linearly with power at rate gamma [nm/mW].  A
heater may also shift the lines of the *other* devices on the chip at its
``crosstalk_rate`` [nm/mW].  Cavity modes are treated as fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np


class UnreachableTargetError(ValueError):
    """The requested wavelength needs a blue shift or more power than available."""


class CoTuneError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class HeaterSpec:
    resistance: float = 23.8          # kOhm
    tuning_rate: float = 0.13         # nm/mW
    max_voltage: float = 30.0         # V
    crosstalk_rate: float = 0.0       # nm/mW on other devices

    def __post_init__(self):
        if self.resistance <= 0:
            raise ValueError(f"heater resistance must be positive, got {self.resistance}")
        if self.tuning_rate < 0:
            raise ValueError(f"tuning rate must be >= 0, got {self.tuning_rate}")
        if self.max_voltage < 0:
            raise ValueError(f"max voltage must be >= 0, got {self.max_voltage}")

    @property
    def max_power(self) -> float:
        return self.max_voltage**2 / self.resistance


@dataclass(frozen=True)
class TuningState:
    device_id: str
    base_wavelength: float
    applied_power: float = 0.0
    current_wavelength: float = None

    def __post_init__(self):
        if self.current_wavelength is None:
            raise ValueError("current_wavelength must be set; use TuningState.at_rest()")

    @classmethod
    def at_rest(cls, device_id: str, base_wavelength: float) -> "TuningState":
        return cls(device_id, base_wavelength, 0.0, base_wavelength)


@dataclass(frozen=True)
class TuningSolution:
    device_id: str
    power_mw: float
    voltage_v: float
    achieved_nm: float


def power_from_voltage(heater: HeaterSpec, voltage: float) -> float:
    """Electrical power [mW] dissipated at ``voltage`` [V]."""
    if not 0 <= voltage <= heater.max_voltage:
        raise ValueError(f"voltage {voltage} V outside [0, {heater.max_voltage}] V")
    return voltage**2 / heater.resistance


def voltage_for_power(heater: HeaterSpec, power: float) -> float:
    return math.sqrt(power * heater.resistance)


def wavelength_at_power(state: TuningState, heater: HeaterSpec, power: float) -> float:
    if power < 0:
        raise ValueError(f"heater power must be >= 0, got {power}")
    return state.base_wavelength + heater.tuning_rate * power


def apply_power(state: TuningState, heater: HeaterSpec, power: float) -> TuningState:
    return replace(state, applied_power=power,
                   current_wavelength=wavelength_at_power(state, heater, power))


def tuning_sweep(state: TuningState, heater: HeaterSpec, powers) -> np.ndarray:
    """Rows of (power_mW, wavelength_nm) for a list of heater powers."""
    p = np.asarray(powers, dtype=float)
    if np.any(p < 0):
        raise ValueError("heater powers must be >= 0")
    return np.column_stack([p, state.base_wavelength + heater.tuning_rate * p])


def power_to_resonance(state: TuningState, heater: HeaterSpec, target) -> TuningSolution:
    """Heater power and voltage that put the emitter line on ``target``.

    ``target`` is a wavelength in nm or anything with a ``center_wavelength``
    (a :class:`~hmrr.ring_model.CavityMode`).

    Raises
    ------
    UnreachableTargetError
        The shift is negative (the heater only red-shifts) or needs more than
        the heater's maximum power.
    """
    lam_c = float(getattr(target, "center_wavelength", target))
    shift = lam_c - state.base_wavelength
    reach = heater.tuning_rate * heater.max_power
    if shift < 0:
        raise UnreachableTargetError(
            f"{state.device_id}: target {lam_c:.4f} nm needs a shift of {shift:+.4f} nm; "
            f"the heater covers 0 to +{reach:.4f} nm")
    if shift == 0:
        return TuningSolution(state.device_id, 0.0, 0.0, lam_c)
    if heater.tuning_rate <= 0:
        raise UnreachableTargetError(
            f"{state.device_id}: tuning rate is zero, cannot shift by {shift:+.4f} nm")
    power = shift / heater.tuning_rate
    if power > heater.max_power:
        raise UnreachableTargetError(
            f"{state.device_id}: target {lam_c:.4f} nm needs a shift of {shift:+.4f} nm; "
            f"the heater covers 0 to +{reach:.4f} nm")
    return TuningSolution(state.device_id, power, voltage_for_power(heater, power),
                          wavelength_at_power(state, heater, power))


def co_tune(devices: Sequence, targets: Sequence[float]) -> list:
    """Solve heater powers for several devices sharing one chip.

    ``devices`` is a sequence of ``(TuningState, HeaterSpec)`` pairs.  Device i
    ends at ``base_i + gamma_i P_i + sum_{j != i} c_j P_j`` where ``c_j`` is
    heater j's crosstalk rate.

    Raises
    ------
    CoTuneError
        With one message per device that cannot be served (singular system,
        negative power or power above the heater limit).
    """
    if len(devices) != len(targets):
        raise ValueError(f"{len(devices)} devices but {len(targets)} targets")
    n = len(devices)
    if n == 0:
        return []
    states = [d[0] for d in devices]
    heaters = [d[1] for d in devices]
    if all(h.crosstalk_rate == 0 for h in heaters):
        out, problems = [], []
        for s, h, t in zip(states, heaters, targets):
            try:
                out.append(power_to_resonance(s, h, t))
            except UnreachableTargetError as exc:
                problems.append(str(exc))
        if problems:
            raise CoTuneError(problems)
        return out

    M = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            M[i, j] = heaters[i].tuning_rate if i == j else heaters[j].crosstalk_rate
    rhs = np.array([t - s.base_wavelength for s, t in zip(states, targets)], dtype=float)
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e12:
        raise CoTuneError([f"{s.device_id}: coupled tuning system is singular "
                           f"(condition {cond:.3e})" for s in states])
    P = np.linalg.solve(M, rhs)
    problems = []
    for s, h, p in zip(states, heaters, P):
        if p < -1e-12:
            problems.append(f"{s.device_id}: needs negative power {p:.4f} mW")
        elif p > h.max_power:
            problems.append(f"{s.device_id}: needs {p:.4f} mW, above the "
                            f"{h.max_power:.4f} mW limit")
    if problems:
        raise CoTuneError(problems)
    P = np.clip(P, 0.0, None)
    achieved = np.array([s.base_wavelength for s in states]) + M @ P
    return [TuningSolution(s.device_id, float(p), voltage_for_power(h, float(p)), float(a))
            for s, h, p, a in zip(states, heaters, P, achieved)]
