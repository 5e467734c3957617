"""
Scenario documents: one JSON file describing a device, its heater(s), the
emitters in it and the photon-counting run.  Every key that carries a unit
spells it out (``radius_um``, ``gamma_nm_per_mW``).
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from typing import Optional

from ..cavity_qed import CouplingModel, EmitterSpec, purcell_from_lifetimes
from ..photostat import BlinkModel, SimConfig
from ..ring_model import (
    CavityMode,
    CouplerSpec,
    RingGeometry,
    TaperSpec,
    WaveguideParams,
    coupler_for_fitted_fwhm,
    coupler_for_loaded_q,
    critical_coupler,
    fit_dip,
    taper_loss,
)
from ..thermo_tuning import HeaterSpec, TuningState


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario document."""


DEFAULT_SCENARIO = {
    "device": {
        "group_index": 2.87,
        "intrinsic_loss_dB_per_mm": 0.78,
        "reference_wavelength_nm": 910.0,
        "radius_um": 15.0,
        "straight_length_um": 25.0,
        "taper_length_um": 10.0,
        "taper_efficiency": 0.983,
        "taper_tip_width_nm": 80.0,
        "excess_loss_dB_per_mm": 0.0,
        "anchor_wavelength_nm": 914.7,
        "coupler": {"mode": "target_fwhm", "fwhm_nm": 0.117, "at_wavelength_nm": 914.7},
    },
    "heater": {
        "resistance_kohm": 23.8,
        "gamma_nm_per_mW": 0.13,
        "max_voltage_V": 30.0,
        "crosstalk_nm_per_mW": 0.0,
    },
    "emitters": [
        {
            "label": "QD1",
            "bare_wavelength_nm": 913.6,
            "tau_off_ns": 2.25,
            "tau_on_ns": 0.499,
            "zpl_fraction": 0.9,
            "mode_wavelength_nm": 914.7,
        }
    ],
    "sim": {
        "rep_rate_MHz": 40.0,
        "lifetime_ns": 0.499,
        "excitation_prob": 0.9,
        "two_photon_prob": 0.0026,
        "detection_efficiency": 0.3,
        "dark_count_rate_cps": 100.0,
        "irf_fwhm_ps": 100.0,
        "duration_s": 0.25,
        "blink": {"on_dwell_ns": 252.0, "off_dwell_ns": 167.0},
    },
    "seed": 42,
}


def _bare_preset():
    s = copy.deepcopy(DEFAULT_SCENARIO)
    dev = s["device"]
    dev["taper_efficiency"] = 1.0
    dev["anchor_wavelength_nm"] = 913.10
    dev["coupler"] = {"mode": "target_q", "q": 1.8e4, "at_wavelength_nm": 913.10}
    return s


def _two_device_preset():
    s = copy.deepcopy(DEFAULT_SCENARIO)
    s["device"]["anchor_wavelength_nm"] = 912.38
    s["device"]["coupler"] = {"mode": "target_fwhm", "fwhm_nm": 0.117, "at_wavelength_nm": 912.38}
    s["emitters"] = [
        {"label": "QD2", "bare_wavelength_nm": 911.4, "tau_off_ns": 1.97, "tau_on_ns": 1.09,
         "zpl_fraction": 0.9, "mode_wavelength_nm": 912.41,
         "heater": dict(s["heater"])},
        {"label": "QD3", "bare_wavelength_nm": 911.9, "tau_off_ns": 1.35, "tau_on_ns": 0.648,
         "zpl_fraction": 0.9, "mode_wavelength_nm": 912.41,
         "heater": dict(s["heater"])},
    ]
    return s


PRESETS = {
    "qd1": lambda: copy.deepcopy(DEFAULT_SCENARIO),
    "bare": _bare_preset,
    "two-device": _two_device_preset,
}


def _req(d: dict, key: str, where: str):
    if key not in d:
        raise ScenarioError(f"{where}: missing required key {key!r}")
    return d[key]


def _num(d: dict, key: str, where: str, default=None):
    if key not in d:
        if default is None:
            raise ScenarioError(f"{where}: missing required key {key!r}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


@dataclass(frozen=True)
class EmitterEntry:
    spec: EmitterSpec
    tau_on_ns: Optional[float]
    mode_wavelength_nm: float
    detuning_fwhm_nm: Optional[float]
    heater: HeaterSpec

    def tuning_state(self) -> TuningState:
        return TuningState.at_rest(self.spec.label, self.spec.bare_wavelength)


@dataclass(frozen=True)
class Scenario:
    document: dict
    waveguide: WaveguideParams
    geometry: RingGeometry
    taper: TaperSpec
    excess_loss: float
    anchor_wavelength: float
    coupler: CouplerSpec
    heater: HeaterSpec
    emitters: tuple
    sim: SimConfig
    blink: Optional[BlinkModel]
    seed: int

    @property
    def total_loss(self) -> float:
        return self.waveguide.intrinsic_loss + taper_loss(self.taper) + self.excess_loss

    def emitter(self, label: str) -> EmitterEntry:
        for e in self.emitters:
            if e.spec.label == label:
                return e
        raise ScenarioError(f"no emitter labelled {label!r}; have "
                            f"{[e.spec.label for e in self.emitters]}")

    def cavity_mode(self, wavelength: float) -> CavityMode:
        """Fitted cavity mode at a resonance of the device."""
        res = fit_dip(self.coupler, self.waveguide, self.geometry, wavelength, self.anchor_wavelength)
        w = abs(res.parameters["w"])
        return CavityMode(res.parameters["x0"], w)

    def coupling(self, label: str) -> CouplingModel:
        e = self.emitter(label)
        if e.tau_on_ns is None:
            raise ScenarioError(f"emitter {label}: tau_on_ns needed for the enhancement")
        F, _ = purcell_from_lifetimes(e.spec.off_resonant_lifetime, e.tau_on_ns, e.spec.zpl_fraction)
        return CouplingModel(self.cavity_mode(e.mode_wavelength_nm), F, e.detuning_fwhm_nm)

    @property
    def digest(self) -> str:
        return scenario_hash(self.document)


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def scenario_hash(doc: dict) -> str:
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()


def _heater(d: dict, where: str) -> HeaterSpec:
    try:
        return HeaterSpec(
            resistance=_num(d, "resistance_kohm", where),
            tuning_rate=_num(d, "gamma_nm_per_mW", where),
            max_voltage=_num(d, "max_voltage_V", where),
            crosstalk_rate=_num(d, "crosstalk_nm_per_mW", where, 0.0),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _coupler(c: dict, wg, geom, total_loss, anchor) -> CouplerSpec:
    where = "device.coupler"
    mode = _req(c, "mode", where)
    if mode == "critical":
        return critical_coupler(total_loss, geom)
    if mode == "explicit":
        from ..ring_model import single_pass_amplitude
        return CouplerSpec(_num(c, "self_coupling", where), single_pass_amplitude(total_loss, geom))
    if mode == "target_fwhm":
        lam = _num(c, "at_wavelength_nm", where)
        return coupler_for_fitted_fwhm(_num(c, "fwhm_nm", where), wg, geom, total_loss, lam, anchor)
    if mode == "target_q":
        lam = _num(c, "at_wavelength_nm", where)
        q = _num(c, "q", where)
        return coupler_for_fitted_fwhm(lam / q, wg, geom, total_loss, lam, anchor)
    if mode == "target_q_exact":
        lam = _num(c, "at_wavelength_nm", where)
        return coupler_for_loaded_q(_num(c, "q", where), wg, geom, total_loss, lam)
    raise ScenarioError(f"{where}.mode: unknown coupler mode {mode!r}; use critical, explicit, "
                        "target_fwhm, target_q or target_q_exact")


def scenario_from_dict(doc: dict) -> Scenario:
    """Validate a scenario document and build the model objects."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    try:
        dev = _req(doc, "device", "scenario")
        wg = WaveguideParams(
            group_index=_num(dev, "group_index", "device"),
            intrinsic_loss=_num(dev, "intrinsic_loss_dB_per_mm", "device"),
            reference_wavelength=_num(dev, "reference_wavelength_nm", "device"),
        )
        geom = RingGeometry(_num(dev, "radius_um", "device"), _num(dev, "straight_length_um", "device"))
        taper = TaperSpec(
            length=_num(dev, "taper_length_um", "device"),
            coupling_efficiency=_num(dev, "taper_efficiency", "device"),
            tip_width=dev.get("taper_tip_width_nm"),
        )
        excess = _num(dev, "excess_loss_dB_per_mm", "device", 0.0)
        if excess < 0:
            raise ScenarioError("device.excess_loss_dB_per_mm must be >= 0")
        anchor = _num(dev, "anchor_wavelength_nm", "device", 914.7)
        total = wg.intrinsic_loss + taper_loss(taper) + excess
        coupler = _coupler(_req(dev, "coupler", "device"), wg, geom, total, anchor)

        heater = _heater(_req(doc, "heater", "scenario"), "heater")

        entries, labels = [], set()
        for i, e in enumerate(_req(doc, "emitters", "scenario")):
            where = f"emitters[{i}]"
            label = str(_req(e, "label", where))
            if label in labels:
                raise ScenarioError(f"{where}: duplicate emitter label {label!r}")
            labels.add(label)
            spec = EmitterSpec(
                label=label,
                bare_wavelength=_num(e, "bare_wavelength_nm", where),
                off_resonant_lifetime=_num(e, "tau_off_ns", where),
                zpl_fraction=_num(e, "zpl_fraction", where, 0.9),
            )
            entries.append(EmitterEntry(
                spec=spec,
                tau_on_ns=_num(e, "tau_on_ns", where) if "tau_on_ns" in e else None,
                mode_wavelength_nm=_num(e, "mode_wavelength_nm", where, anchor),
                detuning_fwhm_nm=_num(e, "detuning_fwhm_nm", where) if e.get("detuning_fwhm_nm") is not None else None,
                heater=_heater(e["heater"], f"{where}.heater") if "heater" in e else heater,
            ))

        s = _req(doc, "sim", "scenario")
        seed = int(_req(doc, "seed", "scenario"))
        if not 0 <= seed < 2**64:
            raise ScenarioError("seed must be a 64-bit unsigned integer")
        sim = SimConfig(
            rep_rate_mhz=_num(s, "rep_rate_MHz", "sim"),
            lifetime_ns=_num(s, "lifetime_ns", "sim"),
            excitation_prob=_num(s, "excitation_prob", "sim"),
            two_photon_prob=_num(s, "two_photon_prob", "sim"),
            detection_efficiency=_num(s, "detection_efficiency", "sim"),
            dark_count_rate=_num(s, "dark_count_rate_cps", "sim"),
            irf_fwhm_ps=_num(s, "irf_fwhm_ps", "sim"),
            duration_s=_num(s, "duration_s", "sim"),
            rng_seed=seed,
        )
        blink = None
        if s.get("blink") is not None:
            b = s["blink"]
            blink = BlinkModel(_num(b, "on_dwell_ns", "sim.blink"), _num(b, "off_dwell_ns", "sim.blink"))
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None

    return Scenario(doc, wg, geom, taper, excess, anchor, coupler, heater, tuple(entries),
                    sim, blink, seed)


def load_scenario(path: Optional[str] = None, preset: str = "qd1") -> Scenario:
    if path is None:
        if preset not in PRESETS:
            raise ScenarioError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        return scenario_from_dict(PRESETS[preset]())
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from None
    return scenario_from_dict(doc)
