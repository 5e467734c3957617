"""
``hmrr`` command line.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 a reproduced
value outside its tolerance.
"""

from __future__ import annotations

import argparse
import copy
import os
import sys
from typing import Optional, Sequence

import numpy as np

from .. import __version__
from ..cavity_qed import lifetime_vs_detuning, purcell_record
from ..fitkit import FitError, ModelSpec, fit
from ..fitkit.models import MODELS
from ..photostat import hbt_correlate, normalize_g2, simulate_stream
from ..ring_model import (
    mode_comb,
    q_from_losses,
    taper_loss,
    transmission_spectrum,
)
from ..thermo_tuning import co_tune, power_to_resonance, tuning_sweep
from . import formats, reproduce
from .manifest import write_manifest
from .scenario import PRESETS, Scenario, ScenarioError, load_scenario, scenario_from_dict

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_ACCEPTANCE = 0, 1, 2, 3


# ------------------------------------------------------------------ commands
# Each cmd_* takes model objects and an output directory, writes its files
# atomically and returns the JSON-ready result (or the paths written).

def cmd_modes(scn: Scenario, band, out: str, spectrum_points: int = 0) -> list:
    modes = mode_comb(scn.coupler, scn.waveguide, scn.geometry, band, scn.anchor_wavelength)
    rows = [(m.center_wavelength, m.fwhm, m.loaded_q, m.fsr_at_mode) for m in modes]
    paths = [formats.atomic_write(os.path.join(out, "modes.csv"),
                                  formats.render_csv(formats.MODES_HEADER, rows))]
    if spectrum_points:
        grid = np.linspace(band[0], band[1], spectrum_points)
        lam, T = transmission_spectrum(scn.coupler, scn.waveguide, scn.geometry, grid,
                                       scn.anchor_wavelength)
        paths.append(formats.atomic_write(
            os.path.join(out, "spectrum.csv"),
            formats.render_csv(formats.SPECTRUM_HEADER, zip(lam.tolist(), T.tolist()))))
    return paths


def cmd_qbudget(scn: Scenario, out: str) -> dict:
    a_taper = taper_loss(scn.taper)
    budget = q_from_losses(scn.waveguide, a_taper + scn.excess_loss,
                           scn.waveguide.reference_wavelength)
    doc = {
        "alpha_int": scn.waveguide.intrinsic_loss,
        "alpha_taper": a_taper,
        "alpha_excess": scn.excess_loss,
        "alpha_total": budget.alpha_total_db_per_mm,
        "alpha_power_per_m": budget.alpha_power_per_m,
        "wavelength_nm": budget.wavelength_nm,
        "group_index": budget.group_index,
        "Q": budget.q,
    }
    formats.atomic_write(os.path.join(out, "qbudget.json"), formats.render_json(doc))
    return doc


def _auto_mode(scn: Scenario, lam: float) -> float:
    """Nearest resonance on the red side of ``lam`` (the heater only red-shifts)."""
    lo = max(lam, scn.waveguide.reference_wavelength - 20.0)
    band = (lo, min(lo + 5.0, scn.waveguide.reference_wavelength + 20.0))
    modes = mode_comb(scn.coupler, scn.waveguide, scn.geometry, band, scn.anchor_wavelength)
    if not modes:
        raise ValueError(f"no cavity mode within 5 nm to the red of {lam} nm")
    return modes[0].center_wavelength


def cmd_tune(scn: Scenario, label: str, out: str, target_nm=None, sweep_step: Optional[float] = None):
    e = scn.emitter(label)
    state = e.tuning_state()
    if sweep_step is not None:
        if sweep_step <= 0:
            raise ValueError("sweep step must be positive")
        n = int(np.floor(e.heater.max_power / sweep_step + 1e-9))
        powers = np.arange(n + 1) * sweep_step
        rows = tuning_sweep(state, e.heater, powers)
        return formats.atomic_write(os.path.join(out, "sweep.csv"),
                                    formats.render_csv(formats.SWEEP_HEADER, rows.tolist()))
    target = _auto_mode(scn, state.base_wavelength) if target_nm is None else float(target_nm)
    sol = power_to_resonance(state, e.heater, target)
    doc = {"device_id": sol.device_id, "power_mW": sol.power_mw, "voltage_V": sol.voltage_v,
           "achieved_nm": sol.achieved_nm, "shift_nm": sol.achieved_nm - state.base_wavelength,
           "target_nm": target}
    formats.atomic_write(os.path.join(out, "tune.json"), formats.render_json(doc))
    return doc


def cmd_cotune(scn: Scenario, targets: Sequence[float], out: str) -> str:
    if len(targets) == 1:
        targets = list(targets) * len(scn.emitters)
    if len(targets) != len(scn.emitters):
        raise ValueError(f"{len(targets)} targets for {len(scn.emitters)} emitters")
    devices = [(e.tuning_state(), e.heater) for e in scn.emitters]
    plan = co_tune(devices, targets)
    rows = [(s.device_id, s.power_mw, s.voltage_v, s.achieved_nm) for s in plan]
    return formats.atomic_write(os.path.join(out, "plan.csv"),
                                formats.render_csv(formats.PLAN_HEADER, rows))


def cmd_purcell(out: str, scn: Optional[Scenario] = None, explicit=None,
                curve_span_nm: Optional[float] = None, curve_points: int = 221) -> dict:
    """Purcell records from explicit ``(tau_o, tau_c, zpl)`` or the scenario's emitters."""
    records, curves = [], []
    if explicit is not None:
        tau_o, tau_c, zpl = explicit
        records.append(purcell_record("explicit", tau_o, tau_c, zpl))
    else:
        for e in scn.emitters:
            if e.tau_on_ns is None:
                continue
            records.append(purcell_record(e.spec.label, e.spec.off_resonant_lifetime,
                                          e.tau_on_ns, e.spec.zpl_fraction))
            if curve_span_nm:
                d = np.linspace(-curve_span_nm, curve_span_nm, curve_points)
                rows = lifetime_vs_detuning(e.spec, scn.coupling(e.spec.label), d)
                curves.append((e.spec.label, rows))
        if not records:
            raise ValueError("no emitter in the scenario has tau_on_ns; pass --tau-o/--tau-c")
    if explicit is not None and curve_span_nm:
        raise ValueError("lifetime curves need a scenario cavity mode; drop --curve-span-nm")
    doc = {"records": records}
    formats.atomic_write(os.path.join(out, "purcell.json"), formats.render_json(doc))
    for label, rows in curves:
        formats.atomic_write(os.path.join(out, f"lifetime_{label}.csv"),
                             formats.render_csv(formats.LIFETIME_HEADER, rows.tolist()))
    return doc


def cmd_simulate(scn: Scenario, out: str, duration_s: Optional[float] = None) -> str:
    cfg = scn.sim
    if duration_s is not None:
        from dataclasses import replace
        cfg = replace(cfg, duration_s=float(duration_s))
    stream = simulate_stream(cfg, scn.blink)
    return formats.write_stream(os.path.join(out, "stream.csv"), stream)


def cmd_correlate(stream_path: str, out: str, window_ps: float, bin_width_ps: float,
                  rep_rate_mhz: float, normalize: bool, n_side_peaks: int = 20):
    stream = formats.read_stream(stream_path, rep_rate_mhz)
    hist = hbt_correlate(stream, window_ps, bin_width_ps)
    if normalize:
        hist = normalize_g2(hist, rep_rate_mhz, n_side_peaks)
    csv_path = formats.atomic_write(os.path.join(out, "histogram.csv"), formats.render_histogram(hist))
    side = formats.histogram_sidecar(hist)
    json_path = formats.atomic_write(os.path.join(out, "histogram.json"), formats.render_json(side))
    return side, [csv_path, json_path]


def cmd_fit(model_id: str, data_path: str, out: str, pins=None, guess=None, options=None) -> dict:
    if model_id not in MODELS:
        raise ValueError(f"unknown model {model_id!r}; choose from {', '.join(MODELS)}")
    x, y, w = formats.read_fit_data(data_path)
    spec = ModelSpec(model_id, fixed_parameters=pins or {}, initial_guess=guess or {},
                     options=options or {})
    res = fit(spec, x, y, weights=w)
    doc = res.to_dict()
    formats.atomic_write(os.path.join(out, "fit.json"), formats.render_json(doc))
    return doc


# ------------------------------------------------------------------ parsing

def _key_values(items, what, numeric=True) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ValueError(f"{what} must look like name=value, got {item!r}")
        k, v = item.split("=", 1)
        if numeric:
            try:
                out[k] = float(v)
            except ValueError:
                raise ValueError(f"{what} {k}: {v!r} is not a number") from None
        else:
            try:
                f = float(v)
                out[k] = int(f) if f.is_integer() and "." not in v and "e" not in v.lower() else f
            except ValueError:
                out[k] = v
    return out


def _scenario(args) -> Scenario:
    scn = load_scenario(args.scenario, args.preset)
    if args.seed is not None:
        doc = copy.deepcopy(scn.document)
        doc["seed"] = args.seed
        scn = scenario_from_dict(doc)
    return scn


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", metavar="FILE", help="scenario JSON (default: built-in preset)")
    common.add_argument("--preset", default="qd1", choices=sorted(PRESETS),
                        help="built-in scenario used when --scenario is absent")
    common.add_argument("--seed", type=int, help="override the scenario's master seed")
    common.add_argument("--out", default=".", metavar="DIR", help="output directory")
    common.add_argument("--quiet", action="store_true", help="do not echo results to stdout")

    p = argparse.ArgumentParser(prog="hmrr", description=__doc__.strip().splitlines()[0])
    p.add_argument("--version", action="version", version=f"hmrr {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("scenario", parents=[common], help="write a preset scenario file")
    s.set_defaults(handler=_run_scenario)

    s = sub.add_parser("modes", parents=[common], help="mode comb in a wavelength band")
    s.add_argument("--band", nargs=2, type=float, metavar=("LO_NM", "HI_NM"), default=(908.0, 918.0))
    s.add_argument("--spectrum-points", type=int, default=0,
                   help="also write spectrum.csv on this many grid points")
    s.set_defaults(handler=_run_modes)

    s = sub.add_parser("qbudget", parents=[common], help="loss budget and loss-limited Q")
    s.set_defaults(handler=_run_qbudget)

    s = sub.add_parser("tune", parents=[common], help="heater power to reach a cavity mode")
    s.add_argument("--emitter", help="emitter label (default: first in the scenario)")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--target-nm", type=float, help="target wavelength (default: next mode to the red)")
    g.add_argument("--sweep-step-mW", type=float, dest="sweep_step",
                   help="write a power sweep from 0 to the heater limit instead")
    g.add_argument("--co-tune", nargs="+", type=float, metavar="NM",
                   help="tune every emitter: one shared target or one per emitter")
    s.set_defaults(handler=_run_tune)

    s = sub.add_parser("purcell", parents=[common], help="Purcell factors from lifetimes")
    s.add_argument("--tau-o", type=float, help="off-resonant lifetime [ns]")
    s.add_argument("--tau-c", type=float, help="on-resonant lifetime [ns]")
    s.add_argument("--zpl", type=float, default=0.9, help="zero-phonon-line fraction")
    s.add_argument("--curve-span-nm", type=float,
                   help="also write lifetime_<label>.csv over +-span of detuning")
    s.add_argument("--curve-points", type=int, default=221)
    s.set_defaults(handler=_run_purcell)

    s = sub.add_parser("simulate", parents=[common], help="simulate a detected photon stream")
    s.add_argument("--duration-s", type=float, help="override the scenario duration")
    s.set_defaults(handler=_run_simulate)

    s = sub.add_parser("correlate", parents=[common], help="HBT coincidence histogram of a stream")
    s.add_argument("--stream", required=True, metavar="FILE", help="stream CSV (t_ps,channel)")
    s.add_argument("--window-ps", type=float, default=262500.0)
    s.add_argument("--bin-width-ps", type=float, default=100.0)
    s.add_argument("--rep-rate-MHz", type=float, dest="rep_rate",
                   help="laser repetition rate (default: from the scenario)")
    s.add_argument("--normalize", action="store_true", help="normalise by the mean side-peak area")
    s.add_argument("--n-side-peaks", type=int, default=20)
    s.set_defaults(handler=_run_correlate)

    s = sub.add_parser("fit", parents=[common], help="fit a model to x,y[,weight] data")
    s.add_argument("--model", required=True, choices=sorted(MODELS))
    s.add_argument("--data", required=True, metavar="FILE")
    s.add_argument("--pin", action="append", metavar="NAME=VALUE", help="fix a parameter")
    s.add_argument("--guess", action="append", metavar="NAME=VALUE", help="starting value")
    s.add_argument("--option", action="append", metavar="KEY=VALUE",
                   help="model option, e.g. n_components=2 or bin_width=0.1")
    s.set_defaults(handler=_run_fit)

    s = sub.add_parser("reproduce", parents=[common], help="recompute and check the reference numbers")
    s.add_argument("figure", choices=list(reproduce.FIGURES) + ["all"])
    s.set_defaults(handler=_run_reproduce)
    return p


def _echo(args, text):
    if not args.quiet:
        print(text)


def _manifest(args, scn: Scenario, paths):
    write_manifest(args.out, ["hmrr", *args.argv], scn.digest, scn.seed, paths)


def _run_scenario(args):
    scn = _scenario(args)
    path = formats.atomic_write(os.path.join(args.out, "scenario.json"), formats.render_json(scn.document))
    _echo(args, path)
    return EXIT_OK


def _run_modes(args):
    scn = _scenario(args)
    if args.spectrum_points < 0:
        raise ValueError("--spectrum-points must be >= 0")
    paths = cmd_modes(scn, tuple(args.band), args.out, args.spectrum_points)
    _manifest(args, scn, paths)
    _echo(args, "\n".join(paths))
    return EXIT_OK


def _run_qbudget(args):
    scn = _scenario(args)
    doc = cmd_qbudget(scn, args.out)
    _manifest(args, scn, [os.path.join(args.out, "qbudget.json")])
    _echo(args, formats.render_json(doc).decode().rstrip())
    return EXIT_OK


def _run_tune(args):
    scn = _scenario(args)
    if args.co_tune:
        path = cmd_cotune(scn, args.co_tune, args.out)
        _manifest(args, scn, [path])
        _echo(args, path)
        return EXIT_OK
    label = args.emitter or scn.emitters[0].spec.label
    res = cmd_tune(scn, label, args.out, args.target_nm, args.sweep_step)
    if isinstance(res, str):
        _manifest(args, scn, [res])
        _echo(args, res)
    else:
        _manifest(args, scn, [os.path.join(args.out, "tune.json")])
        _echo(args, formats.render_json(res).decode().rstrip())
    return EXIT_OK


def _run_purcell(args):
    given = [args.tau_o is not None, args.tau_c is not None]
    if any(given) and not all(given):
        raise ValueError("--tau-o and --tau-c must be given together")
    scn = _scenario(args)
    explicit = (args.tau_o, args.tau_c, args.zpl) if all(given) else None
    doc = cmd_purcell(args.out, scn, explicit, args.curve_span_nm, args.curve_points)
    files = [os.path.join(args.out, "purcell.json")]
    if explicit is None and args.curve_span_nm:
        files += [os.path.join(args.out, f"lifetime_{r['label']}.csv") for r in doc["records"]]
    _manifest(args, scn, files)
    _echo(args, formats.render_json(doc).decode().rstrip())
    return EXIT_OK


def _run_simulate(args):
    scn = _scenario(args)
    path = cmd_simulate(scn, args.out, args.duration_s)
    _manifest(args, scn, [path])
    _echo(args, path)
    return EXIT_OK


def _run_correlate(args):
    scn = _scenario(args)
    rate = args.rep_rate if args.rep_rate is not None else scn.sim.rep_rate_mhz
    side, paths = cmd_correlate(args.stream, args.out, args.window_ps, args.bin_width_ps,
                                rate, args.normalize, args.n_side_peaks)
    _manifest(args, scn, paths)
    _echo(args, formats.render_json(side).decode().rstrip())
    return EXIT_OK


def _run_fit(args):
    scn = _scenario(args)
    doc = cmd_fit(args.model, args.data, args.out,
                  pins=_key_values(args.pin, "--pin"),
                  guess=_key_values(args.guess, "--guess"),
                  options=_key_values(args.option, "--option", numeric=False))
    _manifest(args, scn, [os.path.join(args.out, "fit.json")])
    _echo(args, formats.render_json(doc).decode().rstrip())
    return EXIT_OK if doc["converged"] else EXIT_NUMERICAL


def _run_reproduce(args):
    scn = _scenario(args)
    figures = list(reproduce.FIGURES) if args.figure == "all" else [args.figure]
    checks = reproduce.run(figures, progress=lambda c: _echo(args, c.line()))
    doc = reproduce.report(figures, checks)
    path = formats.atomic_write(os.path.join(args.out, f"report_{args.figure}.json"),
                                formats.render_json(doc))
    _manifest(args, scn, [path])
    n_fail = sum(not c.passed for c in checks)
    _echo(args, f"{len(checks) - n_fail}/{len(checks)} checks passed")
    return EXIT_OK if n_fail == 0 else EXIT_ACCEPTANCE


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors count as invalid input
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    args.argv = argv
    try:
        return args.handler(args)
    except (FitError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"hmrr {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ScenarioError, ValueError) as exc:
        print(f"hmrr {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"hmrr {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
