import copy
import json
import os
import stat
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from hmrr.cli_io import (
    DEFAULT_SCENARIO,
    PRESETS,
    CsvFormatError,
    RunManifest,
    ScenarioError,
    file_digest,
    load_scenario,
    main,
    scenario_from_dict,
)
from hmrr.cli_io import formats
from hmrr.cli_io.schemas import SCHEMAS
from hmrr.cli_io.scenario import scenario_hash
from hmrr.photostat import TimestampStream


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path), "--quiet"])


def load(path):
    with open(path) as fh:
        return json.load(fh)


def check_manifest(directory):
    doc = load(os.path.join(directory, "manifest.json"))
    jsonschema.validate(doc, SCHEMAS["manifest"])
    m = RunManifest(doc["command"], doc["scenario_hash"], doc["seed"],
                    {o["file"]: o["sha256"] for o in doc["outputs"]})
    assert m.verify(directory) == []
    return doc


# ----------------------------------------------------------------- scenario

def test_presets_load():
    for name in PRESETS:
        scn = load_scenario(preset=name)
        assert scn.emitters
    assert len(load_scenario(preset="two-device").emitters) == 2


def test_scenario_hash_is_key_order_independent():
    doc = PRESETS["qd1"]()
    shuffled = json.loads(json.dumps(doc, sort_keys=True))
    shuffled = dict(reversed(list(shuffled.items())))
    assert scenario_hash(doc) == scenario_hash(shuffled)
    other = copy.deepcopy(doc)
    other["seed"] = 43
    assert scenario_hash(other) != scenario_hash(doc)


def test_duplicate_labels_rejected():
    doc = copy.deepcopy(DEFAULT_SCENARIO)
    doc["emitters"] = doc["emitters"] * 2
    with pytest.raises(ScenarioError, match="duplicate emitter label 'QD1'"):
        scenario_from_dict(doc)


@pytest.mark.parametrize("section, key", [("device", "group_index"), ("sim", "rep_rate_MHz"),
                                          ("heater", "resistance_kohm")])
def test_missing_key_named(section, key):
    doc = copy.deepcopy(DEFAULT_SCENARIO)
    del doc[section][key]
    with pytest.raises(ScenarioError, match=key):
        scenario_from_dict(doc)


def test_bad_values_rejected():
    doc = copy.deepcopy(DEFAULT_SCENARIO)
    doc["device"]["taper_efficiency"] = 1.2
    with pytest.raises(ScenarioError):
        scenario_from_dict(doc)
    doc = copy.deepcopy(DEFAULT_SCENARIO)
    doc["device"]["radius_um"] = "15"
    with pytest.raises(ScenarioError, match="expected a number"):
        scenario_from_dict(doc)


def test_malformed_json_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "seed": 1,\n  oops\n}\n')
    with pytest.raises(ScenarioError, match="line 3"):
        load_scenario(str(p))


def test_scenario_round_trip(tmp_path):
    assert run(tmp_path, "scenario", "--preset", "bare") == 0
    path = tmp_path / "scenario.json"
    assert load_scenario(str(path)).digest == load_scenario(preset="bare").digest


# -------------------------------------------------------------------- CSV

def test_csv_numeric_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    rows = rng.normal(size=(50, 2)) * 10.0 ** rng.integers(-12, 12, size=(50, 2))
    p = tmp_path / "s.csv"
    formats.atomic_write(str(p), formats.render_csv(formats.SPECTRUM_HEADER, rows.tolist()))
    back = formats.read_numeric_csv(str(p), formats.SPECTRUM_HEADER)
    assert np.array_equal(back, rows)


def test_stream_round_trip(tmp_path):
    t = np.sort(np.random.default_rng(1).random(100) * 1e9)
    s = TimestampStream(t, np.arange(100) % 2, 40.0)
    p = str(tmp_path / "stream.csv")
    formats.write_stream(p, s)
    back = formats.read_stream(p, 40.0)
    assert np.array_equal(back.times, s.times) and np.array_equal(back.channels, s.channels)
    with open(p) as fh:
        assert fh.readline() == "t_ps,channel\n"
        assert fh.readline().rstrip().endswith(",A")


@pytest.mark.parametrize("body, line, field", [
    ("t_ps,channel\n1.0,A\nabc,B\n", 3, "t_ps"),
    ("t_ps,channel\n1.0,A\n2.0,C\n", 3, "channel"),
    ("t_ps,channel\n3.0,A\n2.0,B\n", 3, "t_ps"),
    ("t_ps,channel\n1.0,A,x\n", 2, None),
    ("time,channel\n1.0,A\n", 1, None),
    ("t_ps,channel\n1.0,A\r\n", 2, None),
    ("", 1, None),
])
def test_stream_errors_name_line_and_field(tmp_path, body, line, field):
    p = tmp_path / "s.csv"
    p.write_bytes(body.encode())
    with pytest.raises(CsvFormatError) as exc:
        formats.read_stream(str(p), 40.0)
    assert exc.value.line == line
    assert exc.value.field == field
    assert f"s.csv:{line}" in str(exc.value)


def test_fit_data_weights(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("x,y,weight\n1,2,1\n2,3,-1\n")
    with pytest.raises(CsvFormatError, match="weight"):
        formats.read_fit_data(str(p))
    p.write_text("x,y\n1,2\n2,3\n")
    x, y, w = formats.read_fit_data(str(p))
    assert w is None and y.tolist() == [2.0, 3.0]
    p.write_text("x,y\n1,nan\n")
    with pytest.raises(CsvFormatError, match="non-finite"):
        formats.read_fit_data(str(p))


def test_atomic_write_leaves_no_temp(tmp_path):
    p = tmp_path / "out" / "a.txt"
    formats.atomic_write(str(p), b"one")
    formats.atomic_write(str(p), b"two")
    assert p.read_bytes() == b"two"
    assert os.listdir(tmp_path / "out") == ["a.txt"]
    mode = stat.S_IMODE(os.stat(p).st_mode)
    mask = os.umask(0)
    os.umask(mask)
    assert mode == 0o666 & ~mask


def test_json_rejects_nan():
    with pytest.raises(ValueError):
        formats.render_json({"x": float("nan")})


# --------------------------------------------------------------- commands

def test_qbudget(tmp_path):
    assert run(tmp_path, "qbudget") == 0
    doc = load(tmp_path / "qbudget.json")
    jsonschema.validate(doc, SCHEMAS["qbudget"])
    assert doc["alpha_taper"] == pytest.approx(7.45, abs=0.01)
    assert doc["Q"] == pytest.approx(1.05e4, rel=0.01)
    m = check_manifest(tmp_path)
    assert m["scenario_hash"] == load_scenario().digest
    assert m["command"][:2] == ["hmrr", "qbudget"]


def test_modes_and_spectrum(tmp_path):
    assert run(tmp_path, "modes", "--band", "908", "918", "--spectrum-points", "501") == 0
    modes = formats.read_numeric_csv(str(tmp_path / "modes.csv"), formats.MODES_HEADER)
    assert modes.shape == (5, 4)
    assert np.all(np.abs(np.diff(modes[:, 0]) - 2.0) < 0.03)
    spec = formats.read_numeric_csv(str(tmp_path / "spectrum.csv"), formats.SPECTRUM_HEADER)
    assert spec.shape == (501, 2) and np.all((spec[:, 1] >= 0) & (spec[:, 1] <= 1))
    assert {o["file"] for o in check_manifest(tmp_path)["outputs"]} == {"modes.csv", "spectrum.csv"}


def test_tune_to_anchor(tmp_path):
    assert run(tmp_path, "tune", "--target-nm", "914.7") == 0
    doc = load(tmp_path / "tune.json")
    jsonschema.validate(doc, SCHEMAS["tune"])
    assert doc["power_mW"] == pytest.approx(8.46, abs=0.01)
    assert doc["voltage_V"] == pytest.approx(14.2, abs=0.05)


def test_tune_auto_mode_is_red_of_emitter(tmp_path):
    assert run(tmp_path, "tune") == 0
    doc = load(tmp_path / "tune.json")
    assert doc["target_nm"] > 913.6 and doc["shift_nm"] > 0


def test_tune_sweep(tmp_path):
    assert run(tmp_path, "tune", "--sweep-step-mW", "1") == 0
    rows = formats.read_numeric_csv(str(tmp_path / "sweep.csv"), formats.SWEEP_HEADER)
    assert rows[0].tolist() == [0.0, 913.6]
    assert np.allclose(np.diff(rows[:, 1]), 0.13)


def test_cotune_two_device(tmp_path):
    assert run(tmp_path, "tune", "--preset", "two-device", "--co-tune", "912.41") == 0
    lines = (tmp_path / "plan.csv").read_text().splitlines()
    assert lines[0] == ",".join(formats.PLAN_HEADER)
    assert lines[1].startswith("QD2,") and lines[2].startswith("QD3,")
    for line in lines[1:]:
        assert float(line.split(",")[3]) == pytest.approx(912.41, abs=1e-9)


def test_purcell_explicit_and_curve(tmp_path):
    assert run(tmp_path, "purcell", "--tau-o", "2.25", "--tau-c", "0.499", "--zpl", "0.9") == 0
    doc = load(tmp_path / "purcell.json")
    jsonschema.validate(doc, SCHEMAS["purcell"])
    assert doc["records"][0]["Fp"] == pytest.approx(4.90, abs=0.02)
    d2 = tmp_path / "curve"
    assert run(d2, "purcell", "--curve-span-nm", "1.1", "--curve-points", "23") == 0
    rows = formats.read_numeric_csv(str(d2 / "lifetime_QD1.csv"), formats.LIFETIME_HEADER)
    assert rows.shape == (23, 2)
    assert rows[11, 1] == pytest.approx(0.499, abs=1e-3)


def test_simulate_correlate_fit_pipeline(tmp_path):
    sim = tmp_path / "sim"
    assert run(sim, "simulate", "--duration-s", "0.02") == 0
    check_manifest(sim)
    cor = tmp_path / "cor"
    assert run(cor, "correlate", "--stream", str(sim / "stream.csv"), "--normalize") == 0
    side = load(cor / "histogram.json")
    jsonschema.validate(side, SCHEMAS["histogram"])
    assert side["normalized"] and 0 <= side["g2_zero"] < 0.1
    assert len(side["side_peak_areas"]) == 20
    tau, counts = formats.read_histogram(str(cor / "histogram.csv"))
    assert tau.size == 2 * 2625
    # feed a lifetime decay built from the stream to the fitter
    stream = formats.read_stream(str(sim / "stream.csv"), 40.0)
    delay = np.mod(stream.times, 25000.0) * 1e-3
    y, edges = np.histogram(delay, bins=np.arange(0.0, 12.5 + 1e-9, 0.016))
    x = 0.5 * (edges[1:] + edges[:-1])
    data = tmp_path / "decay.csv"
    formats.atomic_write(str(data), formats.render_csv(("x", "y"), zip(x.tolist(), y.tolist())))
    fit_dir = tmp_path / "fit"
    assert run(fit_dir, "fit", "--model", "decay_irf", "--data", str(data),
               "--pin", "irf_fwhm=0.1", "--option", "n_components=1") == 0
    doc = load(fit_dir / "fit.json")
    jsonschema.validate(doc, SCHEMAS["fit"])
    assert doc["parameters"]["tau1"] == pytest.approx(0.499, rel=0.05)


def test_repeated_runs_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert run(tmp_path / d, "simulate", "--duration-s", "0.005") == 0
        assert run(tmp_path / d, "qbudget") == 0
    for name in ("stream.csv", "qbudget.json"):
        assert file_digest(tmp_path / "a" / name) == file_digest(tmp_path / "b" / name)


def test_seed_changes_stream(tmp_path):
    assert run(tmp_path / "a", "simulate", "--duration-s", "0.005") == 0
    assert run(tmp_path / "b", "simulate", "--duration-s", "0.005", "--seed", "7") == 0
    assert file_digest(tmp_path / "a" / "stream.csv") != file_digest(tmp_path / "b" / "stream.csv")
    assert load(tmp_path / "b" / "manifest.json")["seed"] == 7


def test_threads_env_in_subprocess(tmp_path):
    digests = []
    for n in ("1", "4"):
        out = tmp_path / n
        env = dict(os.environ, HMRR_THREADS=n)
        r = subprocess.run([sys.executable, "-m", "hmrr.cli_io.cli", "simulate", "--duration-s", "0.06",
                            "--out", str(out), "--quiet"], env=env, capture_output=True)
        assert r.returncode == 0, r.stderr
        digests.append(file_digest(out / "stream.csv"))
    assert digests[0] == digests[1]


# ------------------------------------------------------------- exit codes

def test_exit_code_usage_error(tmp_path, capsys):
    assert main(["modes", "--band", "x"]) == 1
    assert main(["nonsense"]) == 1


def test_exit_code_unreachable_target(tmp_path, capsys):
    assert run(tmp_path, "tune", "--target-nm", "912.0") == 1
    assert "shift of -1.6000 nm" in capsys.readouterr().err


def test_exit_code_bad_csv(tmp_path, capsys):
    p = tmp_path / "s.csv"
    p.write_text("t_ps,channel\n1.0,Q\n")
    assert run(tmp_path, "correlate", "--stream", str(p)) == 1
    assert "s.csv:2" in capsys.readouterr().err


def test_exit_code_missing_file(tmp_path):
    assert run(tmp_path, "correlate", "--stream", str(tmp_path / "none.csv")) == 1
    assert run(tmp_path, "qbudget", "--scenario", str(tmp_path / "none.json")) == 1


def test_exit_code_numerical(tmp_path, capsys):
    p = tmp_path / "d.csv"
    p.write_text("x,y\n" + "".join(f"0,{i}\n" for i in range(6)))
    assert run(tmp_path, "fit", "--model", "linear", "--data", str(p)) == 2
    assert "numerical" in capsys.readouterr().err


def test_exit_code_acceptance(tmp_path, monkeypatch):
    from hmrr.cli_io import reproduce

    def failing():
        r = reproduce._Recorder("fig2")
        r.add("stub", 1, "stub", "stub", 0.0, "1", False)
        return r.checks

    monkeypatch.setitem(reproduce.RUNNERS, "fig2", failing)
    assert run(tmp_path, "reproduce", "fig2") == 3
    jsonschema.validate(load(tmp_path / "report_fig2.json"), SCHEMAS["report"])


def test_reproduce_fig5_passes(tmp_path):
    assert run(tmp_path, "reproduce", "fig5") == 0
    doc = load(tmp_path / "report_fig5.json")
    jsonschema.validate(doc, SCHEMAS["report"])
    assert doc["passed"]


def test_version(capsys):
    assert main(["--version"]) == 0
    assert capsys.readouterr().out.startswith("hmrr ")
