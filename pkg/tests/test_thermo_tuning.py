import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hmrr.ring_model import CavityMode
from hmrr.thermo_tuning import (
    CoTuneError,
    HeaterSpec,
    TuningState,
    UnreachableTargetError,
    apply_power,
    co_tune,
    power_from_voltage,
    power_to_resonance,
    tuning_sweep,
    voltage_for_power,
    wavelength_at_power,
)

HEATER = HeaterSpec(23.8, 0.13, 30.0)
QD1 = TuningState.at_rest("QD1", 913.6)


def test_heater_validation():
    for kwargs in (dict(resistance=0.0), dict(tuning_rate=-0.1), dict(max_voltage=-1.0)):
        with pytest.raises(ValueError):
            HeaterSpec(**kwargs)


@pytest.mark.parametrize("volts, mw", [(30.0, 37.8), (0.0, 0.0), (15.0, 9.45)])
def test_power_from_voltage(volts, mw):
    assert power_from_voltage(HEATER, volts) == pytest.approx(mw, abs=0.02)


def test_voltage_out_of_range():
    with pytest.raises(ValueError):
        power_from_voltage(HEATER, 31.0)
    with pytest.raises(ValueError):
        power_from_voltage(HEATER, -1.0)


@given(st.floats(0.0, 15.0))
def test_power_is_exactly_quadratic(v):
    assert power_from_voltage(HEATER, 2 * v) == pytest.approx(4 * power_from_voltage(HEATER, v), rel=1e-14, abs=1e-300)


def test_wavelength_at_power_examples():
    assert wavelength_at_power(QD1, HEATER, 30.0) == pytest.approx(917.5, abs=1e-9)
    assert wavelength_at_power(QD1, HEATER, 0.0) == 913.6
    assert wavelength_at_power(QD1, HEATER, 8.46) == pytest.approx(914.7, abs=0.001)
    with pytest.raises(ValueError):
        wavelength_at_power(QD1, HEATER, -1.0)


@given(st.floats(0.0, 20.0), st.floats(0.0, 17.0))
def test_linearity(p1, p2):
    d = wavelength_at_power(QD1, HEATER, p1 + p2) - wavelength_at_power(QD1, HEATER, p1)
    assert d == pytest.approx(0.13 * p2, abs=1e-9)


def test_apply_power_keeps_invariant():
    s = apply_power(QD1, HEATER, 12.5)
    assert s.current_wavelength == pytest.approx(s.base_wavelength + 0.13 * 12.5, abs=1e-9)
    assert s.applied_power == 12.5


def test_power_to_resonance_example():
    sol = power_to_resonance(QD1, HEATER, 914.7)
    assert sol.power_mw == pytest.approx(8.46, abs=0.01)
    assert sol.voltage_v == pytest.approx(14.2, abs=0.05)
    assert sol.voltage_v == pytest.approx(voltage_for_power(HEATER, sol.power_mw), rel=1e-12)


def test_power_to_resonance_accepts_mode():
    sol = power_to_resonance(QD1, HEATER, CavityMode(914.7, 0.117))
    assert sol.achieved_nm == pytest.approx(914.7, abs=1e-9)


def test_zero_shift_needs_no_power():
    assert power_to_resonance(QD1, HEATER, 913.6).power_mw == 0.0


def test_blue_shift_unreachable():
    with pytest.raises(UnreachableTargetError, match="-1.0000 nm"):
        power_to_resonance(QD1, HEATER, 912.6)


def test_beyond_range_unreachable():
    with pytest.raises(UnreachableTargetError, match="covers 0 to"):
        power_to_resonance(QD1, HEATER, 920.0)


@given(st.floats(0.0, 4.9))
def test_roundtrip(shift):
    sol = power_to_resonance(QD1, HEATER, 913.6 + shift)
    assert wavelength_at_power(QD1, HEATER, sol.power_mw) == pytest.approx(913.6 + shift, abs=1e-9)


def test_tuning_sweep_rows():
    rows = tuning_sweep(QD1, HEATER, [0, 10, 30])
    assert rows.shape == (3, 2)
    np.testing.assert_allclose(rows[:, 1], [913.6, 914.9, 917.5])


def test_co_tune_independent():
    qd2 = TuningState.at_rest("QD2", 911.4)
    qd3 = TuningState.at_rest("QD3", 911.9)
    plan = co_tune([(qd2, HEATER), (qd3, HEATER)], [912.41, 912.41])
    assert plan[0].power_mw == pytest.approx((912.41 - 911.4) / 0.13, rel=1e-12)
    assert plan[1].power_mw == pytest.approx((912.41 - 911.9) / 0.13, rel=1e-12)
    for sol, s in zip(plan, (qd2, qd3)):
        assert sol.power_mw == power_to_resonance(s, HEATER, 912.41).power_mw
        assert sol.achieved_nm == pytest.approx(912.41, abs=1e-9)


def test_co_tune_targets_equal_bases():
    qd2 = TuningState.at_rest("QD2", 911.4)
    plan = co_tune([(QD1, HEATER), (qd2, HEATER)], [913.6, 911.4])
    assert [p.power_mw for p in plan] == [0.0, 0.0]


def test_co_tune_with_crosstalk():
    h = HeaterSpec(23.8, 0.13, 30.0, crosstalk_rate=0.01)
    a, b = TuningState.at_rest("A", 911.4), TuningState.at_rest("B", 911.9)
    plan = co_tune([(a, h), (b, h)], [912.41, 912.41])
    p1, p2 = plan[0].power_mw, plan[1].power_mw
    assert 911.4 + 0.13 * p1 + 0.01 * p2 == pytest.approx(912.41, abs=1e-6)
    assert 911.9 + 0.13 * p2 + 0.01 * p1 == pytest.approx(912.41, abs=1e-6)
    assert plan[0].achieved_nm == pytest.approx(912.41, abs=1e-6)


def test_co_tune_singular_system():
    h = HeaterSpec(23.8, 0.13, 30.0, crosstalk_rate=0.13)
    a, b = TuningState.at_rest("A", 911.4), TuningState.at_rest("B", 911.9)
    with pytest.raises(CoTuneError) as exc:
        co_tune([(a, h), (b, h)], [912.41, 912.41])
    assert len(exc.value.problems) == 2
    assert "singular" in str(exc.value)


def test_co_tune_reports_each_bad_device():
    b = TuningState.at_rest("B", 913.0)
    with pytest.raises(CoTuneError) as exc:
        co_tune([(QD1, HEATER), (b, HEATER)], [912.0, 913.5])
    assert len(exc.value.problems) == 1 and "QD1" in exc.value.problems[0]


def test_co_tune_length_mismatch():
    with pytest.raises(ValueError):
        co_tune([(QD1, HEATER)], [914.0, 915.0])
