import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hmrr.ring_model import (
    CavityMode,
    CouplerSpec,
    RingGeometry,
    TaperSpec,
    UnboundedQError,
    WaveguideParams,
    coupler_for_fitted_fwhm,
    coupler_for_fwhm,
    coupler_for_loaded_q,
    critical_coupler,
    db_per_mm_to_power_attenuation,
    fit_dip,
    free_spectral_range,
    group_index_for_fsr,
    mode_comb,
    q_from_linewidth,
    q_from_losses,
    resonance_fwhm,
    resonance_wavelengths,
    single_pass_amplitude,
    taper_loss,
    transmission_spectrum,
)

WG = WaveguideParams(2.87, 0.78, 910.0)
GEOM = RingGeometry(15.0, 25.0)
LOSS = 0.78 + 7.446482167864383


def test_round_trip_length():
    assert GEOM.round_trip_length == pytest.approx(2 * math.pi * 15 + 50, rel=1e-12)
    assert GEOM.round_trip_length == pytest.approx(144.2478, abs=1e-4)


@pytest.mark.parametrize("kwargs", [
    dict(group_index=0.9, intrinsic_loss=0.78),
    dict(group_index=2.87, intrinsic_loss=-0.1),
    dict(group_index=2.87, intrinsic_loss=0.78, reference_wavelength=0.0),
])
def test_waveguide_validation(kwargs):
    with pytest.raises(ValueError):
        WaveguideParams(**kwargs)


def test_geometry_and_coupler_validation():
    with pytest.raises(ValueError):
        RingGeometry(0.0, 25.0)
    with pytest.raises(ValueError):
        RingGeometry(15.0, -1.0)
    with pytest.raises(ValueError):
        CouplerSpec(1.0, 0.9)
    with pytest.raises(ValueError):
        CouplerSpec(0.5, 0.0)


# ------------------------------------------------------------- taper loss

@pytest.mark.parametrize("eta, expected", [(0.983, 7.45), (0.998, 0.87), (1.0, 0.0)])
def test_taper_loss_examples(eta, expected):
    assert taper_loss(TaperSpec(10.0, eta)) == pytest.approx(expected, abs=0.01)


@pytest.mark.parametrize("eta, length", [(0.0, 10.0), (-0.1, 10.0), (1.01, 10.0), (0.9, 0.0), (0.9, -5.0)])
def test_taper_loss_rejects_nonphysical(eta, length):
    with pytest.raises(ValueError):
        taper_loss(TaperSpec(length, eta))


@given(st.floats(0.5, 0.999), st.floats(0.5, 0.999), st.floats(1.0, 100.0))
def test_taper_loss_decreases_with_efficiency(e1, e2, length):
    if e1 == e2:
        return
    lo, hi = sorted((e1, e2))
    assert taper_loss(TaperSpec(length, hi)) < taper_loss(TaperSpec(length, lo))


@given(st.floats(0.5, 0.999), st.floats(1.0, 100.0), st.floats(1.0, 100.0))
def test_taper_loss_decreases_with_length(eta, l1, l2):
    if l1 == l2:
        return
    lo, hi = sorted((l1, l2))
    assert taper_loss(TaperSpec(hi, eta)) < taper_loss(TaperSpec(lo, eta))


# ----------------------------------------------------------------- Q values

def test_unit_conversion_factor():
    assert db_per_mm_to_power_attenuation(1.0) == pytest.approx(1e3 * math.log(10) / 10, rel=1e-15)


def test_q_from_losses_examples():
    q0 = q_from_losses(WG, 7.45, 910.0)
    q1 = q_from_losses(WG, 0.87, 910.0)
    assert float(q0) == pytest.approx(1.05e4, rel=0.01)
    assert float(q1) == pytest.approx(5.2e4, rel=0.01)
    assert float(q1) / float(q0) == pytest.approx(8.23 / 1.65, rel=1e-3)
    assert "ln(10)/10" in q0.conversion


def test_q_doubling_loss_halves_q():
    wg = WaveguideParams(2.87, 0.0, 910.0)
    assert float(q_from_losses(wg, 2.0, 910.0)) == pytest.approx(0.5 * float(q_from_losses(wg, 1.0, 910.0)), rel=1e-14)


def test_zero_loss_is_unbounded():
    with pytest.raises(UnboundedQError):
        q_from_losses(WaveguideParams(2.87, 0.0, 910.0), 0.0, 910.0)


@given(st.floats(0.01, 10.0), st.floats(0.0, 10.0), st.floats(1e-3, 5.0))
def test_q_decreases_with_either_loss(a_int, a_taper, bump):
    base = float(q_from_losses(WaveguideParams(2.87, a_int, 910.0), a_taper, 910.0))
    more_int = float(q_from_losses(WaveguideParams(2.87, a_int + bump, 910.0), a_taper, 910.0))
    more_taper = float(q_from_losses(WaveguideParams(2.87, a_int, 910.0), a_taper + bump, 910.0))
    assert more_int < base and more_taper < base


def test_q_from_linewidth_examples():
    assert q_from_linewidth(914.7, 0.117) == pytest.approx(7818, abs=0.5)
    assert q_from_linewidth(913.10, 0.0507) == pytest.approx(1.8e4, rel=0.001)
    assert q_from_linewidth(910.0, 910.0) == 1.0
    with pytest.raises(ValueError):
        q_from_linewidth(914.7, 0.0)


# ---------------------------------------------------------------------- FSR

def test_fsr_examples():
    assert free_spectral_range(WG, GEOM, 910.0) == pytest.approx(2.00, abs=0.01)
    assert free_spectral_range(WG, GEOM, 914.7) == pytest.approx(2.02, abs=0.005)
    long = RingGeometry(15.0, 25.0 + GEOM.round_trip_length / 2)
    assert free_spectral_range(WG, long, 910.0) == pytest.approx(free_spectral_range(WG, GEOM, 910.0) / 2, rel=1e-12)


def test_group_index_oracle():
    # n_g from the stated 2 nm FSR and geometry
    assert group_index_for_fsr(2.0, GEOM, 910.0) == pytest.approx(2.87, abs=0.005)


# ------------------------------------------------------------- transmission

def test_critical_coupling_extinguishes_resonance():
    c = critical_coupler(LOSS, GEOM)
    lam, T = transmission_spectrum(c, WG, GEOM, [914.7])
    assert T[0] == pytest.approx(0.0, abs=1e-12)


def test_lossless_decoupled_ring_is_transparent():
    lam, T = transmission_spectrum(CouplerSpec(0.999999, 1.0), WG, GEOM, np.linspace(905, 915, 101))
    # r -> 1 with a = 1: all-pass unity
    assert np.allclose(T, 1.0, atol=1e-9)


def test_transmission_rejects_bad_grid():
    c = critical_coupler(LOSS, GEOM)
    with pytest.raises(ValueError):
        transmission_spectrum(c, WG, GEOM, [])
    with pytest.raises(ValueError):
        transmission_spectrum(c, WG, GEOM, [912.0, 911.0])


@settings(max_examples=50)
@given(st.floats(0.0, 0.9999), st.floats(0.01, 1.0))
def test_transmission_bounded(r, a):
    lam, T = transmission_spectrum(CouplerSpec(r, a), WG, GEOM, np.linspace(900, 920, 801))
    assert np.all(T >= 0) and np.all(T <= 1)


def test_dip_minima_follow_fsr():
    c = coupler_for_loaded_q(1.0e4, WG, GEOM, LOSS, 910.0)
    grid = np.linspace(905.0, 917.0, 120001)
    lam, T = transmission_spectrum(c, WG, GEOM, grid)
    interior = (T[1:-1] < T[:-2]) & (T[1:-1] < T[2:])
    minima = lam[1:-1][interior]
    spacing = np.diff(minima)
    mid = 0.5 * (minima[1:] + minima[:-1])
    fsr = np.array([free_spectral_range(WG, GEOM, m) for m in mid])
    assert np.all(np.abs(spacing - fsr) < 0.01 * fsr)


def test_fitted_dip_width_for_q_1e4():
    c = coupler_for_loaded_q(1.0e4, WG, GEOM, LOSS, 910.0)
    mode = fit_dip(c, WG, GEOM, 910.6)
    w = abs(mode.parameters["w"])
    assert w == pytest.approx(0.091, abs=0.001)


def test_dip_is_symmetric():
    c = coupler_for_loaded_q(1.0e4, WG, GEOM, LOSS, 910.0)
    res = fit_dip(c, WG, GEOM, 914.7)
    x0 = res.parameters["x0"]
    w = abs(res.parameters["w"])
    d = np.linspace(0, 1.5 * w, 50)
    _, left = transmission_spectrum(c, WG, GEOM, (x0 - d)[::-1])
    _, right = transmission_spectrum(c, WG, GEOM, x0 + d)
    depth = 1.0 - left.min()
    assert np.max(np.abs(left[::-1] - right)) < 0.01 * depth


def test_exact_fwhm_inverse():
    c = coupler_for_fwhm(0.117, WG, GEOM, LOSS, 914.7)
    assert resonance_fwhm(c, WG, GEOM, 914.7) == pytest.approx(0.117, rel=1e-8)


def test_single_pass_amplitude():
    a = single_pass_amplitude(LOSS, GEOM)
    alpha = db_per_mm_to_power_attenuation(LOSS)
    assert a == pytest.approx(math.exp(-alpha * GEOM.round_trip_length * 1e-6 / 2), rel=1e-12)


# ---------------------------------------------------------------- mode comb

def test_anchor_mode_calibrated():
    c = coupler_for_fitted_fwhm(0.117, WG, GEOM, LOSS, 914.7)
    modes = mode_comb(c, WG, GEOM, (914.0, 915.0))
    assert len(modes) == 1
    m = modes[0]
    assert m.center_wavelength == pytest.approx(914.7, abs=1e-4)
    assert m.fwhm == pytest.approx(0.117, abs=1e-6)
    assert m.loaded_q == pytest.approx(7818, abs=1)


def test_comb_in_908_918():
    c = coupler_for_fitted_fwhm(0.117, WG, GEOM, LOSS, 914.7)
    modes = mode_comb(c, WG, GEOM, (908.0, 918.0))
    assert len(modes) == 5
    centers = np.array([m.center_wavelength for m in modes])
    spacing = np.diff(centers)
    # spacing grows as lambda^2; all lie within 1% of 2 nm FSR-at-midpoint
    mid = 0.5 * (centers[1:] + centers[:-1])
    fsr = np.array([free_spectral_range(WG, GEOM, m) for m in mid])
    assert np.all(np.abs(spacing / fsr - 1) < 0.01)
    assert np.all(np.abs(spacing - 2.0) < 0.03)
    for m in modes:
        assert q_from_linewidth(m.center_wavelength, m.fwhm) == pytest.approx(m.loaded_q, rel=1e-6)
        assert m.fsr_at_mode == pytest.approx(free_spectral_range(WG, GEOM, m.center_wavelength), rel=0.01)


def test_empty_band_between_modes():
    c = critical_coupler(LOSS, GEOM)
    assert mode_comb(c, WG, GEOM, (910.5, 910.6)) == []


def test_band_outside_validity_rejected():
    c = critical_coupler(LOSS, GEOM)
    with pytest.raises(ValueError, match="20"):
        mode_comb(c, WG, GEOM, (880.0, 890.0))


def test_resonances_sit_on_anchor():
    lams = resonance_wavelengths(WG, GEOM, (900.0, 920.0), anchor_wavelength=914.7)
    assert np.min(np.abs(lams - 914.7)) < 1e-9


def test_cavity_mode_invariants():
    m = CavityMode(914.7, 0.117)
    assert m.loaded_q == pytest.approx(914.7 / 0.117, rel=1e-12)
    with pytest.raises(ValueError):
        CavityMode(914.7, 0.0)
    with pytest.raises(ValueError):
        CavityMode(914.7, 0.117, loaded_q=5000.0)
