"""Photon-stream simulation and HBT correlation."""

from .correlate import G2Histogram, empty_histogram, hbt_correlate, normalize_g2
from .emitter import (
    CHANNEL_A,
    CHANNEL_B,
    BlinkModel,
    SimConfig,
    Telegraph,
    TimestampStream,
    analytic_g2_zero,
    blink_envelope,
    fit_envelope,
    on_fraction,
    simulate_stream,
    telegraph_autocorrelation,
)

__all__ = [
    "BlinkModel",
    "CHANNEL_A",
    "CHANNEL_B",
    "G2Histogram",
    "SimConfig",
    "Telegraph",
    "TimestampStream",
    "analytic_g2_zero",
    "blink_envelope",
    "empty_histogram",
    "fit_envelope",
    "hbt_correlate",
    "normalize_g2",
    "on_fraction",
    "simulate_stream",
    "telegraph_autocorrelation",
]
