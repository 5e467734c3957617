"""Start-stop-free coincidence histograms and their side-peak normalisation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .. import _kernels
from .emitter import TimestampStream


@dataclass(frozen=True, eq=False)
class G2Histogram:
    """Coincidence histogram over signed delays ``t_B - t_A`` [ps].

    ``counts`` are raw integers until :func:`normalize_g2` divides them by the
    mean side-peak area; the raw values stay in ``raw_counts``.
    """
    bin_edges: np.ndarray
    counts: np.ndarray
    normalization_constant: Optional[float] = None
    normalized: bool = False
    g2_zero: Optional[float] = None
    side_peak_areas: tuple = field(default=())
    raw_counts: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.bin_edges.size != self.counts.size + 1:
            raise ValueError("need one more bin edge than counts")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")

    @property
    def tau(self) -> np.ndarray:
        """Bin centres [ps]."""
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])

    def peak_areas(self, period_ps: float, n_values, raw: bool = False) -> np.ndarray:
        """Sum bins whose centres lie within half a period of each ``n * period``."""
        c = self.raw_counts if raw and self.raw_counts is not None else self.counts
        idx = np.floor(self.tau / period_ps + 0.5).astype(np.int64)
        return np.array([c[idx == n].sum() for n in n_values], dtype=float)

    def __add__(self, other: "G2Histogram") -> "G2Histogram":
        if self.normalized or other.normalized:
            raise ValueError("only raw histograms can be merged")
        if not np.array_equal(self.bin_edges, other.bin_edges):
            raise ValueError("histograms have different bin edges")
        return G2Histogram(self.bin_edges, self.counts + other.counts)


def empty_histogram(window: float, bin_width: float) -> G2Histogram:
    n_half = _half_bins(window, bin_width)
    edges = np.arange(-n_half, n_half + 1) * bin_width
    return G2Histogram(edges, np.zeros(2 * n_half, dtype=np.int64))


def _half_bins(window, bin_width):
    if window <= 0 or bin_width <= 0:
        raise ValueError("window and bin width must be positive")
    ratio = window / bin_width
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-9 * max(ratio, 1.0):
        raise ValueError(f"window {window} ps is not a whole multiple of the bin width {bin_width} ps")
    return n


def hbt_correlate(stream: TimestampStream, window: float, bin_width: float) -> G2Histogram:
    """Histogram every A/B pair with ``|t_B - t_A| <= window`` by signed delay.

    Raises
    ------
    ValueError
        If the stream is not sorted or the window is not a whole number of bins.
    """
    hist = empty_histogram(window, bin_width)
    if not stream.is_sorted:
        raise ValueError("timestamp stream must be sorted ascending")
    window = hist.bin_edges[-1]
    counts = _kernels.correlate_sorted(stream.times, stream.channels, float(window),
                                       float(bin_width), hist.counts.size)
    return replace(hist, counts=np.asarray(counts, dtype=np.int64))


def normalize_g2(hist: G2Histogram, rep_rate_mhz: float, n_side_peaks: int = 20) -> G2Histogram:
    """Divide by the mean area of the ``n_side_peaks`` peaks nearest zero delay.

    Each peak area is integrated over one full period centred on ``n/f``, for
    ``n = +-1 .. +-n_side_peaks/2``.  The normalised zero-delay area is
    stored as ``g2_zero``.

    Raises
    ------
    ValueError
        If the histogram does not span enough periods, or the side peaks are empty.
    """
    if hist.normalized:
        raise ValueError("histogram is already normalised")
    if n_side_peaks < 2 or n_side_peaks % 2:
        raise ValueError("n_side_peaks must be a positive even number")
    period = 1e6 / rep_rate_mhz
    half = n_side_peaks // 2
    need = (half + 0.5) * period
    tol = 1e-9 * need
    if hist.bin_edges[0] > -need + tol or hist.bin_edges[-1] < need - tol:
        raise ValueError(
            f"histogram spans [{hist.bin_edges[0]:g}, {hist.bin_edges[-1]:g}] ps; "
            f"{n_side_peaks} side peaks at {rep_rate_mhz:g} MHz need a window of at least "
            f"{need:g} ps on each side")
    ns = np.concatenate([-np.arange(half, 0, -1), np.arange(1, half + 1)])
    side = hist.peak_areas(period, ns)
    mean = side.mean()
    if mean <= 0:
        raise ValueError("side peaks are empty; cannot normalise")
    zero = hist.peak_areas(period, [0])[0]
    return G2Histogram(
        bin_edges=hist.bin_edges,
        counts=hist.counts / mean,
        normalization_constant=float(mean),
        normalized=True,
        g2_zero=float(zero / mean),
        side_peak_areas=tuple(float(a) for a in side),
        raw_counts=hist.counts,
    )
