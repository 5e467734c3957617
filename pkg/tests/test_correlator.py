import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hmrr import _kernels
from hmrr._kernels import _pycore
from hmrr.photostat import CHANNEL_A, CHANNEL_B, TimestampStream, empty_histogram, hbt_correlate

BACKENDS = {"python": _pycore.correlate_sorted}
try:
    from hmrr._kernels import _ccore
except ImportError:
    pass
else:
    BACKENDS["cython"] = _ccore.correlate_sorted


def pair_loop(times, channels, window, bin_width):
    """Plain double loop over every A/B pair."""
    n_half = int(round(window / bin_width))
    counts = [0] * (2 * n_half)
    a = [t for t, c in zip(times, channels) if c == CHANNEL_A]
    b = [t for t, c in zip(times, channels) if c == CHANNEL_B]
    for ta in a:
        for tb in b:
            d = tb - ta
            if abs(d) <= window:
                k = min(int(math.floor((d + window) / bin_width)), 2 * n_half - 1)
                counts[k] += 1
    return np.array(counts)


@pytest.fixture(params=sorted(BACKENDS))
def kernel(request):
    return BACKENDS[request.param]


def test_active_backend_is_known():
    assert _kernels.BACKEND in ("python", "cython")


def test_single_pair_lands_at_zero_delay(kernel):
    counts = kernel(np.array([1000.0, 1000.0]), np.array([0, 1], np.uint8), 500.0, 100.0, 10)
    assert counts[5] == 1 and counts.sum() == 1


def test_sign_convention(kernel):
    # B after A gives positive delay
    counts = kernel(np.array([0.0, 250.0]), np.array([0, 1], np.uint8), 500.0, 100.0, 10)
    assert counts[7] == 1
    counts = kernel(np.array([0.0, 250.0]), np.array([1, 0], np.uint8), 500.0, 100.0, 10)
    assert counts[2] == 1


def test_same_channel_pairs_ignored(kernel):
    counts = kernel(np.array([0.0, 10.0, 20.0]), np.zeros(3, np.uint8), 500.0, 100.0, 10)
    assert counts.sum() == 0


def test_window_edges_inclusive(kernel):
    counts = kernel(np.array([0.0, 500.0]), np.array([0, 1], np.uint8), 500.0, 100.0, 10)
    assert counts[-1] == 1
    counts = kernel(np.array([0.0, 500.5]), np.array([0, 1], np.uint8), 500.0, 100.0, 10)
    assert counts.sum() == 0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 20000), st.integers(0, 1)), min_size=0, max_size=120),
       st.integers(1, 30))
def test_matches_pair_loop(events, n_half):
    events.sort()
    times = np.array([e[0] for e in events], dtype=float)
    chans = np.array([e[1] for e in events], dtype=np.uint8)
    window = n_half * 100.0
    expect = pair_loop(times, chans, window, 100.0)
    for fn in BACKENDS.values():
        assert np.array_equal(np.asarray(fn(times, chans, window, 100.0, expect.size)), expect)


def test_backends_agree_on_dense_stream():
    rng = np.random.default_rng(5)
    t = np.sort(rng.random(20000) * 1e7)
    c = rng.integers(0, 2, t.size).astype(np.uint8)
    ref = _pycore.correlate_sorted(t, c, 2e5, 50.0, 8000)
    for fn in BACKENDS.values():
        assert np.array_equal(np.asarray(fn(t, c, 2e5, 50.0, 8000)), ref)


def test_independent_poisson_is_flat():
    rng = np.random.default_rng(11)
    t = np.sort(rng.random(200000) * 1e9)
    c = rng.integers(0, 2, t.size).astype(np.uint8)
    hist = hbt_correlate(TimestampStream(t, c, 40.0), 1e5, 1e4)
    counts = hist.counts
    mean = counts.mean()
    chi2 = float(((counts - mean) ** 2 / mean).sum())
    # 19 dof, generous bound
    assert chi2 < 50
    # N_A N_B bin / T with 1e5 events per channel
    assert mean == pytest.approx(1e5 * 1e5 * 1e4 / 1e9, rel=0.05)


def test_hbt_correlate_validates():
    s = TimestampStream(np.array([2.0, 1.0]), np.array([0, 1]), 40.0)
    with pytest.raises(ValueError, match="sorted"):
        hbt_correlate(s, 100.0, 10.0)
    ok = TimestampStream(np.array([1.0, 2.0]), np.array([0, 1]), 40.0)
    with pytest.raises(ValueError, match="whole multiple"):
        hbt_correlate(ok, 105.0, 10.0)
    with pytest.raises(ValueError):
        empty_histogram(0.0, 10.0)


def test_empty_and_single_event_streams():
    for n in (0, 1):
        s = TimestampStream(np.arange(n, dtype=float), np.zeros(n), 40.0)
        assert hbt_correlate(s, 100.0, 10.0).counts.sum() == 0
