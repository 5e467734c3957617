"""Numpy implementation of the correlation kernel, used when the extension is absent."""

from __future__ import annotations

import numpy as np

_CHUNK_PAIRS = 4_000_000


def correlate_sorted(times, channels, window, bin_width, n_bins):
    """Same contract and bin arithmetic as the compiled kernel."""
    t = np.ascontiguousarray(times, dtype=np.float64)
    ch = np.ascontiguousarray(channels, dtype=np.uint8)
    n = t.size
    counts = np.zeros(n_bins, dtype=np.int64)
    if n < 2:
        return counts
    # generous candidate range; the exact dt <= window test below decides
    ends = np.searchsorted(t, t + window + 1e-9 * (np.abs(t) + window), side="right")
    n_partners = ends - np.arange(1, n + 1)
    csum = np.cumsum(n_partners)
    start = 0
    while start < n:
        done = csum[start - 1] if start else 0
        stop = int(np.searchsorted(csum, done + _CHUNK_PAIRS, side="right"))
        stop = min(max(stop, start + 1), n)
        reps = n_partners[start:stop]
        total = int(reps.sum())
        if total:
            idx_i = np.repeat(np.arange(start, stop), reps)
            offsets = np.repeat(np.cumsum(reps) - reps, reps)
            idx_j = idx_i + 1 + (np.arange(total) - offsets)
            dt = t[idx_j] - t[idx_i]
            keep = (dt <= window) & (ch[idx_j] != ch[idx_i])
            ii, jj = idx_i[keep], idx_j[keep]
            tau = np.where(ch[ii] == 0, t[jj] - t[ii], t[ii] - t[jj])
            k = np.floor((tau + window) / bin_width).astype(np.int64)
            np.clip(k, 0, n_bins - 1, out=k)
            counts += np.bincount(k, minlength=n_bins)
        start = stop
    return counts
