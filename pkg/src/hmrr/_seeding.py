"""Counter-based seed derivation.

Every random stream is ``SeedSequence(master_seed, spawn_key=(stream, counter))``.
Stream ids are fixed below; the counter is the block index for per-block
streams and 0 otherwise.  Results therefore depend on the master seed and
the block layout, never on how blocks are spread over threads.
"""

from __future__ import annotations

import os

import numpy as np

TELEGRAPH = 1
EMISSION = 2
ORACLE = 3


def rng_for(master_seed: int, stream: int, counter: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(master_seed) & (2**64 - 1), spawn_key=(stream, counter))
    return np.random.Generator(np.random.PCG64(ss))


def thread_count() -> int:
    """Worker threads allowed by ``HMRR_THREADS`` (default 1)."""
    raw = os.environ.get("HMRR_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"HMRR_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)
