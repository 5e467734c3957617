"""Time the compiled and numpy correlation kernels on a simulated stream.

Usage: python3 benchmarks/bench_kernels.py [--duration-s 0.25] [--repeat 3]
"""

import argparse
import time

import numpy as np

from hmrr._kernels import _pycore
from hmrr.photostat import BlinkModel, SimConfig, simulate_stream


def _best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--duration-s", type=float, default=0.25)
    p.add_argument("--window-ps", type=float, default=262500.0)
    p.add_argument("--bin-width-ps", type=float, default=100.0)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    cfg = SimConfig(two_photon_prob=0.0026, duration_s=args.duration_s)
    stream = simulate_stream(cfg, BlinkModel())
    n_bins = 2 * int(round(args.window_ps / args.bin_width_ps))
    print(f"{len(stream)} events, window {args.window_ps:g} ps, {n_bins} bins")

    backends = {"python": _pycore.correlate_sorted}
    try:
        from hmrr._kernels import _ccore
    except ImportError:
        print("compiled kernel not built; timing the numpy kernel only")
    else:
        backends["cython"] = _ccore.correlate_sorted

    results = {}
    for name, fn in backends.items():
        secs, counts = _best_of(
            lambda: fn(stream.times, stream.channels, args.window_ps, args.bin_width_ps, n_bins),
            args.repeat)
        results[name] = (secs, np.asarray(counts))
        print(f"{name:>7}: {secs:8.4f} s  ({len(stream) / secs / 1e6:6.2f} M events/s)")
    if len(results) == 2:
        same = np.array_equal(results["python"][1], results["cython"][1])
        print(f"speed-up {results['python'][0] / results['cython'][0]:.1f}x, identical counts: {same}")


if __name__ == "__main__":
    main()
