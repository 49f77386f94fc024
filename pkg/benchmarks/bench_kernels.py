"""Compare the compiled kernels with the numpy fallback.

Run ``python benchmarks/bench_kernels.py``. Both backends are imported
directly, so the result does not depend on ``CHIPTRANS_PURE_PYTHON``.
"""
import argparse
import timeit

import numpy as np

from chiptrans import _pykernels

try:
    from chiptrans import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _match_case(n_z0, n_theta):
    rng = np.random.default_rng(0)
    abcd = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    z0s = np.linspace(20.0, 120.0, n_z0)
    thetas = np.deg2rad(np.linspace(0.0, 180.0, n_theta))
    return (abcd, 50.0, 50.0, 1, z0s, thetas)


def _unwrap_case(n):
    f = np.linspace(1e9, 300e9, n)
    lag = 2 * np.pi * f * 40e-12 + 1e-3 * np.sin(f / 7e9)
    wrapped = np.angle(np.exp(-1j * lag))
    return (f, -wrapped)


def bench(name, args, repeat):
    rows = []
    for label, mod in (("numpy", _pykernels), ("cython", _ckernels)):
        if mod is None:
            rows.append((label, float("nan")))
            continue
        fn = getattr(mod, name)
        t = min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))
        rows.append((label, t))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ns = ap.parse_args(argv)
    cases = [
        ("series_match_search", "101 z0 x 181 theta", _match_case(101, 181)),
        ("series_match_search", "1001 z0 x 1801 theta", _match_case(1001, 1801)),
        ("unwrap_phase", "1000 points", _unwrap_case(1000)),
        ("unwrap_phase", "100000 points", _unwrap_case(100_000)),
    ]
    print(f"{'kernel':<22}{'size':<24}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}")
    for name, size, args in cases:
        (_, tp), (_, tc) = bench(name, args, ns.repeat)
        print(f"{name:<22}{size:<24}{tp * 1e3:12.3f}{tc * 1e3:13.3f}{tp / tc:9.1f}")


if __name__ == "__main__":
    main()
