"""Timing comparison of the compiled and pure-Python series backends.

Runs the three hot kernels (gegenbauer_batch, zonal_series, zonal_series_dt)
on realistic workloads -- truncated Poisson-profile coefficient vectors whose
length grows as the scale shrinks -- and prints a table of median runtimes.

Usage:  python3 benchmarks/bench_backends.py [--repeats 9] [--angles 2048]
"""

import argparse
import time

import numpy as np

from sphframes import _purecore
from sphframes.families import _truncated_coefficients, make_family
from sphframes.special import Dimension

try:
    from sphframes import _core
except ImportError:
    _core = None


def median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=9)
    ap.add_argument("--angles", type=int, default=2048)
    args = ap.parse_args()

    dim = Dimension(2)
    lam = dim.lam
    fam = make_family("poisson", dim, m=2)
    t = np.ascontiguousarray(np.cos(np.linspace(0.0, np.pi, args.angles)))

    backends = [("pure", _purecore)]
    if _core is not None:
        backends.insert(0, ("compiled", _core))
    else:
        print("note: compiled extension not importable; timing the fallback only")

    cases = []
    for a in (1.0, 0.2, 0.05):
        coef, L = _truncated_coefficients(fam, a, 1e-12)
        cases.append((f"zonal_series    a={a:<4} L={L:>5}", "zonal_series", (coef, lam, t)))
        cases.append((f"zonal_series_dt a={a:<4} L={L:>5}", "zonal_series_dt", (coef, lam, t)))
    cases.append((f"gegenbauer_batch l=64  x{args.angles}", "gegenbauer_batch", (64, lam, t)))

    width = max(len(label) for label, _, _ in cases)
    header = f"{'case':<{width}}" + "".join(f"  {name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))

    for label, fname, fargs in cases:
        row = f"{label:<{width}}"
        measured = []
        for _, mod in backends:
            fn = getattr(mod, fname)
            fn(*fargs)  # warm up
            dt = median_time(lambda: fn(*fargs), args.repeats)
            measured.append(dt)
            row += f"  {dt * 1e3:>10.3f}ms"
        if len(measured) == 2 and measured[0] > 0:
            row += f"  {measured[1] / measured[0]:>7.1f}x"
        print(row)

    for _, mod in backends[1:]:
        ref = backends[0][1]
        coef, _ = _truncated_coefficients(fam, 0.2, 1e-12)
        a = np.asarray(ref.zonal_series(coef, lam, t))
        b = np.asarray(mod.zonal_series(coef, lam, t))
        worst = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
        print(f"\nbackend agreement (zonal_series, a=0.2): max rel diff {worst:.3e}")


if __name__ == "__main__":
    main()
