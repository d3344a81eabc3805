"""Compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--quick]

Each kernel runs on identical inputs under both backends; the table shows the
best of three wall times and the speed-up.  Outputs are compared as well.
"""

from __future__ import annotations

import argparse
import time
from fractions import Fraction

import numpy as np

from biaccess import _fallback, kernels
from biaccess.plane import FIXTURES, _targets, start_radius
from biaccess.symbolic import sample_numerators, sampling_modulus


def best_of(fn, repeat=3):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(quick: bool):
    n = 2000 if quick else 10000
    depth = 40
    m = sampling_modulus(depth)
    ks = sample_numerators(n, m, 1)
    ks64 = np.asarray(ks, dtype=np.int64)
    comp = kernels._compiled
    for p, q in ((1, 3), (1, 7)):
        yield (
            f"biaccess_batch theta={p}/{q} n={n}",
            lambda p=p, q=q: comp.biaccess_batch(ks64, m, p, q, depth),
            lambda p=p, q=q: _fallback.biaccess_batch(ks, m, p, q, depth),
        )
    yield (
        f"spine_batch theta=3/7 n={n}",
        lambda: comp.spine_batch(ks64, m, 3, 7, depth),
        lambda: _fallback.spine_batch(ks, m, 3, 7, depth),
    )

    c = FIXTURES["rabbit"].c
    pots = [np.log(start_radius(c)) / 2 ** (k / 8) for k in range(1, 8 * 30)]
    tg = _targets(Fraction(3, 11), pots)
    z0 = start_radius(c) * np.exp(2j * np.pi * 3 / 11)
    cols = [np.ascontiguousarray([t[i] for t in tg], dtype=dt) for i, dt in ((0, np.int64), (1, float), (2, float))]
    yield (
        f"ray_newton rabbit {len(tg)} sub-levels",
        lambda: comp.ray_newton(c, z0, *cols, 60)[0],
        lambda: _fallback.ray_newton(c, z0, tg)[0],
    )

    w = 120 if quick else 300
    args = (-1 + 0j, -2.0, 2.0, -1.5, 1.5, w, w, 200)
    yield (f"escape_raster {w}x{w}", lambda: comp.escape_raster(*args), lambda: _fallback.escape_raster(*args))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args(argv)
    if kernels._compiled is None:
        print("compiled extension not built; nothing to compare")
        return 1
    print(f"{'kernel':<38} {'cython s':>10} {'python s':>10} {'speed-up':>9}  same")
    for name, fast, slow in cases(args.quick):
        tf, a = best_of(fast)
        ts, b = best_of(slow, repeat=1 if not args.quick else 3)
        same = np.allclose(np.asarray(a), np.asarray(b))
        print(f"{name:<38} {tf:>10.4f} {ts:>10.4f} {ts / tf:>8.1f}x  {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
