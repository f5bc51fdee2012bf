#!/usr/bin/env python3
"""Time each hot kernel on its numba and numpy paths.

    python benchmarks/bench_kernels.py [--size 200000] [--repeat 5] [--csv out.csv]

The first numba call (compilation) is excluded; both paths see the same inputs
and their outputs are checked against each other before timing.
"""
import argparse
import csv
import math
import sys
import timeit

import numpy as np

from wpa import _kernels


def cases(size):
    rng = np.random.default_rng(0)
    z = rng.uniform(-4, 6, size) + 1j * rng.uniform(-4, 4, size)
    circle = np.exp(2j * math.pi * rng.uniform(size=size))
    coeffs = rng.standard_normal(48) + 1j * rng.standard_normal(48)
    poly = 1.5 * np.exp(-2j * math.pi * np.arange(256) / 256) + 3
    far = z[np.abs(z - 3) > 1.7][: size // 50]
    c, s = math.cos(math.pi / 2), math.sin(math.pi / 4)
    return [
        ("poisson", lambda k: k.poisson(0.3 + 0.2j, circle)),
        ("pv_density", lambda k: k.pv_density(circle, 0j, 0.4 - 0.1j, 0.7)),
        ("horner", lambda k: k.horner(coeffs, 0.9 * circle)),
        ("sublevel", lambda k: k.sublevel(z, 1, 2, 0.03)),
        ("arc_psi", lambda k: k.arc_psi(z, c, s)),
        ("joukowski_inverse", lambda k: k.joukowski_inverse(z)),
        ("polyline_distance", lambda k: k.polyline_distance(z[: size // 10], poly)),
        ("point_in_polygon", lambda k: k.point_in_polygon(z[: size // 10], poly)),
        ("cauchy_polyline", lambda k: k.cauchy_polyline(far, poly, np.exp(1j * np.angle(poly - 3)))),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--csv", help="also write the table here")
    args = ap.parse_args(argv)

    nb, npk = _kernels.numba_kernels, _kernels.numpy_kernels
    if nb is None:
        print("numba is not installed; nothing to compare", file=sys.stderr)
        return 1

    rows = []
    print(f"{'kernel':<20}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, fn in cases(args.size):
        a, b = fn(npk), fn(nb)  # also compiles the numba path
        if not np.allclose(a, b, rtol=1e-9, atol=1e-12, equal_nan=True):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        t_np = min(timeit.repeat(lambda: fn(npk), number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(lambda: fn(nb), number=1, repeat=args.repeat)) * 1e3
        rows.append((name, t_np, t_nb, t_np / t_nb))
        print(f"{name:<20}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>9.2f}x")

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kernel", "numpy_ms", "numba_ms", "speedup"])
            w.writerows((n, f"{a:.4f}", f"{b:.4f}", f"{c:.3f}") for n, a, b, c in rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
