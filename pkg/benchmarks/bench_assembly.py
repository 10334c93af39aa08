"""Operator assembly timings: numba kernels against the vectorized numpy path.

Usage::

    python3 benchmarks/bench_assembly.py [--subdivisions 1 2 3] [--repeat 3]

The numba path is timed after one warm-up call so compilation is excluded.
Both paths must agree to 1e-12 relative, otherwise the script exits with 1.
"""
import argparse
import sys
import time

import numpy as np

from nlplasmon import _accel
from nlplasmon.bem import build_icosphere
from nlplasmon.bem.kernels import helmholtz_matrices, near_field_levels, static_matrices


def _best(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def _rel(a, b):
    return max(np.linalg.norm(x - y) / np.linalg.norm(y) for x, y in zip(a, b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--subdivisions", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--k", type=complex, default=15.7j, help="wavenumber for the Helmholtz parts")
    args = ap.parse_args(argv)

    if not _accel.NUMBA_ENABLED:
        print("numba disabled (NLPLASMON_NO_NUMBA set or not installed); nothing to compare")
        return 0

    mesh0 = build_icosphere(0)
    static_matrices(mesh0, use_numba=True)
    helmholtz_matrices(mesh0, args.k, derivative=True, use_numba=True)

    print(f"{'n':>6} {'part':>10} {'numba s':>10} {'numpy s':>10} {'speedup':>8} {'rel diff':>10}")
    ok = True
    for sub in args.subdivisions:
        mesh = build_icosphere(sub)
        lv = near_field_levels(mesh)
        cases = {
            "static": lambda u: static_matrices(mesh, lv, use_numba=u),
            "helmholtz": lambda u: helmholtz_matrices(mesh, args.k, lv, derivative=True, use_numba=u),
        }
        for name, fn in cases.items():
            t_nb, a = _best(lambda: fn(True), args.repeat)
            t_np, b = _best(lambda: fn(False), args.repeat)
            diff = _rel(a, b)
            ok &= diff < 1e-12
            print(f"{mesh.n_triangles:>6} {name:>10} {t_nb:>10.3f} {t_np:>10.3f} {t_np / t_nb:>8.1f} {diff:>10.2e}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
