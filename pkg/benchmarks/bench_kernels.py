"""Compare the numba and numpy chain kernels.

Usage::

    python benchmarks/bench_kernels.py [--atoms 202 2002 20002] [--repeat 200]
    python benchmarks/bench_kernels.py --sweep   # also time a full sweep per backend

The kernel table calls both implementations directly.  The sweep timing
runs the CLI in a subprocess with and without ``CGTST_DISABLE_NUMBA=1``,
since the backend is fixed at import time.
"""

import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from cgtst import _kernels
from cgtst.chain import ChainSystem

KERNELS = ("energy", "gradient", "hessian_bands")


def _config(n_atoms, seed=0):
    system = ChainSystem.stretched(1.035, n_atoms)
    rng = np.random.default_rng(seed)
    q = system.positions(system.uniform_config())
    q[1:-1] += rng.uniform(-0.1, 0.1, n_atoms - 2)
    return system, q


def bench_kernels(sizes, repeat):
    print(f"{'atoms':>7s} {'kernel':>14s} {'numba us':>10s} {'numpy us':>10s} {'speedup':>8s}")
    for n in sizes:
        system, q = _config(n)
        args = (q, system.center_left, *system.params.as_tuple())
        for name in KERNELS:
            f_nb = getattr(_kernels, f"{name}_numba")
            f_np = getattr(_kernels, f"{name}_numpy")
            f_nb(*args)  # compile outside the timed region
            t_nb = min(timeit.repeat(lambda: f_nb(*args), number=repeat, repeat=5)) / repeat
            t_np = min(timeit.repeat(lambda: f_np(*args), number=repeat, repeat=5)) / repeat
            print(f"{n:7d} {name:>14s} {t_nb * 1e6:10.2f} {t_np * 1e6:10.2f} {t_np / t_nb:8.1f}")


def bench_sweep():
    cmd = [sys.executable, "-m", "cgtst", "--out", os.devnull]
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, CGTST_DISABLE_NUMBA=flag)
        t0 = time.perf_counter()
        subprocess.run(cmd, env=env, check=True, capture_output=True)
        print(f"default sweep, {label:5s} kernels: {time.perf_counter() - t0:6.2f} s")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--atoms", type=int, nargs="+", default=[202, 2002, 20002])
    p.add_argument("--repeat", type=int, default=200)
    p.add_argument("--sweep", action="store_true")
    args = p.parse_args(argv)
    if not _kernels.NUMBA_AVAILABLE:
        sys.exit("numba is not installed; nothing to compare")
    bench_kernels(args.atoms, args.repeat)
    if args.sweep:
        bench_sweep()


if __name__ == "__main__":
    main()
