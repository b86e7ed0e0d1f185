"""Time the Monte Carlo kernels with numba and with the numpy fallback.

    python3 benchmarks/bench_mc.py [--sizes 8,16,32] [--sweeps 2000]

Both paths run the same seeded chain; the script checks that their
observable series are identical before reporting timings.
"""
import argparse
import time

import numpy as np

from isingspinor import _mc_kernels as kernels
from isingspinor.lattice import Rectangle, discretize, nearest_horizontal_midpoint
from isingspinor.mc import MCParams, observable_sites, sample_chain


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="8,16,32")
    ap.add_argument("--sweeps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    print(f"{'algorithm':<12} {'n':>4} {'sites':>6} {'numba s':>9} {'numpy s':>9} {'speedup':>8}")
    for alg in ("cluster", "single-flip"):
        for n in (int(s) for s in args.sizes.split(",")):
            dom = discretize(Rectangle(0, 0, 1, 1), 1 / (n + 1))
            a = nearest_horizontal_midpoint(dom, 0.5 + 0.5j)
            system, oi, oj = observable_sites(dom, a, "plus")
            params = MCParams(burn_in=0, sweeps=args.sweeps, seed=1, algorithm=alg)
            # compile outside the timed region
            sample_chain(system, oi, oj, MCParams(burn_in=0, sweeps=32, algorithm=alg), use_numba=True)
            t_nb, s_nb = timed(lambda: sample_chain(system, oi, oj, params, use_numba=True), args.repeat)
            t_np, s_np = timed(lambda: sample_chain(system, oi, oj, params, use_numba=False), args.repeat)
            if not np.array_equal(s_nb, s_np):
                raise SystemExit(f"{alg} n={n}: numba and numpy chains differ")
            print(f"{alg:<12} {n:>4} {system.n:>6} {t_nb:>9.3f} {t_np:>9.3f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
