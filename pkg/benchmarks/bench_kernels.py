"""Compare the numba and numpy paths of the hot kernels.

    python benchmarks/bench_kernels.py            # kernel micro-benchmarks
    python benchmarks/bench_kernels.py --solver   # also time a full solve per path

Kernel timings call both implementations in one process. The solver timing
runs each path in a subprocess with ``COMPDECON_DISABLE_NUMBA`` set or unset,
since the flag is read at import.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from compdecon import kernels

SOLVE_SNIPPET = """
import time
from dataclasses import replace
from compdecon import kernels, pipeline, solver
from compdecon.config import RunConfig
cfg = replace(RunConfig(), p={p}, max_iters={iters}, tol=1e-300, track_objective=False)
data = pipeline.make_phantom_data(cfg)
meas = pipeline.compress(cfg, data.rf)
prob = pipeline.build_problem(cfg, data.psf, meas)
solver.solve(prob, replace(cfg.solver_config(), max_iters=2))  # warm-up / JIT
t = time.perf_counter()
solver.solve(prob, cfg.solver_config())
print(kernels.fwht is kernels.fwht_numpy, time.perf_counter() - t)
"""


def best_of(func, repeat=5, number=None):
    timer = timeit.Timer(func)
    if number is None:
        number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def bench_kernels(sizes):
    if kernels.fwht_numba is None:
        print("numba unavailable (or disabled); only the numpy path can be timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'n':>9}{'numpy [ms]':>13}{'numba [ms]':>13}{'speedup':>9}")
    for n in sizes:
        x = rng.standard_normal(n)
        a = np.abs(rng.standard_normal(n)) * 3
        cases = [
            ("fwht", kernels.fwht_numpy, kernels.fwht_numba, (x,)),
            ("lp_shrink p=1.5", kernels.lp_shrink_numpy, kernels.lp_shrink_numba, (a, 0.7, 1.5)),
            ("lp_shrink p=1.1", kernels.lp_shrink_numpy, kernels.lp_shrink_numba, (a, 0.7, 1.1)),
        ]
        for name, numpy_fn, numba_fn, args in cases:
            t_np = best_of(lambda: numpy_fn(*args)) * 1e3
            if numba_fn is None:
                print(f"{name:<22}{n:>9}{t_np:>13.3f}{'-':>13}{'-':>9}")
                continue
            numba_fn(*args)  # compile outside the timed region
            if not np.allclose(numba_fn(*args), numpy_fn(*args), rtol=1e-10, atol=1e-12):
                raise AssertionError(f"{name}: paths disagree at n={n}")
            t_nb = best_of(lambda: numba_fn(*args)) * 1e3
            print(f"{name:<22}{n:>9}{t_np:>13.3f}{t_nb:>13.3f}{t_np / t_nb:>8.1f}x")


def bench_solver(p, iters):
    print(f"\nfull solve, 128x128 SRM, p={p}, {iters} iterations")
    for label, disable in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, COMPDECON_DISABLE_NUMBA=disable)
        out = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET.format(p=p, iters=iters)],
                             env=env, capture_output=True, text=True, check=True).stdout.split()
        print(f"  {label:<6} path: {float(out[1]):.2f} s (numpy fallback active: {out[0]})")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[1024, 16384, 262144])
    parser.add_argument("--solver", action="store_true", help="also time full solves")
    parser.add_argument("--p", type=float, default=1.5)
    parser.add_argument("--iters", type=int, default=200)
    args = parser.parse_args(argv)
    bench_kernels(args.sizes)
    if args.solver:
        bench_solver(args.p, args.iters)


if __name__ == "__main__":
    main()
