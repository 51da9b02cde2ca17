"""Time the compiled and pure-Python kernels on the workloads the package runs.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--steps 2000]

The Jacobi rows use the Laplacian of a 5-regular graph, as spectral_summary
does; the RK4 rows use the 150-agent closed loop of the paper-d5 preset.
"""
import argparse
import statistics
import time

import numpy as np

from lrsync import _pykernels
from lrsync.graphs import gen_random_regular, laplacian
from lrsync.protocol import closed_loop_matrix, make_protocol
from lrsync.scenario import load_scenario

try:
    from lrsync import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times), statistics.median(times)


def workloads(steps):
    for n in (50, 150):
        L = laplacian(gen_random_regular(n, 5, 0))
        yield f"jacobi n={n}", lambda mod, L=L: mod.jacobi_eigh(L, 1e-12, 100)
    sc = load_scenario("paper-d5")
    dyn = sc.agent()
    cfg = make_protocol(dyn, **sc.protocol)
    M = closed_loop_matrix(dyn, cfg, sc.build_graph())
    x0 = np.random.default_rng(0).uniform(0, 5, M.shape[0])
    yield f"rk4 300x300 {steps} steps", lambda mod: mod.rk4_linear(M, x0, 1e-3, steps, 100)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--steps", type=int, default=2000)
    args = parser.parse_args(argv)

    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.append(("cython", _ckernels))
    else:
        print("compiled extension not built; timing the Python kernels only")

    print(f"{'workload':<28}" + "".join(f"{name + ' best [s]':>18}" for name, _ in backends) + f"{'speedup':>10}")
    for label, fn in workloads(args.steps):
        best = [best_of(lambda: fn(mod), args.repeat)[0] for _, mod in backends]
        row = f"{label:<28}" + "".join(f"{t:>18.4f}" for t in best)
        row += f"{best[0] / best[1]:>10.1f}" if len(best) == 2 else f"{'-':>10}"
        print(row)


if __name__ == "__main__":
    main()
