"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is checked for agreement before timing. Numba compile time is
excluded by one warm-up call. The end-to-end rows run the same workload in a
subprocess with and without EHCOST_DISABLE_NUMBA so the dispatch layer is
exercised too.
"""

import argparse
import math
import os
import subprocess
import sys
import timeit

import numpy as np

from ehcost import kernels
from ehcost._accel import HAVE_NUMBA

E1 = math.e - 1.0


def greedy_case(rng, n=200, batch=4096):
    demand = E1 / rng.exponential(size=(batch, n))
    arrivals = rng.uniform(0.0, 1.0, n)
    return demand, arrivals


def product_case(rng, n=18, picks=6):
    p_inv = E1 / rng.exponential(size=n)
    arrivals = rng.uniform(0.0, 1.0, n)
    pools = np.arange(n, dtype=np.int64).reshape(1, n)
    sizes = np.array([n], dtype=np.int64)
    k = np.array([picks], dtype=np.int64)
    return p_inv, arrivals, pools, sizes, k, math.comb(n, picks)


def tableau_case(rng, rows=120, cols=400):
    tab = rng.standard_normal((rows, cols))
    tab[:, 0] += 5.0
    return tab


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench(repeat):
    rng = np.random.default_rng(0)
    rows = []

    demand, arrivals = greedy_case(rng)
    ref = kernels.greedy_renew_numpy(demand, arrivals, 0.5)
    t_np = best_of(lambda: kernels.greedy_renew_numpy(demand, arrivals, 0.5), repeat)
    t_nb = None
    if HAVE_NUMBA:
        def run_nb():
            for row in demand:
                kernels.greedy_renew_numba(row, arrivals, 0.5)
        assert np.array_equal(kernels.greedy_renew_numba(demand[0], arrivals, 0.5), ref[0])
        run_nb()
        t_nb = best_of(run_nb, repeat)
    rows.append(("greedy_renew 4096 x 200 (numba per row)", t_np, t_nb))

    p_inv, arrivals, pools, sizes, k, count = product_case(rng)
    out_np = np.empty(count)
    t_np = best_of(lambda: kernels.product_costs_numpy(p_inv, arrivals, 0.0, 1.0, 0.2, pools, sizes, k, out_np), repeat)
    t_nb = None
    if HAVE_NUMBA:
        out_nb = np.empty(count)
        kernels.product_costs_numba(p_inv, arrivals, 0.0, 1.0, 0.2, pools, sizes, k, out_nb)
        np.testing.assert_allclose(out_nb, out_np, rtol=1e-12, atol=1e-12)
        t_nb = best_of(lambda: kernels.product_costs_numba(p_inv, arrivals, 0.0, 1.0, 0.2, pools, sizes, k, out_nb), repeat)
    rows.append((f"product_costs C(18,6) = {count}", t_np, t_nb))

    base = tableau_case(rng)
    steps = [(i, 1 + (7 * i) % (base.shape[1] - 1)) for i in range(base.shape[0])]

    def pivots(fn):
        tab = base.copy()
        for r, q in steps:
            if abs(tab[r, q]) > 1e-9:
                fn(tab, r, q)
        return tab

    t_np = best_of(lambda: pivots(kernels.pivot_numpy), repeat)
    t_nb = None
    if HAVE_NUMBA:
        np.testing.assert_allclose(pivots(kernels.pivot_numba), pivots(kernels.pivot_numpy), rtol=1e-9, atol=1e-9)
        t_nb = best_of(lambda: pivots(kernels.pivot_numba), repeat)
    rows.append(("pivot 120 x 400, 120 steps", t_np, t_nb))
    return rows


WORKLOAD = (
    "import numpy as np, time\n"
    "from ehcost import Instance, lower_bound, solve_pruned_search\n"
    "rng = np.random.default_rng(1)\n"
    "insts = [Instance(1, 1, 1, 0.2, rng.exponential(size=n), rng.uniform(0, 1, n)) for n in (16,) * 20]\n"
    "solve_pruned_search(insts[0], 5); lower_bound(insts[0], 5)\n"
    "t = time.perf_counter()\n"
    "for inst in insts:\n"
    "    solve_pruned_search(inst, 5); lower_bound(inst, 5)\n"
    "print(time.perf_counter() - t)\n"
)


def end_to_end():
    times = {}
    for label, flag in (("numpy", "1"), ("numba", "")):
        if label == "numba" and not HAVE_NUMBA:
            continue
        env = dict(os.environ, EHCOST_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", WORKLOAD], env=env, check=True, capture_output=True, text=True)
        times[label] = float(out.stdout.strip())
    return ("pruned search + bound, 20 x N=16, M=5", times["numpy"], times.get("numba"))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--skip-end-to-end", action="store_true")
    args = parser.parse_args(argv)

    rows = bench(args.repeat)
    if not args.skip_end_to_end:
        rows.append(end_to_end())
    print(f"{'workload':42s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}")
    for name, t_np, t_nb in rows:
        if t_nb is None:
            print(f"{name:42s} {t_np:10.4f} {'n/a':>10s} {'n/a':>8s}")
        else:
            print(f"{name:42s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
