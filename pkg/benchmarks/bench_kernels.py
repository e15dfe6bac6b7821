"""Time the profile-scan kernels on both backends.

    python3 benchmarks/bench_kernels.py [--n 4] [--repeat 3]

Uses n=4 serial dictatorship tables (331776 profiles), where every scan runs
to completion because no violation exists, plus a table with a late
violation. Compilation is excluded: each numba kernel is called once first.
"""
import argparse
import time

import numpy as np

from hallot._kernels import BACKENDS
from hallot.core import get_domain
from hallot.mechanisms import materialize, sd_mechanism


def scans(dom, t):
    return {
        "sp": ("sp_scan", (dom.profiles, t.alloc, dom.rank, dom.strides)),
        "nb": ("nb_scan", (dom.profiles, t.entries, t.alloc, dom.strides)),
        "pairwise": ("pairwise_scan", (dom.profiles, t.alloc, dom.rank)),
        "iplb": ("iplb_scan", (dom.profiles, t.alloc, dom.rank, dom.unanimous_step)),
        "pareto": ("pareto_scan", (dom.profiles, t.alloc, dom.rank, dom.perms)),
    }


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn(*args, False)
        times.append(time.perf_counter() - start)
    return min(times), tuple(int(v) for v in out)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=4)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    dom = get_domain(args.n)
    t = materialize(sd_mechanism(tuple(range(args.n))), args.n)
    print(f"n={args.n}, {dom.size} profiles, backends: {', '.join(BACKENDS)}")
    print(f"{'scan':<10}" + "".join(f"{b:>12}" for b in BACKENDS) + f"{'speedup':>10}")
    for name, (kernel, kargs) in scans(dom, t).items():
        row, results = [], []
        for backend in BACKENDS.values():
            fn = getattr(backend, kernel)
            fn(*kargs, False)  # warm up (numba compile or cache load)
            secs, out = best_of(fn, kargs, args.repeat)
            row.append(secs)
            results.append(out)
        assert all(r == results[0] for r in results), f"{name}: backends disagree"
        speed = f"{row[0] / row[-1]:.1f}x" if len(row) > 1 else "-"
        print(f"{name:<10}" + "".join(f"{s * 1000:>10.1f}ms" for s in row) + f"{speed:>10}")


if __name__ == "__main__":
    np.seterr(all="raise")
    main()
