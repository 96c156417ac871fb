"""Compare the numba and numpy versions of the integer Weyl-group kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--types B4,D5,A5]

Both versions are called directly, so the MOMENTGRAPH_DISABLE_JIT flag does
not matter here.  Every pair of results is checked for equality first.
"""

import argparse
import time

import numpy as np

from momentgraph import _kernels
from momentgraph.moment_graph import _closedness_data
from momentgraph.root_system import SimpleSubset, as_subset, build_root_system
from momentgraph.weyl import weyl_group


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def kernel_inputs(kind, rank):
    group = weyl_group(build_root_system(kind, rank))
    succ = group.mult[group.reflection].T.copy()
    succ[group.length[succ] <= group.length[:, None]] = -1
    order = np.argsort(-group.length, kind="stable")
    active = np.zeros(rank, dtype=np.bool_)
    active[: rank // 2 + 1] = True
    start = np.arange(group.size, dtype=np.int64)
    q = SimpleSubset.from_labels(rank, range(1, rank // 2 + 1))
    p = as_subset(rank, "")
    _, targets, stabs, counts = _closedness_data(group, q, p)
    npos = group.rs.num_positive
    return group, {
        "reduce_descents": ((start, group.desc_right, group.right, active), "reduce_descents"),
        "bruhat_closure": ((order, np.ascontiguousarray(succ)), "bruhat_closure"),
        "closedness_violation": ((targets, stabs, counts, group.perm, npos), "closedness_violation"),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--types", default="B4,A5,D5")
    args = parser.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy kernels are available")
        return
    print(f"{'type':<6}{'|W|':>7}  {'kernel':<22}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}")
    for spec in args.types.split(","):
        kind, rank = spec[0], int(spec[1:])
        group, cases = kernel_inputs(kind, rank)
        for name, (inputs, stem) in cases.items():
            slow = getattr(_kernels, f"{stem}_numpy")
            fast = getattr(_kernels, f"{stem}_jit")
            a, b = slow(*inputs), fast(*inputs)  # the first jit call compiles
            assert np.array_equal(np.asarray(a), np.asarray(b)), name
            t_np = best_of(lambda: slow(*inputs), args.repeat)
            t_jit = best_of(lambda: fast(*inputs), args.repeat)
            print(f"{spec:<6}{group.size:>7}  {name:<22}{t_np * 1e3:>10.2f}{t_jit * 1e3:>10.2f}{t_np / t_jit:>8.1f}x")


if __name__ == "__main__":
    main()
