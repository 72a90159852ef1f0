"""Time the compiled and numpy min-k kernels on the same synthetic votes.

    python3 benchmarks/bench_kernels.py --samples 2000 --sides 16,64,112
"""
import argparse
import time

import numpy as np

from patchcert import kernels
from patchcert.geometry import PatchSpec, compute_delta, region_windows
from patchcert.io import RunConfig, gen_synthetic


def time_backend(name, data, side, repeat):
    starts, lengths = region_windows(data.scheme, PatchSpec(side))
    budget = np.full(lengths.shape, compute_delta(data.scheme, PatchSpec(side)), dtype=np.int64)
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = kernels.sample_minks(data.label_matrix, data.true_labels, data.num_labels,
                                   starts, lengths, budget, backend=name)
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--labels", type=int, default=1000)
    ap.add_argument("--sides", default="16,64,112")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = RunConfig(num_labels=args.labels)
    data = gen_synthetic("random", cfg, seed=args.seed, count=args.samples)
    names = sorted(kernels.BACKENDS)
    print(f"{args.samples} samples, {data.scheme.num_ablations} mutants, {args.labels} labels, "
          f"{kernels.num_threads()} threads")
    print(f"{'side':>5} " + " ".join(f"{n + ' (s)':>14}" for n in names) + f" {'speedup':>8}")
    for side in (int(s) for s in args.sides.split(",")):
        times, results = {}, {}
        for name in names:
            times[name], results[name] = time_backend(name, data, side, args.repeat)
        if len(results) == 2:
            a, b = results.values()
            assert (a[0] == b[0]).all() and (a[1] == b[1]).all(), "backends disagree"
        speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        print(f"{side:>5} " + " ".join(f"{times[n]:>14.3f}" for n in names) + f" {speed:>7.1f}x")


if __name__ == "__main__":
    main()
