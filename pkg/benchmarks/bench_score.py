"""Compare the numba and numpy scoring kernels.

    python benchmarks/bench_score.py [--sizes 1000 4000 16000] [--repeat 3]

Both backends run on the same bucket index, weights and prior; the script
checks they agree before timing.
"""

import argparse
import time

import numpy as np

from netspam import kernels
from netspam.classify import PriorVector, compute_weights, score_all
from netspam.hin import BucketIndex
from netspam.model import ALL_FEATURES


def make_index(n, seed=0):
    rng = np.random.default_rng(seed)
    tail = np.geomspace(1, 0.05, 19)
    probs = np.r_[0.55, 0.45 * tail / tail.sum()]
    ids = [f"r{i:06d}" for i in range(n)]
    b = BucketIndex.from_levels(ids, ALL_FEATURES, rng.choice(20, size=(n, 8), p=probs), 20)
    y = PriorVector(tuple(ids), rng.random(n), "unsup", np.zeros(n, dtype=bool))
    return b, y


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 4000, 16000])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'n':>7} {'mean nbrs':>10} " + " ".join(f"{b + ' s':>10}" for b in backends) + "   speedup")
    for n in args.sizes:
        b, y = make_index(n)
        w = compute_weights(b, y)
        results = {}
        for be in backends:
            results[be] = score_all(b, w, y, backend=be).pr  # includes numba compile on first call
        if len(backends) == 2:
            assert np.max(np.abs(results["numba"] - results["numpy"])) <= 1e-12
        times = {be: best_of(lambda be=be: score_all(b, w, y, backend=be), args.repeat) for be in backends}
        nbrs = float(np.mean(kernels.neighbor_counts(b.levels, b.order, b.offsets)))
        speed = f"{times['numpy'] / times['numba']:8.1f}x" if len(backends) == 2 else ""
        print(f"{n:>7} {nbrs:>10.0f} " + " ".join(f"{times[be]:>10.4f}" for be in backends) + f"  {speed}")


if __name__ == "__main__":
    main()
