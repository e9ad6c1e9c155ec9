"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--n 40] [--length 150] [--repeats 5]

Prints one row per kernel with the best-of-N time for each backend and the
speedup of the compiled one.
"""

import argparse
import timeit

import numpy as np

from tschief import _kernels
from tschief.dictionary import BossParams, fit_transform
from tschief.distances import Measure, derivative, distance_matrix
from tschief.spectral import Interval, transform_rows

MEASURES = [
    Measure("euclidean"), Measure("dtw"), Measure("dtw_window", window=15),
    Measure("ddtw"), Measure("wdtw", g=0.1), Measure("lcss", window=15, epsilon=0.2),
    Measure("erp", window=15, gap_value=0.1), Measure("msm", cost=0.5),
    Measure("twe", nu=0.001, lam=0.05),
]


def cases(n, length, rng):
    A = rng.normal(size=(n, length))
    E = rng.normal(size=(3, length))
    out = []
    for m in MEASURES:
        out.append((f"distance {m.kind}",
                    lambda m=m: distance_matrix(m, A, E)))
    out.append(("distance dtw early-abandon",
                lambda: distance_matrix(Measure("dtw"), A, E, early_abandon=True)))
    params = BossParams(min(40, length), 8, True)
    out.append(("boss fit+histograms", lambda: fit_transform(A, params)))
    iv = Interval(0, length)
    for kind in ("acf", "pacf", "ar"):
        out.append((f"interval {kind}", lambda kind=kind: transform_rows(A, iv, kind)))
    out.append(("derivative", lambda: derivative(A)))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=40, help="series per batch")
    ap.add_argument("--length", type=int, default=150)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    backends = _kernels.available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; only the python backend is available")
    rng = np.random.default_rng(0)
    work = cases(args.n, args.length, rng)
    prev = _kernels.BACKEND
    timings = {}
    try:
        for b in backends:
            _kernels.set_backend(b)
            for name, fn in work:
                fn()
                timings[name, b] = min(timeit.repeat(fn, number=1, repeat=args.repeats))
    finally:
        _kernels.set_backend(prev)

    print(f"{'kernel':<28}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, _ in work:
        row = f"{name:<28}" + "".join(f"{timings[name, b] * 1e3:>10.2f}ms" for b in backends)
        if len(backends) == 2:
            row += f"{timings[name, 'python'] / timings[name, 'compiled']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
