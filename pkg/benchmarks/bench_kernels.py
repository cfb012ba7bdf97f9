"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--queries 100000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from qrlin import _kernels_py


def _cases(n, rng):
    t = np.linspace(-40, -0.5, 800)
    y, dy = 1.1 * t + 0.1 * np.exp(t), 1.1 + 0.1 * np.exp(t)
    tq = rng.uniform(-45, 0, n)
    wq = rng.uniform(y[0] - 5, y[-1], n)
    a = 0.05 / np.arange(1, 17) ** 2
    b = 0.03 / np.arange(1, 17) ** 2
    yq = rng.uniform(-np.pi, np.pi, n)
    return {
        "hermite_eval": lambda m: m.hermite_eval(t[0], t[1] - t[0], y, dy, tq),
        "hermite_solve": lambda m: m.hermite_solve(t[0], t[1] - t[0], y, dy, wq),
        "fourier_eval": lambda m: m.fourier_eval(a, b, yq),
        "fourier_solve": lambda m: m.fourier_solve(2.0, a, b, 2 * yq),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--queries", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    try:
        from qrlin import _kernels as compiled
    except ImportError:
        compiled = None
        print("compiled extension not built; timing the numpy fallback only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<15}{'python [ms]':>14}{'compiled [ms]':>16}{'speedup':>10}")
    for name, call in _cases(args.queries, rng).items():
        py = min(timeit.repeat(lambda: call(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if compiled is None:
            print(f"{name:<15}{py:>14.2f}{'-':>16}{'-':>10}")
            continue
        cy = min(timeit.repeat(lambda: call(compiled), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<15}{py:>14.2f}{cy:>16.2f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
