"""Compare the compiled kernels with the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one row per kernel with the best wall time of each backend and the
speed-up.  Outputs of the two backends are checked for equality first.
"""

import argparse
import time

import numpy as np

from gibbstest import kernels
from gibbstest.model import log_likelihood_ratio, markov_system
from gibbstest.sim import _sampling_tables, stream_base


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases():
    s0 = markov_system([[1 / 4, 1 / 2], [3 / 4, 1 / 2]])
    s1 = markov_system([[2 / 3, 1 / 5], [1 / 3, 4 / 5]])
    v = np.ascontiguousarray(log_likelihood_ratio(s0, s1).values)
    cdf0, cdft = _sampling_tables(s0)
    cps = np.array([25, 50, 100], dtype=np.int_)
    base = stream_base(42, 0)
    m = np.ascontiguousarray(np.exp(np.random.default_rng(0).uniform(-1, 1, (6, 6))))

    def simulate(be):
        out = np.empty((20_000, cps.size))
        be.simulate_sums(v, cdf0, cdft, cps, base, 0, out)
        return out

    return {
        "perron 6x6": lambda be: be.perron(m, 1e-13, 10 ** 6),
        "enumerate n=16": lambda be: be.enumerate_words(s0.stationary, s0.trans, s1.stationary, s1.trans, v, 16),
        "simulate 2e4 x n=100": simulate,
        "walk 1e5": lambda be: be.walk(cdf0, cdft, 100_000, base, 0),
    }


def same(a, b):
    a, b = (a, b) if isinstance(a, tuple) else ((a,), (b,))
    return all(np.allclose(x, y, rtol=1e-12, atol=0) for x, y in zip(a, b))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if kernels.compiled_backend is None:
        raise SystemExit("compiled extension not available; build it with pip install -e . --no-build-isolation")
    print(f"{'kernel':<22}{'compiled':>12}{'python':>12}{'speed-up':>10}")
    for name, fn in cases().items():
        assert same(fn(kernels.compiled_backend), fn(kernels.python_backend)), name
        tc = best_of(lambda: fn(kernels.compiled_backend), args.repeat)
        tp = best_of(lambda: fn(kernels.python_backend), args.repeat)
        print(f"{name:<22}{tc * 1e3:>10.2f}ms{tp * 1e3:>10.2f}ms{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
