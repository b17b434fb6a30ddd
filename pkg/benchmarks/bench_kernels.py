"""Time the compiled kernels against the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat N] [--number N]

Prints one line per kernel, size and backend with the best time per call
and the speedup of the compiled backend over the fallback.
"""
import argparse
import timeit

import numpy as np

from qmeter import kernels
from qmeter.wigner import spectral_measure


def wigner_case(d, rng):
    amp = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))[0]
    rho = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    measure = spectral_measure(np.sort(rng.normal(size=d)))
    return amp, rho, measure.index, measure.midpoints.size


def sweep_case(n, rng):
    return [np.linspace(0, 2 * np.pi, n)] + [float(x) for x in rng.uniform(-1, 1, 8)]


def bench(fn, args, backend, repeat, number):
    times = timeit.repeat(lambda: fn(*args, backend=backend), repeat=repeat, number=number)
    return min(times) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--number", type=int, default=200)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; timing the fallback only")
    cases = [("wigner_accumulate", kernels.wigner_accumulate, f"d={d}", wigner_case(d, rng)) for d in (2, 4, 8, 16)]
    cases += [("qq_closed_form", kernels.qq_closed_form, f"n={n}", sweep_case(n, rng)) for n in (101, 10_001)]
    print(f"{'kernel':<18} {'size':<8} " + " ".join(f"{b:>12}" for b in backends) + "   speedup")
    for name, fn, size, case in cases:
        timings = {b: bench(fn, case, b, args.repeat, args.number) for b in backends}
        cells = " ".join(f"{timings[b] * 1e6:10.2f}us" for b in backends)
        speedup = f"{timings['python'] / timings['cython']:8.1f}x" if "cython" in timings else ""
        print(f"{name:<18} {size:<8} {cells} {speedup}")


if __name__ == "__main__":
    main()
