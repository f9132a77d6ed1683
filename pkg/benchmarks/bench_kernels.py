"""Compiled vs numpy kernel timings.

    python benchmarks/bench_kernels.py [--sizes 10 14 18 20] [--repeat 5]

Prints the best-of-``repeat`` time per call for each kernel and backend and
the speedup of the compiled one.
"""
import argparse
import importlib
import timeit

import numpy as np

from qphase import _pykernels
from qphase.statevec import HADAMARD

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)


def cases(n):
    mid = n // 2
    return {
        "apply_1q": lambda k, a: k.apply_1q(a, n, mid, HADAMARD),
        "apply_2q": lambda k, a: k.apply_2q(a, n, 0, n - 1, CNOT),
        "diffuse": lambda k, a: k.diffuse(a),
        "apply_phases": lambda k, a, th=np.linspace(0, 1, 1 << n): k.apply_phases(a, th),
    }


def best_time(fn, backend, amps, repeat):
    number = max(1, 2**18 // amps.size)
    return min(timeit.repeat(lambda: fn(backend, amps), number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[10, 12, 14, 16, 18, 20])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    try:
        compiled = importlib.import_module("qphase._ckernels")
    except ImportError:
        raise SystemExit("compiled kernels not built; run `python setup.py build_ext --inplace` first")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<13}{'n':>3}{'numpy (us)':>14}{'cython (us)':>14}{'speedup':>10}")
    for n in args.sizes:
        amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
        amps /= np.linalg.norm(amps)
        for name, fn in cases(n).items():
            t_py = best_time(fn, _pykernels, amps.copy(), args.repeat)
            t_c = best_time(fn, compiled, amps.copy(), args.repeat)
            print(f"{name:<13}{n:>3}{t_py * 1e6:>14.1f}{t_c * 1e6:>14.1f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
