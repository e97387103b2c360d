"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from bernstein_orlicz import kernels


def cases():
    z = np.abs(np.random.default_rng(0).standard_normal(1_000_000))
    u = np.sort(np.random.default_rng(1).random((2000, 400)), axis=1)
    return {
        "uniform_block 2048x400": lambda be: be.uniform_block(20240601, 1, 0, 2048, 400),
        "psi_values 1e6": lambda be: be.psi_values(1.0, z),
        "psi_mean 1e6": lambda be: be.psi_mean(z, 1.5, 1.0),
        "ks_sup 2000x400": lambda be: be.ks_sup(u),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    if len(backends) == 1:
        print("compiled kernels not built; timing the fallback only")
    print("kernel\t" + "\t".join(be.BACKEND + "_ms" for be in backends) + ("\tspeedup" if len(backends) > 1 else ""))
    for name, fn in cases().items():
        times = [min(timeit.repeat(lambda: fn(be), number=1, repeat=args.repeat)) * 1e3 for be in backends]
        line = f"{name}\t" + "\t".join(f"{t:.2f}" for t in times)
        if len(times) > 1:
            line += f"\t{times[1] / times[0]:.1f}x"
        print(line)


if __name__ == "__main__":
    main()
