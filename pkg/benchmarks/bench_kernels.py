"""Compare the compiled and numpy kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--n 2000] [--repeat 200]

Times one potential evaluation, one gradient, a 25-step leapfrog
trajectory and the GARCH filter for each available backend, and checks
that both backends agree on the results.
"""
import argparse
import timeit

import numpy as np

from svhmc.kernels import get_backend


def make_inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    h = rng.normal(-7.9, 0.9, n)
    y = rng.standard_normal(n) * np.exp(h / 2)
    p = rng.standard_normal(n)
    return h, y * y, p


def time_backend(k, n, repeat):
    h, y2, p = make_inputs(n)
    theta = (-7.9, 0.975, 0.045)
    calls = {
        "potential": lambda: k.sv_potential(h, y2, *theta),
        "gradient": lambda: k.sv_grad(h, y2, *theta),
        "leapfrog x25": lambda: k.sv_leapfrog(h.copy(), p.copy(), y2, *theta, 0.04, 25),
        "garch filter": lambda: k.garch_filter(y2, 1e-6, 0.1, 0.85),
    }
    return {name: min(timeit.repeat(f, number=1, repeat=repeat)) for name, f in calls.items()}


def check_agreement(n):
    py, cy = get_backend("python"), get_backend("cython")
    h, y2, p = make_inputs(n, 1)
    theta = (-7.9, 0.975, 0.045)
    a, b = (h.copy(), p.copy()), (h.copy(), p.copy())
    py.sv_leapfrog(*a, y2, *theta, 0.04, 25)
    cy.sv_leapfrog(*b, y2, *theta, 0.04, 25)
    return max(float(np.max(np.abs(a[0] - b[0]))), float(np.max(np.abs(a[1] - b[1]))))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000, help="series length")
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()

    results = {"python": time_backend(get_backend("python"), args.n, args.repeat)}
    try:
        results["cython"] = time_backend(get_backend("cython"), args.n, args.repeat)
    except ImportError:
        print("compiled extension not built; only the numpy backend is timed")

    names = list(results["python"])
    print(f"n = {args.n}, best of {args.repeat} (microseconds)")
    print(f"{'kernel':>14}  " + "  ".join(f"{b:>10}" for b in results) + ("     speedup" if len(results) > 1 else ""))
    for name in names:
        row = "  ".join(f"{results[b][name] * 1e6:10.1f}" for b in results)
        if "cython" in results:
            row += f"  {results['python'][name] / results['cython'][name]:9.1f}x"
        print(f"{name:>14}  {row}")
    if "cython" in results:
        print(f"max leapfrog difference between backends: {check_agreement(args.n):.2e}")


if __name__ == "__main__":
    main()
