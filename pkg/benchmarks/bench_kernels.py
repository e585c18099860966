"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 2000]

Each kernel is called on the same inputs through both backends; the first
numba call (compilation or cache load) is excluded. The results of the two
backends are also compared, so a run doubles as a consistency check.
"""

import argparse
import time

import numpy as np

from sinfreq import kernels
from sinfreq._accel import HAVE_NUMBA
from sinfreq.dft import correlation_surface_2d, correlation_surface_1d
from sinfreq.estimator import NewtonConfig, refine_2d, surface_kernel
from sinfreq.simkit import REFERENCE_FREQS, synthesize, trial_rng


def timeit(fn, args, repeat):
    fn(*args)
    t0 = time.perf_counter()
    for _ in range(repeat):
        out = fn(*args)
    return (time.perf_counter() - t0) / repeat, out


def rel_diff(a, b):
    """Largest difference of any output relative to that output's magnitude."""
    worst = 0.0
    for x, y in zip(a, b):
        x, y = np.atleast_1d(x), np.atleast_1d(y)
        worst = max(worst, float(np.max(np.abs(x - y)) / max(np.max(np.abs(x)), 1e-300)))
    return worst


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--P", type=int, default=8)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return

    frame2 = synthesize(2, 64, 64, REFERENCE_FREQS, 5.0, trial_rng(0, 0, 0))
    s2 = correlation_surface_2d(frame2)
    s1 = correlation_surface_1d(type(frame2)(frame2.data[:, 0]))
    k1 = surface_kernel(args.P, s1.K, s1.M)
    kx = surface_kernel(args.P, s2.c_samples.shape[0], s2.M)
    ky = surface_kernel(args.P, s2.c_samples.shape[1], s2.N)
    f1, f2 = 0.2351, -0.1427

    cases = [
        ("cardinal", kernels._cardinal_np, kernels._cardinal_nb, (k1.weights, k1.T, 0.3 * k1.T, k1.eta)),
        (
            "cost_terms_1d",
            kernels._cost_terms_1d_np,
            kernels._cost_terms_1d_nb,
            (s1.c_samples, k1.weights, k1.T, f1, k1.eta),
        ),
        (
            "cost_terms_2d",
            kernels._cost_terms_2d_np,
            kernels._cost_terms_2d_nb,
            (s2.c_samples, kx.weights, ky.weights, kx.T, ky.T, f1, f2, kx.eta, ky.eta),
        ),
    ]
    print(f"{'kernel':<16}{'numpy [us]':>12}{'numba [us]':>12}{'speedup':>10}{'rel. diff':>13}")
    for name, f_np, f_nb, a in cases:
        t_np, r_np = timeit(f_np, a, args.repeat)
        t_nb, r_nb = timeit(f_nb, a, args.repeat)
        print(f"{name:<16}{t_np * 1e6:>12.2f}{t_nb * 1e6:>12.2f}{t_np / t_nb:>10.1f}{rel_diff(r_np, r_nb):>13.1e}")

    # end to end: one 2-D refinement with the active backend
    n = max(1, args.repeat // 20)
    t, est = timeit(refine_2d, (s2, NewtonConfig(P=args.P)), n)
    backend = "numba" if kernels.USE_NUMBA else "numpy"
    print(f"refine_2d ({backend} backend, P={args.P}): {t * 1e3:.2f} ms, {est.iters} iterations")


if __name__ == "__main__":
    main()
