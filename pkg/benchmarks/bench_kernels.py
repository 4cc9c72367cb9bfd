"""Benchmark the compiled master-equation kernel against the numpy fallback.

Times the dense RK5 segment integrator on gate-Hamiltonian workloads for the
3-qubit (dim 8, dephasing) and 5-qubit (dim 32, isotropic) registers, which
is where a pipeline run spends its time when gates are on.  Run after
building the extension:

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --steps 2000 --repeats 7
"""

import argparse
import time

import numpy as np

from noisyqec._kernels import _pure
from noisyqec.gates import encode_schedule_3bit, encode_schedule_5bit
from noisyqec.lindblad import NoiseModel

try:
    from noisyqec._kernels import _fast
except ImportError:
    _fast = None


def workload(n):
    if n == 3:
        H = encode_schedule_3bit().steps[1].matrix
        noise = NoiseModel.dephasing(1e-3, 3)
    else:
        H = encode_schedule_5bit().steps[1].matrix
        noise = NoiseModel.isotropic(1e-3, 5)
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1.0
    perms, phases = noise.perm_phase()
    return rho, H, perms, phases, noise.kappa


def time_kernel(fn, args, steps, repeats):
    rho, H, perms, phases, kappa = args
    fn(rho, H, perms, phases, kappa, 0.01, 5)  # warm up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(rho, H, perms, phases, kappa, 0.01, steps)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=1000, help="RK5 steps per timing run")
    ap.add_argument("--repeats", type=int, default=5, help="timing repeats (best is kept)")
    args = ap.parse_args()

    if _fast is None:
        print("compiled kernel not available; timing the numpy fallback only")

    for n in (3, 5):
        w = workload(n)
        t_pure, out_pure = time_kernel(_pure.integrate_segment_pauli, w,
                                       args.steps, args.repeats)
        line = (f"n={n} dim={2**n:3d} ops={len(w[2]):2d}  "
                f"pure: {args.steps / t_pure:9.0f} steps/s")
        if _fast is not None:
            t_fast, out_fast = time_kernel(_fast.integrate_segment_pauli, w,
                                           args.steps, args.repeats)
            err = np.abs(out_fast - out_pure).max()
            line += (f"  compiled: {args.steps / t_fast:9.0f} steps/s"
                     f"  speedup: {t_pure / t_fast:5.1f}x  |diff|: {err:.1e}")
        print(line)


if __name__ == "__main__":
    main()
