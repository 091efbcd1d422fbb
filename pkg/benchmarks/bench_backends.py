#!/usr/bin/env python3
"""Compare the compiled and pure-numpy integrator backends.

Runs the same velocity-Verlet workload through both paths, reports the
speed ratio, and verifies the trajectories agree bit for bit.

    python benchmarks/bench_backends.py --N 4096 --steps 2000
"""

import argparse
import math
import time

import numpy as np

from gradchain._backend import HAVE_NUMBA, force_into_numpy, run_verlet_numpy


def build_workload(N, nonlinear):
    eps = 2.0 * math.pi / N
    band = np.array([0.0, 4.0 / eps**4, -1.0 / eps**4])  # beam-type two-band chain
    g = 0.0
    nb = band.shape[0] - 1
    x = np.arange(N) * eps
    u = np.zeros(N + 2 * nb)
    v = np.zeros(N + 2 * nb)
    u[nb:nb + N] = 0.4 * np.sin(x) + 0.1 * np.sin(3 * x)
    if nonlinear:
        rp = np.array([4, 0], dtype=np.int64)
        rq = np.array([0, 4], dtype=np.int64)
        rc = np.array([0.1, 0.1])
    else:
        rp = np.empty(0, dtype=np.int64)
        rq = np.empty(0, dtype=np.int64)
        rc = np.empty(0)
    a = np.zeros_like(u)
    w = np.zeros_like(u)
    s = np.zeros_like(u)
    i0, i1 = nb, nb + N
    omega_max = math.sqrt(sum(c * (4.0 / eps**2) ** k for k, c in ((1, 0.0), (2, 1.0))))
    dt = 0.5 * 2.0 / omega_max
    return dict(u=u, v=v, a=a, band=band, g=g, eps=eps, rp=rp, rq=rq, rc=rc,
                dt=dt, nstore=N, i0=i0, i1=i1, w=w, s=s)


def run(backend_force, backend_verlet, wl, steps):
    u = wl["u"].copy()
    v = wl["v"].copy()
    a = wl["a"].copy()
    w = wl["w"].copy()
    s = wl["s"].copy()
    backend_force(u, a, wl["band"], wl["g"], wl["eps"], wl["rp"], wl["rq"], wl["rc"],
                  w, s, wl["nstore"], True, wl["i0"], wl["i1"])
    t0 = time.perf_counter()
    backend_verlet(u, v, a, wl["band"], wl["g"], wl["eps"], wl["rp"], wl["rq"], wl["rc"],
                   wl["dt"], steps, wl["nstore"], True, wl["i0"], wl["i1"], w, s)
    elapsed = time.perf_counter() - t0
    return u, v, elapsed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=4096, help="chain size (default 4096)")
    ap.add_argument("--steps", type=int, default=2000, help="Verlet steps (default 2000)")
    ap.add_argument("--nonlinear", action="store_true", help="include a quartic perturbation")
    args = ap.parse_args()

    wl = build_workload(args.N, args.nonlinear)
    label = "nonlinear" if args.nonlinear else "linear"
    print(f"workload: N = {args.N}, steps = {args.steps}, {label}")

    u_np, v_np, t_np = run(force_into_numpy, run_verlet_numpy, wl, args.steps)
    rate_np = args.N * args.steps / t_np
    print(f"numpy : {t_np:8.3f} s  ({rate_np:.3e} site-updates/s)")

    if not HAVE_NUMBA:
        print("numba : not installed; nothing to compare")
        return

    from gradchain._kernels_numba import force_into, run_verlet

    # warm the JIT outside the timed region
    small = build_workload(64, args.nonlinear)
    run(force_into, run_verlet, small, 4)

    u_nb, v_nb, t_nb = run(force_into, run_verlet, wl, args.steps)
    rate_nb = args.N * args.steps / t_nb
    print(f"numba : {t_nb:8.3f} s  ({rate_nb:.3e} site-updates/s)")
    print(f"speedup: {t_np / t_nb:.1f}x")

    same = np.array_equal(u_np, u_nb) and np.array_equal(v_np, v_nb)
    print(f"bitwise agreement: {'yes' if same else 'NO - BACKENDS DIVERGED'}")
    if not same:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
