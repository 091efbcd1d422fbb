"""Backend selection: numba-compiled inner loops with a pure-numpy fallback.

The fallback is chosen automatically when numba is missing, or forced with the
environment variable ``GRADCHAIN_NO_NUMBA=1`` (checked once at import).  Both
paths perform the same floating-point operations in the same order, so results
agree bit for bit; see ``benchmarks/bench_backends.py`` for the speed gap.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "HAVE_NUMBA",
    "backend_name",
    "force_into",
    "run_verlet",
    "force_into_numpy",
    "run_verlet_numpy",
]


def _flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


def _have_numba() -> bool:
    try:
        import numba  # noqa: F401
        return True
    except ImportError:
        return False


HAVE_NUMBA = _have_numba()


def _ipow_np(x, k: int):
    r = np.ones_like(x)
    for _ in range(k):
        r = r * x
    return r


def force_into_numpy(u, a, band, g, eps, rp, rq, rc, w, s, nstore, periodic, i0, i1):
    nb = band.shape[0] - 1
    if periodic:
        u[:nb] = u[nstore:nstore + nb]
        u[nb + nstore:] = u[nb:2 * nb]
    nterms = rp.shape[0]
    if nterms > 0:
        lo = i0 - 1
        w[lo:i1] = (u[lo + 1:i1 + 1] - u[lo:i1]) / eps
        acc_s = np.zeros(i1 - lo)
        for t in range(nterms):
            q = int(rq[t])
            if q > 0:
                acc_s += rc[t] * q * _ipow_np(u[lo:i1], int(rp[t])) * _ipow_np(w[lo:i1], q - 1)
        s[lo:i1] = acc_s
    acc = -g * u[i0:i1]
    for d in range(1, nb + 1):
        acc += band[d] * (u[i0 + d:i1 + d] + u[i0 - d:i1 - d] - 2.0 * u[i0:i1])
    if nterms > 0:
        d0 = np.zeros(i1 - i0)
        for t in range(nterms):
            p = int(rp[t])
            if p > 0:
                d0 += rc[t] * p * _ipow_np(u[i0:i1], p - 1) * _ipow_np(w[i0:i1], int(rq[t]))
        acc -= d0
        acc += (s[i0:i1] - s[i0 - 1:i1 - 1]) / eps
    a[i0:i1] = acc


def run_verlet_numpy(u, v, a, band, g, eps, rp, rq, rc, dt, nsteps, nstore, periodic, i0, i1, w, s):
    for _ in range(nsteps):
        v[i0:i1] += 0.5 * dt * a[i0:i1]
        u[i0:i1] += dt * v[i0:i1]
        force_into_numpy(u, a, band, g, eps, rp, rq, rc, w, s, nstore, periodic, i0, i1)
        v[i0:i1] += 0.5 * dt * a[i0:i1]


if HAVE_NUMBA and not _flag("GRADCHAIN_NO_NUMBA"):
    from ._kernels_numba import force_into, run_verlet

    BACKEND = "numba"
else:
    force_into = force_into_numpy
    run_verlet = run_verlet_numpy
    BACKEND = "numpy"


def backend_name() -> str:
    return BACKEND
