"""Numba implementations of the hot inner loops.

Arrays arrive ghost-padded: the stored block sits at ``[nb, nb + nstore)``
where ``nb`` is the coupling half-width.  Periodic runs refresh the ghosts
from the opposite end of the block before every force evaluation; clamped
runs keep them at zero.  Forces are written only on ``[i0, i1)`` (the free
sites); everything outside stays untouched so frozen sites remain exactly
zero throughout.

Arithmetic is written to match the numpy fallback operation-for-operation so
both backends produce identical trajectories.
"""

import numpy as np
from numba import njit

__all__ = ["force_into", "run_verlet"]


@njit(cache=True, nogil=True, fastmath=False)
def _ipow(x, k):
    r = 1.0
    for _ in range(k):
        r *= x
    return r


@njit(cache=True, nogil=True, fastmath=False)
def _refresh_ghosts(u, nb, nstore):
    for k in range(nb):
        u[k] = u[nstore + k]
        u[nb + nstore + k] = u[nb + k]


@njit(cache=True, nogil=True, fastmath=False)
def _force_core(u, a, band, g, eps, rp, rq, rc, w, s, i0, i1):
    nb = band.shape[0] - 1
    nterms = rp.shape[0]
    if nterms > 0:
        for i in range(i0 - 1, i1):
            w[i] = (u[i + 1] - u[i]) / eps
        for i in range(i0 - 1, i1):
            acc = 0.0
            for t in range(nterms):
                q = rq[t]
                if q > 0:
                    acc += rc[t] * q * _ipow(u[i], rp[t]) * _ipow(w[i], q - 1)
            s[i] = acc
    for i in range(i0, i1):
        acc = -g * u[i]
        for d in range(1, nb + 1):
            acc += band[d] * (u[i + d] + u[i - d] - 2.0 * u[i])
        if nterms > 0:
            d0 = 0.0
            for t in range(nterms):
                p = rp[t]
                if p > 0:
                    d0 += rc[t] * p * _ipow(u[i], p - 1) * _ipow(w[i], rq[t])
            acc -= d0
            acc += (s[i] - s[i - 1]) / eps
        a[i] = acc


@njit(cache=True, nogil=True, fastmath=False)
def force_into(u, a, band, g, eps, rp, rq, rc, w, s, nstore, periodic, i0, i1):
    nb = band.shape[0] - 1
    if periodic:
        _refresh_ghosts(u, nb, nstore)
    _force_core(u, a, band, g, eps, rp, rq, rc, w, s, i0, i1)


@njit(cache=True, nogil=True, fastmath=False)
def run_verlet(u, v, a, band, g, eps, rp, rq, rc, dt, nsteps, nstore, periodic, i0, i1, w, s):
    """Velocity-Verlet for `nsteps` steps; `a` must hold the force at entry."""
    nb = band.shape[0] - 1
    for _ in range(nsteps):
        for i in range(i0, i1):
            v[i] += 0.5 * dt * a[i]
            u[i] += dt * v[i]
        if periodic:
            _refresh_ghosts(u, nb, nstore)
        _force_core(u, a, band, g, eps, rp, rq, rc, w, s, i0, i1)
        for i in range(i0, i1):
            v[i] += 0.5 * dt * a[i]
