"""Time integration of the chain dynamics.

Equations of motion per site: ``u_tt = F(u)`` where F combines the banded
spring force, the grounding spring, and for nonlinear models the variational
force of the polynomial perturbation ``R(u, D+ u)``:

    ``F = F_springs - dR/dxi0(u, D+ u) + D- ( dR/dxi1(u, D+ u) )``.

Two steppers: velocity Verlet (symplectic, any model), and an exact
frequency-domain propagator for linear periodic models, which rotates each
spatial mode by its discrete dispersion frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DivergenceError, UnsupportedModelError, ValidationError
from .lattice import LatticeField, dalpha_array, padded
from .model import ModelSpec
from .synthesis import StiffnessNetwork

__all__ = [
    "SimState",
    "EnergyBreakdown",
    "total_force",
    "stable_dt",
    "step_verlet",
    "run_verlet",
    "exact_linear_propagate",
    "energy",
    "discrete_mode_frequencies",
]

ZERO_FREQ_FACTOR = 1e-12  # modes below this fraction of the top frequency drift linearly


@dataclass
class SimState:
    t: float
    u: LatticeField
    v: LatticeField

    def __post_init__(self):
        if not self.u.same_lattice(self.v):
            raise ValidationError("displacement and velocity live on different lattices")


@dataclass
class EnergyBreakdown:
    kinetic: float
    quadratic: float
    nonlinear: float

    @property
    def total(self) -> float:
        return self.kinetic + self.quadratic + self.nonlinear


def _r_arrays(spec: ModelSpec):
    terms = [t for t in spec.R.terms if t[2] != 0.0]
    rp = np.array([t[0] for t in terms], dtype=np.int64)
    rq = np.array([t[1] for t in terms], dtype=np.int64)
    rc = np.array([t[2] for t in terms], dtype=np.float64)
    return rp, rq, rc


def _buffers(net: StiffnessNetwork, state: SimState):
    nb = net.halfwidth
    m = net.nsites
    u = np.zeros(m + 2 * nb)
    v = np.zeros(m + 2 * nb)
    u[nb:nb + m] = state.u.values
    v[nb:nb + m] = state.v.values
    a = np.zeros_like(u)
    w = np.zeros_like(u)
    s = np.zeros_like(u)
    if net.bc == "periodic":
        i0, i1 = nb, nb + net.N
    else:
        i0, i1 = nb + net.n, nb + net.N + 1 - net.n
    return u, v, a, w, s, i0, i1


def total_force(spec: ModelSpec, net: StiffnessNetwork, f: LatticeField) -> LatticeField:
    """Spring force plus the variational force of the polynomial perturbation."""
    if f.values.size != net.nsites:
        raise ValidationError(f"field has {f.values.size} sites, network expects {net.nsites}")
    rp, rq, rc = _r_arrays(spec)
    nb = net.halfwidth
    state = SimState(0.0, f, LatticeField(f.eps, f.bc, np.zeros_like(f.values)))
    u, _, a, w, s, i0, i1 = _buffers(net, state)
    _backend.force_into(u, a, net.band, net.grounding, net.eps, rp, rq, rc,
                        w, s, net.nsites, net.bc == "periodic", i0, i1)
    return LatticeField(f.eps, f.bc, a[nb:nb + net.nsites].copy())


def stable_dt(spec: ModelSpec, eps: float, cfl: float | None = None) -> float:
    """Step bound ``cfl * 2 / omega_max`` from the top of the discrete band.

    Defaults: cfl = 0.25 for linear models, halved to 0.125 when the
    polynomial perturbation is active.
    """
    if cfl is None:
        cfl = 0.25 if spec.is_linear else 0.125
    s_max = 4.0 / eps**2
    w2 = 0.0
    for a, Aa in enumerate(spec.A):
        w2 += Aa * s_max**a
    if w2 <= 0.0:
        raise ValidationError(f"nonpositive squared band-edge frequency {w2!r}")
    return cfl * 2.0 / math.sqrt(w2)


def run_verlet(spec: ModelSpec, net: StiffnessNetwork, state: SimState,
               sample_times, cfl: float | None = None,
               dt: float | None = None) -> list[SimState]:
    """Advance with velocity Verlet, landing exactly on each sample time.

    Each interval between consecutive sample times is covered by uniform
    steps of size ``interval / ceil(interval / dt_target)``, so the step never
    exceeds the stability target and sampling is exact.
    """
    sample_times = [float(t) for t in sample_times]
    if any(t < state.t - 1e-15 for t in sample_times):
        raise ValidationError("sample times must not precede the current state time")
    dt_target = dt if dt is not None else stable_dt(spec, net.eps, cfl)
    rp, rq, rc = _r_arrays(spec)
    nb = net.halfwidth
    u, v, a, w, s, i0, i1 = _buffers(net, state)
    periodic = net.bc == "periodic"
    _backend.force_into(u, a, net.band, net.grounding, net.eps, rp, rq, rc,
                        w, s, net.nsites, periodic, i0, i1)
    out = []
    t = state.t
    for ts in sample_times:
        span = ts - t
        if span > 0.0:
            m = max(1, math.ceil(span / dt_target - 1e-12))
            h = span / m
            _backend.run_verlet(u, v, a, net.band, net.grounding, net.eps,
                                rp, rq, rc, h, m, net.nsites, periodic, i0, i1, w, s)
        t = ts
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise DivergenceError(f"non-finite state at t = {t}")
        out.append(SimState(
            t,
            LatticeField(net.eps, net.bc, u[nb:nb + net.nsites].copy()),
            LatticeField(net.eps, net.bc, v[nb:nb + net.nsites].copy()),
        ))
    return out


def step_verlet(spec: ModelSpec, net: StiffnessNetwork, state: SimState, dt: float) -> SimState:
    """One velocity-Verlet step of size dt."""
    return run_verlet(spec, net, state, [state.t + dt], dt=dt)[0]


def discrete_mode_frequencies(A, eps: float, N: int) -> np.ndarray:
    """Frequencies of the periodic discrete modes m = 0 .. N//2.

    Mode m has symbol ``s_m = (4/eps**2) * sin(pi*m/N)**2``; its squared
    frequency is ``sum_a A_a * s_m**a``.
    """
    A = np.asarray(A, dtype=float)
    m = np.arange(N // 2 + 1)
    s = (4.0 / eps**2) * np.sin(np.pi * m / N) ** 2
    w2 = np.zeros_like(s)
    for a, Aa in enumerate(A):
        w2 += Aa * s**a
    if np.any(w2 < -1e-12 * max(abs(w2).max(), 1.0)):
        raise ValidationError("negative squared frequency: model not wave-stable at this mesh")
    return np.sqrt(np.maximum(w2, 0.0))


def exact_linear_propagate(spec: ModelSpec, state: SimState, t: float) -> SimState:
    """Advance a linear periodic state exactly by rotating each spatial mode.

    Modes with frequency below ``1e-12 * omega_max`` are treated as free and
    drift linearly in time.
    """
    if not spec.is_linear:
        raise UnsupportedModelError("exact propagation needs a linear model (R = 0)")
    if state.u.bc != "periodic":
        raise UnsupportedModelError("exact propagation needs periodic boundary conditions")
    N = state.u.N
    eps = state.u.eps
    omega = discrete_mode_frequencies(spec.A, eps, N)
    w_max = float(omega.max()) if omega.size else 0.0
    dt = t - state.t
    uh = np.fft.rfft(state.u.values)
    vh = np.fft.rfft(state.v.values)
    tiny = ZERO_FREQ_FACTOR * max(w_max, 1e-300)
    free = omega < tiny
    osc = ~free
    wo = omega[osc]
    cos_wt = np.cos(wo * dt)
    sin_wt = np.sin(wo * dt)
    uh_new = np.empty_like(uh)
    vh_new = np.empty_like(vh)
    uh_new[osc] = cos_wt * uh[osc] + (sin_wt / wo) * vh[osc]
    vh_new[osc] = -wo * sin_wt * uh[osc] + cos_wt * vh[osc]
    uh_new[free] = uh[free] + dt * vh[free]
    vh_new[free] = vh[free]
    return SimState(
        t,
        LatticeField(eps, "periodic", np.fft.irfft(uh_new, n=N)),
        LatticeField(eps, "periodic", np.fft.irfft(vh_new, n=N)),
    )


def energy(spec: ModelSpec, net: StiffnessNetwork, state: SimState) -> EnergyBreakdown:
    """Kinetic + per-order quadratic + perturbation energy of a state.

    Clamped states are zero-extended before the difference sums so stencil
    spread past the span is kept.
    """
    eps = net.eps
    uvals = state.u.values
    vvals = state.v.values
    kinetic = 0.5 * eps * float(vvals @ vvals)
    A = np.asarray(spec.A, dtype=float)
    quad = 0.0
    if net.bc == "periodic":
        for a_ord, Aa in enumerate(A):
            if Aa == 0.0:
                continue
            da = dalpha_array(uvals, eps, a_ord, "periodic")
            quad += Aa * float(da @ da)
        w = (np.roll(uvals, -1) - uvals) / eps
        nonlinear = eps * float(np.sum(spec.R.value(uvals, w))) if not spec.is_linear else 0.0
    else:
        pad = spec.n + 1
        uw = padded(uvals, pad)
        for a_ord, Aa in enumerate(A):
            if Aa == 0.0:
                continue
            da = dalpha_array(uw, eps, a_ord, "dirichlet")
            quad += Aa * float(da @ da)
        if not spec.is_linear:
            ww = np.empty_like(uw)
            ww[:-1] = (uw[1:] - uw[:-1]) / eps
            ww[-1] = -uw[-1] / eps
            nonlinear = eps * float(np.sum(spec.R.value(uw, ww)))
        else:
            nonlinear = 0.0
    quad *= 0.5 * eps
    return EnergyBreakdown(kinetic=kinetic, quadratic=quad, nonlinear=nonlinear)
