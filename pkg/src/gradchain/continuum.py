"""Reference solutions the chain is measured against.

Linear periodic models with trig initial data admit a closed-form limiting
solution: each wavenumber ``k_m = 2*pi*m/L`` rotates with frequency
``omega(k) = sqrt(sum_a A_a * k**(2a))``.  Everything else (clamped spans,
nonlinear models) is served by a trajectory on a much finer chain, restricted
to the coarse sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import SimState, run_verlet, ZERO_FREQ_FACTOR
from .errors import UnsupportedModelError, ValidationError
from .lattice import LatticeField, sample_initial
from .model import ModelSpec
from .synthesis import assemble_stiffness

__all__ = [
    "dispersion_omega",
    "discrete_dispersion_omega",
    "SpectralSolution",
    "spectral_solve",
    "eval_reference",
    "FineTrajectory",
    "fine_grid_oracle",
]


def dispersion_omega(A, k):
    """Limiting dispersion ``sqrt(sum_a A_a k**(2a))``; rejects imaginary frequencies."""
    A = np.asarray(A, dtype=float)
    k = np.asarray(k, dtype=float)
    w2 = np.zeros_like(k)
    for a, Aa in enumerate(A):
        w2 += Aa * k ** (2 * a)
    if np.any(w2 < 0.0):
        bad = k[np.argmin(w2)] if k.shape else float(k)
        raise ValidationError(f"negative squared frequency at wavenumber {bad}: inadmissible weights")
    out = np.sqrt(w2)
    return out if out.shape else float(out)


def discrete_dispersion_omega(A, eps: float, k):
    """Chain dispersion at spacing eps: the symbol ``(4/eps**2) sin(k eps/2)**2``
    replaces ``k**2`` in each order."""
    A = np.asarray(A, dtype=float)
    k = np.asarray(k, dtype=float)
    s = (4.0 / eps**2) * np.sin(k * eps / 2.0) ** 2
    w2 = np.zeros_like(s)
    for a, Aa in enumerate(A):
        w2 += Aa * s**a
    if np.any(w2 < 0.0):
        raise ValidationError("negative squared frequency: inadmissible weights at this mesh")
    out = np.sqrt(w2)
    return out if out.shape else float(out)


@dataclass
class SpectralSolution:
    """Mode amplitudes of the limiting solution at one instant."""

    spec: ModelSpec
    t: float
    u_cos: np.ndarray
    u_sin: np.ndarray
    v_cos: np.ndarray
    v_sin: np.ndarray
    omega: np.ndarray = field(repr=False, default=None)


def _mode_arrays(data, M):
    out = []
    for name in ("u_cos", "u_sin", "v_cos", "v_sin"):
        arr = np.zeros(M + 1)
        src = getattr(data, name)
        arr[: len(src)] = src
        out.append(arr)
    return out


def spectral_solve(spec: ModelSpec, t: float) -> SpectralSolution:
    """Advance the trig initial data to time t in closed form.

    Each mode rotates with its limiting frequency; modes with frequency below
    ``1e-12 * max omega`` drift linearly.
    """
    if not spec.is_linear:
        raise UnsupportedModelError("closed-form solution needs a linear model (R = 0)")
    if spec.bc != "periodic" or spec.initial.kind != "trig":
        raise UnsupportedModelError("closed-form solution needs periodic trig data")
    M = spec.initial.max_mode()
    uc, us, vc, vs = _mode_arrays(spec.initial, M)
    k = 2.0 * math.pi * np.arange(M + 1) / spec.L
    omega = dispersion_omega(spec.A, k) if M >= 0 else np.zeros(1)
    omega = np.atleast_1d(omega)
    w_max = float(omega.max()) if omega.size else 0.0
    tiny = ZERO_FREQ_FACTOR * max(w_max, 1e-300)
    uc_t = np.empty_like(uc)
    us_t = np.empty_like(us)
    vc_t = np.empty_like(vc)
    vs_t = np.empty_like(vs)
    for m in range(M + 1):
        w = omega[m]
        if w < tiny:
            uc_t[m] = uc[m] + t * vc[m]
            us_t[m] = us[m] + t * vs[m]
            vc_t[m] = vc[m]
            vs_t[m] = vs[m]
        else:
            c, s = math.cos(w * t), math.sin(w * t)
            uc_t[m] = c * uc[m] + (s / w) * vc[m]
            us_t[m] = c * us[m] + (s / w) * vs[m]
            vc_t[m] = -w * s * uc[m] + c * vc[m]
            vs_t[m] = -w * s * us[m] + c * vs[m]
    return SpectralSolution(spec=spec, t=t, u_cos=uc_t, u_sin=us_t,
                            v_cos=vc_t, v_sin=vs_t, omega=omega)


def eval_reference(sol: SpectralSolution, x, d: int = 0, which: str = "u"):
    """Exact d-th spatial derivative of the limiting solution at its snapshot time."""
    n = sol.spec.n
    if d < 0 or d > 2 * n + 1:
        raise ValidationError(f"derivative order {d} outside [0, {2 * n + 1}]")
    if which not in ("u", "v"):
        raise ValidationError(f"which must be 'u' or 'v', got {which!r}")
    ccos = sol.u_cos if which == "u" else sol.v_cos
    csin = sol.u_sin if which == "u" else sol.v_sin
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    shift = d * math.pi / 2.0
    for m in range(len(ccos)):
        w = 2.0 * math.pi * m / sol.spec.L
        if m == 0:
            if d == 0:
                out += ccos[0]
            continue
        if ccos[m] != 0.0:
            out += ccos[m] * w**d * np.cos(w * x + shift)
        if csin[m] != 0.0:
            out += csin[m] * w**d * np.sin(w * x + shift)
    return out if out.shape else float(out)


def _spectral_fields(spec: ModelSpec, t: float, N: int):
    sol = spectral_solve(spec, t)
    eps = spec.L / N
    x = np.arange(N) * eps
    u = LatticeField(eps, "periodic", eval_reference(sol, x, 0, "u"))
    v = LatticeField(eps, "periodic", eval_reference(sol, x, 0, "v"))
    return u, v


@dataclass
class FineTrajectory:
    """Snapshots of a run on a finer chain, restrictable to coarser lattices."""

    spec: ModelSpec
    N_fine: int
    sample_times: tuple
    snapshots: dict  # t -> (u_values, v_values) on the fine chain
    min_ratio: int = 8

    @property
    def eps_fine(self) -> float:
        return self.spec.L / self.N_fine

    def restrict(self, t: float, N: int):
        """Fine-state values at the sites of an N-cell coarse lattice."""
        if self.N_fine % N != 0:
            raise ValidationError(f"fine chain N = {self.N_fine} does not nest N = {N}")
        ratio = self.N_fine // N
        if ratio < self.min_ratio:
            raise ValidationError(
                f"refinement ratio {ratio} below the trusted minimum {self.min_ratio}"
            )
        key = self._key(t)
        ufine, vfine = self.snapshots[key]
        eps = self.spec.L / N
        if self.spec.bc == "periodic":
            u = ufine[::ratio].copy()
            v = vfine[::ratio].copy()
        else:
            u = ufine[::ratio].copy()  # fine site i*ratio sits at coarse site i, ends included
            v = vfine[::ratio].copy()
        return (LatticeField(eps, self.spec.bc, u), LatticeField(eps, self.spec.bc, v))

    def _key(self, t: float) -> float:
        for ts in self.snapshots:
            if math.isclose(ts, t, rel_tol=1e-12, abs_tol=1e-12):
                return ts
        raise ValidationError(f"no snapshot near t = {t}; have {sorted(self.snapshots)}")


def fine_grid_oracle(spec: ModelSpec, N_fine: int, sample_times,
                     cfl: float | None = None) -> FineTrajectory:
    """Reference trajectory on an N_fine-cell chain (velocity Verlet).

    The oracle runs closer to the stability edge than measurement runs
    (default cfl 0.8 linear / 0.4 nonlinear): its time error is dispersion
    limited and far below the mesh deviations it serves to measure.
    """
    if cfl is None:
        cfl = 0.8 if spec.is_linear else 0.4
    eps = spec.L / N_fine
    net = assemble_stiffness(spec.A, eps, N_fine, spec.bc)
    u0 = sample_initial(spec, N_fine, "u")
    v0 = sample_initial(spec, N_fine, "v")
    state = SimState(0.0, u0, v0)
    times = sorted(set(float(t) for t in sample_times))
    snaps = {0.0: (u0.values.copy(), v0.values.copy())}
    states = run_verlet(spec, net, state, [t for t in times if t > 0.0], cfl=cfl)
    for st in states:
        snaps[st.t] = (st.u.values.copy(), st.v.values.copy())
    return FineTrajectory(spec=spec, N_fine=N_fine,
                          sample_times=tuple(times), snapshots=snaps)
