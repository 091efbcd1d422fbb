"""Randomized self-verification of the discrete calculus and network assembly.

Every suite draws its data from a seeded generator, so a given seed always
exercises identical inputs.  Each check returns the worst error or margin it
saw; ``run_all`` aggregates them into a report the CLI can print.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import SimState, energy, exact_linear_propagate, run_verlet, stable_dt, total_force
from .lattice import LatticeField, dalpha_array, dminus_array, dplus_array, inner, padded
from .model import InitialData, ModelSpec, PolynomialR, reduce_quadratic
from .synthesis import (StiffnessNetwork, assemble_stiffness, force_from_network,
                        laplacian_power_coeffs, network_energy, operator_force)

__all__ = ["CheckResult", "SelftestReport", "run_all"]

TWO_PI = 2.0 * math.pi


@dataclass
class CheckResult:
    name: str
    ok: bool
    worst: float
    detail: str = ""


@dataclass
class SelftestReport:
    results: list

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)


# ---------------------------------------------------------------------------
# random field helpers

def _rough_field(rng, N):
    return rng.standard_normal(N)


def _smooth_field(rng, N, decay=2.0):
    """Random band-limited periodic field with power-law spectral decay."""
    kmax = max(2, N // 4)
    spec = np.zeros(N // 2 + 1, dtype=complex)
    m = np.arange(1, kmax + 1)
    amp = rng.standard_normal(kmax) / m**decay
    phase = rng.uniform(0.0, TWO_PI, kmax)
    spec[1:kmax + 1] = amp * np.exp(1j * phase)
    return np.fft.irfft(spec, n=N) * N


def _trig_coeffs(rng, max_mode=3):
    """Complex Fourier coefficients c_m, m = 0..max_mode, decaying amplitudes."""
    c = np.zeros(max_mode + 1, dtype=complex)
    c[0] = rng.standard_normal()
    for m in range(1, max_mode + 1):
        c[m] = (rng.standard_normal() + 1j * rng.standard_normal()) / m
    return c


def _trig_eval(c, x, d=0):
    """d-th derivative of u(x) = Re sum_m c_m exp(i m x) on period 2*pi."""
    out = np.zeros_like(x)
    for m, cm in enumerate(c):
        out += ((1j * m) ** d * cm * np.exp(1j * m * x)).real
    return out


# ---------------------------------------------------------------------------
# suite 1: integration by parts

def check_integration_by_parts(rng, trials=100):
    """<f, D+ g> = -<D- f, g> on the circle, and on zero-extended lines."""
    worst = 0.0
    for _ in range(trials):
        N = int(rng.integers(16, 257))
        L = float(rng.uniform(1.0, TWO_PI))
        eps = L / N
        f = _rough_field(rng, N)
        g = _rough_field(rng, N)
        lhs = eps * float(f @ dplus_array(g, eps, "periodic"))
        rhs = -eps * float(dminus_array(f, eps, "periodic") @ g)
        scale = max(abs(lhs), abs(rhs), eps * float(np.abs(f).max() * np.abs(g).max()))
        worst = max(worst, abs(lhs - rhs) / scale)
        # zero-extended line: pad so every nonzero difference is inside the window
        fp = padded(np.concatenate(([0.0], f, [0.0])), 2)
        gp = padded(np.concatenate(([0.0], g, [0.0])), 2)
        lhs = eps * float(fp @ dplus_array(gp, eps, "periodic"))
        rhs = -eps * float(dminus_array(fp, eps, "periodic") @ gp)
        scale = max(abs(lhs), abs(rhs), eps * float(np.abs(f).max() * np.abs(g).max()))
        worst = max(worst, abs(lhs - rhs) / scale)
    return CheckResult("integration_by_parts", worst <= 1e-13, worst,
                       f"max relative residual over {trials} pairs")


# ---------------------------------------------------------------------------
# suite 2: sup-norm bound

def check_sup_bound(rng, trials=100):
    """max|f|^2 <= (1/L + 1) * (|f|^2 + |D+ f|^2 norms) on the circle."""
    L = TWO_PI
    worst = 0.0
    ok = True
    for trial in range(trials):
        N = int(rng.integers(16, 257))
        eps = L / N
        f = _smooth_field(rng, N) if trial % 2 else _rough_field(rng, N)
        df = dplus_array(f, eps, "periodic")
        h1 = eps * float(f @ f) + eps * float(df @ df)
        lhs = float(np.abs(f).max()) ** 2
        ratio = lhs / ((1.0 / L + 1.0) * h1)
        worst = max(worst, ratio)
        ok = ok and ratio <= 1.0 + 1e-12
    return CheckResult("sup_bound", ok, worst, f"max LHS/RHS over {trials} fields")


# ---------------------------------------------------------------------------
# suite 3: chain rule for composites

def _cos_minmax(lo, hi):
    """Exact range of cos over [lo, hi]."""
    vmax = 1.0 if math.floor(hi / TWO_PI) >= math.ceil(lo / TWO_PI) else max(math.cos(lo), math.cos(hi))
    k_lo = math.ceil((lo - math.pi) / TWO_PI)
    k_hi = math.floor((hi - math.pi) / TWO_PI)
    vmin = -1.0 if k_hi >= k_lo else min(math.cos(lo), math.cos(hi))
    return vmin, vmax


def check_chain_rule(rng, trials=100):
    """|D+ f(g)| <= sup|f'| over [g_i, g_{i+1}] * |D+ g|, with an attained ratio.

    Uses f = sin (derivative range solved in closed form) and f = cube.
    """
    worst = 0.0
    ok = True
    slack = 1e-10
    for trial in range(trials):
        N = int(rng.integers(16, 129))
        eps = TWO_PI / N
        g = _smooth_field(rng, N) if trial % 2 else 0.5 * _rough_field(rng, N)
        dg = dplus_array(g, eps, "periodic")
        g_next = np.roll(g, -1)
        for use_sin in (True, False):
            fg = np.sin(g) if use_sin else g**3
            dfg = dplus_array(fg, eps, "periodic")
            for i in range(N):
                lo, hi = (g[i], g_next[i]) if g[i] <= g_next[i] else (g_next[i], g[i])
                if use_sin:
                    dmin, dmax = _cos_minmax(lo, hi)
                else:
                    dmin = 0.0 if lo <= 0.0 <= hi else 3.0 * min(lo * lo, hi * hi)
                    dmax = 3.0 * max(lo * lo, hi * hi)
                sup = max(abs(dmin), abs(dmax))
                bound = sup * abs(dg[i]) + slack
                if abs(dfg[i]) > bound:
                    ok = False
                worst = max(worst, abs(dfg[i]) - sup * abs(dg[i]))
                # mean-value witness: the realized slope must lie in [dmin, dmax]
                if abs(dg[i]) > 1e-8:
                    slope = dfg[i] / dg[i]
                    if not (dmin - slack <= slope <= dmax + slack):
                        ok = False
    return CheckResult("chain_rule", ok, worst, f"max bound excess over {trials} fields")


# ---------------------------------------------------------------------------
# suite 4: stiffness recursion vs repeated three-point stencils

def check_recursion(rng, trials=100, N=64):
    """A pure order-p band applied as a network equals p stacked stencils."""
    eps = TWO_PI / N
    worst = 0.0
    for p in (1, 2, 3, 4):
        offsets = laplacian_power_coeffs(p, eps)
        # closed form cross-check of the offset coefficients
        for d in range(p + 1):
            closed = 0.0 if d == 0 else eps ** (-2 * p) * (-1) ** (p + d) * math.comb(2 * p, p + d)
            worst = max(worst, abs(offsets[d] - closed) / eps ** (-2 * p))
        net = StiffnessNetwork(eps=eps, N=N, bc="periodic", n=p,
                               band=offsets.copy(), grounding=0.0)
        for _ in range(trials // 4):
            u = _rough_field(rng, N)
            fld = LatticeField(eps, "periodic", u.copy())
            lhs = force_from_network(net, fld).values
            rhs = u.copy()
            for _ in range(p):
                rhs = dalpha_array(rhs, eps, 2, "periodic")
            worst = max(worst, float(np.abs(lhs - rhs).max()) / float(np.abs(rhs).max()))
    return CheckResult("stencil_recursion", worst <= 1e-11, worst,
                       "max relative error, orders 1-4")


# ---------------------------------------------------------------------------
# suite 5: network force vs operator force

def _random_admissible_A(rng, n):
    A = [float(rng.uniform(0.0, 1.0))]
    A.extend(float(rng.uniform(0.0, 1.0)) for _ in range(n - 1))
    A.append(float(rng.uniform(0.5, 2.0)))
    return tuple(A)


def check_force_equivalence(rng, trials=100, assemble_fn=assemble_stiffness):
    """Assembled band force equals the signed sum of stacked stencils."""
    worst = 0.0
    ok = True
    for n in (1, 2, 3, 4):
        for bc in ("periodic", "dirichlet"):
            N = 64
            eps = TWO_PI / N
            A = _random_admissible_A(rng, n)
            net = assemble_fn(A, eps, N, bc)
            if np.any(net.band[n + 1:] != 0.0):
                ok = False
            if net.band.shape[0] != n + 1:
                ok = False
            nsites = N if bc == "periodic" else N + 1
            for _ in range(trials // 8):
                u = _rough_field(rng, nsites)
                if bc == "dirichlet":
                    u[:n] = 0.0
                    u[nsites - n:] = 0.0
                fld = LatticeField(eps, bc, u.copy())
                f_net = force_from_network(net, fld).values
                f_op = operator_force(A, fld).values
                scale = max(float(np.abs(f_op).max()), 1.0)
                err = float(np.abs(f_net - f_op).max()) / scale
                worst = max(worst, err)
                if err > 1e-10:
                    ok = False
    return CheckResult("force_equivalence", ok, worst,
                       "max relative error, n = 1..4, both boundaries")


# ---------------------------------------------------------------------------
# suite 6: force is the (scaled) negative energy gradient

def check_energy_gradient(rng, h=1e-6):
    """Central differences of the total energy reproduce the force field."""
    R = PolynomialR(terms=((4, 0, 0.05), (0, 4, 0.02), (2, 1, 0.03)))
    spec = ModelSpec(n=2, A=(0.3, 0.2, 1.0), R=R, L=TWO_PI, bc="periodic",
                     initial=InitialData(kind="trig", u_cos=(0.0, 1.0)))
    N = 24
    eps = spec.L / N
    net = assemble_stiffness(spec.A, eps, N, spec.bc)
    u = 0.4 * _smooth_field(rng, N)
    v = np.zeros(N)
    worst = 0.0

    def total_U(vals):
        st = SimState(0.0, LatticeField(eps, "periodic", vals),
                      LatticeField(eps, "periodic", v))
        eb = energy(spec, net, st)
        return eb.quadratic + eb.nonlinear

    f = total_force(spec, net, LatticeField(eps, "periodic", u.copy())).values
    for i in range(N):
        up = u.copy(); up[i] += h
        um = u.copy(); um[i] -= h
        grad = (total_U(up) - total_U(um)) / (2.0 * h)
        expected = -grad / eps
        worst = max(worst, abs(f[i] - expected) / max(abs(expected), 1.0))
    return CheckResult("energy_gradient", worst <= 1e-6, worst,
                       "max relative mismatch vs central differences")


# ---------------------------------------------------------------------------
# suite 7: assembled quadratic energy matches the derivative-norm form

def check_quadratic_energy(rng, trials=40):
    worst = 0.0
    for trial in range(trials):
        n = int(rng.integers(1, 5))
        bc = "periodic" if trial % 2 else "dirichlet"
        N = int(rng.integers(8 * n, 65))
        eps = TWO_PI / N
        A = _random_admissible_A(rng, n)
        net = assemble_stiffness(A, eps, N, bc)
        nsites = N if bc == "periodic" else N + 1
        u = _rough_field(rng, nsites)
        if bc == "dirichlet":
            u[:n] = 0.0
            u[nsites - n:] = 0.0
        fld = LatticeField(eps, bc, u.copy())
        U_net = network_energy(net, fld)
        uw = padded(u, n + 1) if bc == "dirichlet" else u
        U_ops = 0.0
        for a_ord, Aa in enumerate(A):
            if Aa == 0.0:
                continue
            da = dalpha_array(uw, eps, a_ord, bc) if a_ord else uw
            U_ops += 0.5 * eps * Aa * float(da @ da)
        scale = max(abs(U_ops), 1.0)
        worst = max(worst, abs(U_net - U_ops) / scale)
    return CheckResult("quadratic_energy", worst <= 1e-10, worst,
                       "network vs derivative-norm energy")


# ---------------------------------------------------------------------------
# suite 8: time reversibility of the integrator

def check_reversibility(rng):
    R = PolynomialR(terms=((4, 0, 0.1), (0, 4, 0.1)))
    spec = ModelSpec(n=2, A=(1.0, 0.0, 1.0), R=R, L=TWO_PI, bc="periodic",
                     initial=InitialData(kind="trig", u_cos=(0.0, 0.5)))
    N = 64
    eps = spec.L / N
    net = assemble_stiffness(spec.A, eps, N, spec.bc)
    u0 = 0.5 * _smooth_field(rng, N)
    v0 = 0.1 * _smooth_field(rng, N)
    s0 = SimState(0.0, LatticeField(eps, "periodic", u0.copy()),
                  LatticeField(eps, "periodic", v0.copy()))
    (fwd,) = run_verlet(spec, net, s0, [0.5])
    back = SimState(0.0, fwd.u.copy(), LatticeField(eps, "periodic", -fwd.v.values))
    (rev,) = run_verlet(spec, net, back, [0.5])
    scale = max(float(np.abs(u0).max()), 1.0)
    err = max(float(np.abs(rev.u.values - u0).max()),
              float(np.abs(-rev.v.values - v0).max())) / scale
    return CheckResult("verlet_reversibility", err <= 1e-12, err,
                       "round-trip displacement error")


# ---------------------------------------------------------------------------
# suite 9: closed-form propagator conserves energy to roundoff

def check_propagator_drift():
    spec = ModelSpec(n=2, A=(0.0, 0.0, 1.0), L=TWO_PI, bc="periodic",
                     initial=InitialData(kind="trig", u_cos=(0.0, 1.0), v_sin=(0.0, 0.3)))
    N = 128
    eps = spec.L / N
    net = assemble_stiffness(spec.A, eps, N, spec.bc)
    from .lattice import sample_initial

    s0 = SimState(0.0, sample_initial(spec, N, "u"), sample_initial(spec, N, "v"))
    E0 = energy(spec, net, s0).total
    worst = 0.0
    for t in (0.25, 0.5, 1.0, 2.0):
        st = exact_linear_propagate(spec, s0, t)
        Et = energy(spec, net, st).total
        worst = max(worst, abs(Et - E0) / abs(E0))
    return CheckResult("propagator_drift", worst <= 1e-12, worst,
                       "relative energy drift over four horizons")


# ---------------------------------------------------------------------------
# suite 10: quadratic cross-derivative reduction

def _quad_grid(M=4096):
    x = np.arange(M) * (TWO_PI / M)
    return x, TWO_PI / M


def check_quadratic_reduction(rng, trials=50, tol=1e-8):
    """Full cross-derivative quadratic energy equals its diagonal reduction.

    Integrals are midpoint sums on a grid fine enough to be exact for the
    trigonometric fields used (products stay far below the Nyquist mode).
    """
    x, dx = _quad_grid()
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 5))
        Q = rng.standard_normal((n + 1, n + 1))
        Q = 0.5 * (Q + Q.T)
        A = reduce_quadratic(Q)
        c = _trig_coeffs(rng, max_mode=3)
        derivs = [_trig_eval(c, x, d) for d in range(n + 1)]
        lhs = 0.0
        for a_ord in range(n + 1):
            for b_ord in range(n + 1):
                lhs += 0.5 * Q[a_ord, b_ord] * dx * float(derivs[a_ord] @ derivs[b_ord])
        rhs = 0.0
        for g_ord, Ag in enumerate(A):
            rhs += 0.5 * Ag * dx * float(derivs[g_ord] @ derivs[g_ord])
        scale = max(abs(lhs), abs(rhs), dx * float(derivs[0] @ derivs[0]))
        worst = max(worst, abs(lhs - rhs) / scale)
    return CheckResult("quadratic_reduction", worst <= tol, worst,
                       f"max relative gap over {trials} random couplings")


# ---------------------------------------------------------------------------

def run_all(seed: int = 0, assemble_fn=assemble_stiffness) -> SelftestReport:
    """Run every suite with a deterministic seed; returns the full report."""
    rng = np.random.default_rng(seed)
    streams = rng.spawn(10)
    results = [
        check_integration_by_parts(streams[0]),
        check_sup_bound(streams[1]),
        check_chain_rule(streams[2]),
        check_recursion(streams[3]),
        check_force_equivalence(streams[4], assemble_fn=assemble_fn),
        check_energy_gradient(streams[5]),
        check_quadratic_energy(streams[6]),
        check_reversibility(streams[7]),
        check_propagator_drift(),
        check_quadratic_reduction(streams[8]),
    ]
    return SelftestReport(results=results)
