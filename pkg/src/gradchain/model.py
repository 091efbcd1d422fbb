"""Model description for 1D chains with multi-neighbor elastic coupling.

A model is a quadratic energy density in the displacement and its first n
discrete-difference orders, weighted by coefficients ``A = (A_0, ..., A_n)``,
plus an optional polynomial perturbation ``R(xi0, xi1)`` acting on the
displacement and its first difference.  ``A_0`` acts as a grounding (on-site)
spring, ``A_n`` must not vanish and sets the highest difference order that
carries stiffness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ValidationError

__all__ = [
    "PolynomialR",
    "InitialData",
    "ModelSpec",
    "ValidationReport",
    "reduce_quadratic",
    "compute_kappa",
    "validate_model",
    "eval_initial",
]


@dataclass(frozen=True)
class PolynomialR:
    """Polynomial perturbation ``R(xi0, xi1) = sum c * xi0**p * xi1**q``.

    ``xi0`` is the displacement value, ``xi1`` its first forward difference.
    Every term must satisfy ``p + q >= 3`` so that R contributes no quadratic
    stiffness and vanishes to second order at the origin.
    """

    terms: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        for p, q, c in self.terms:
            if p < 0 or q < 0 or int(p) != p or int(q) != q:
                raise ValidationError(f"R term powers must be nonnegative integers, got ({p}, {q})")
            if p + q < 3:
                raise ValidationError(f"R term x0^{p} x1^{q} has total degree {p + q} < 3")

    @property
    def is_zero(self) -> bool:
        return all(c == 0.0 for _, _, c in self.terms)

    def value(self, xi0, xi1):
        out = np.zeros(np.broadcast(xi0, xi1).shape)
        for p, q, c in self.terms:
            out += c * np.asarray(xi0) ** p * np.asarray(xi1) ** q
        return out if out.shape else float(out)

    def d0(self, xi0, xi1):
        """Partial derivative with respect to the displacement slot."""
        out = np.zeros(np.broadcast(xi0, xi1).shape)
        for p, q, c in self.terms:
            if p:
                out += c * p * np.asarray(xi0) ** (p - 1) * np.asarray(xi1) ** q
        return out if out.shape else float(out)

    def d1(self, xi0, xi1):
        """Partial derivative with respect to the first-difference slot."""
        out = np.zeros(np.broadcast(xi0, xi1).shape)
        for p, q, c in self.terms:
            if q:
                out += c * q * np.asarray(xi0) ** p * np.asarray(xi1) ** (q - 1)
        return out if out.shape else float(out)

    def d01(self, xi0, xi1):
        out = np.zeros(np.broadcast(xi0, xi1).shape)
        for p, q, c in self.terms:
            if p and q:
                out += c * p * q * np.asarray(xi0) ** (p - 1) * np.asarray(xi1) ** (q - 1)
        return out if out.shape else float(out)

    def d11(self, xi0, xi1):
        out = np.zeros(np.broadcast(xi0, xi1).shape)
        for p, q, c in self.terms:
            if q >= 2:
                out += c * q * (q - 1) * np.asarray(xi0) ** p * np.asarray(xi1) ** (q - 2)
        return out if out.shape else float(out)


@dataclass(frozen=True)
class InitialData:
    """Analytic initial displacement/velocity, exactly differentiable.

    Two families:

    * ``trig`` (periodic runs): finite cosine/sine series, coefficient index m
      multiplies ``cos(2*pi*m*x/L)`` resp. ``sin(2*pi*m*x/L)``.
    * ``clamped`` (clamped runs): ``(x*(L-x)/L**2)**envelope_power`` times an
      inner trig series with the same indexing.  The envelope forces the value
      and the first ``envelope_power - 1`` derivatives to vanish at both ends.
    """

    kind: str = "trig"
    u_cos: tuple[float, ...] = ()
    u_sin: tuple[float, ...] = ()
    v_cos: tuple[float, ...] = ()
    v_sin: tuple[float, ...] = ()
    envelope_power: int = 0

    def __post_init__(self):
        if self.kind not in ("trig", "clamped"):
            raise ValidationError(f"unknown initial-data family {self.kind!r}")
        if self.kind == "clamped" and self.envelope_power < 1:
            raise ValidationError("clamped initial data needs envelope_power >= 1")

    def max_mode(self) -> int:
        return max(
            (len(s) - 1 for s in (self.u_cos, self.u_sin, self.v_cos, self.v_sin) if s),
            default=0,
        )


@dataclass(frozen=True)
class ModelSpec:
    """Everything that defines one simulation problem."""

    n: int
    A: tuple[float, ...]
    R: PolynomialR = PolynomialR()
    L: float = 2.0 * math.pi
    bc: str = "periodic"
    T: float = 1.0
    initial: InitialData = field(default_factory=InitialData)

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"gradient order n must be >= 1, got {self.n}")
        if len(self.A) != self.n + 1:
            raise ValidationError(f"need {self.n + 1} coefficients A_0..A_{self.n}, got {len(self.A)}")
        if self.L <= 0 or self.T <= 0:
            raise ValidationError("domain length L and horizon T must be positive")
        if self.bc not in ("periodic", "dirichlet"):
            raise ValidationError(f"unknown boundary kind {self.bc!r}")
        if self.bc == "periodic" and self.initial.kind != "trig":
            raise ValidationError("periodic runs need trig initial data")
        if self.bc == "dirichlet" and self.initial.kind != "clamped":
            raise ValidationError("clamped runs need clamped initial data")
        if self.initial.kind == "clamped" and self.initial.envelope_power < self.n:
            raise ValidationError(
                f"clamped envelope power {self.initial.envelope_power} must be >= n = {self.n}"
            )

    @property
    def is_linear(self) -> bool:
        return self.R.is_zero


def reduce_quadratic(Q) -> np.ndarray:
    """Collapse a symmetric coupling matrix to per-order weights.

    For a quadratic density ``(1/2) * sum_{a,b} Q[a,b] D^a u D^b u`` on smooth
    periodic fields, integration by parts moves every cross term onto a single
    squared derivative, leaving ``(1/2) * sum_g A[g] |D^g u|**2`` with

        ``A[g] = (1/2) * sum_{a+b=2g} Q[a,b] * ((-1)**a + (-1)**b) * (-1)**g``.

    Odd-total cross terms integrate to zero and drop out.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValidationError(f"coupling matrix must be square, got shape {Q.shape}")
    scale = np.abs(Q).max()
    if np.abs(Q - Q.T).max() > 1e-12 * max(scale, 1.0):
        raise ValidationError("coupling matrix must be symmetric (within 1e-12 relative)")
    n = Q.shape[0] - 1
    A = np.zeros(n + 1)
    for g in range(n + 1):
        acc = 0.0
        for a in range(n + 1):
            b = 2 * g - a
            if 0 <= b <= n:
                acc += Q[a, b] * ((-1.0) ** a + (-1.0) ** b)
        A[g] = 0.5 * acc * (-1.0) ** g
    return A


def compute_kappa(L: float, eps0: float) -> float:
    """Sharp constant bounding ``|u|^2`` by ``|D+ u|^2`` for zero-mean periodic fields.

    On a period-L lattice of spacing eps the smallest nonzero eigenvalue of the
    negative three-point second difference is ``(4/eps**2) * sin(pi*eps/L)**2``;
    that value decreases toward ``(2*pi/L)**2`` as the lattice refines, so its
    reciprocal at the coarsest admitted spacing ``eps0`` bounds the whole family
    ``eps <= eps0``.
    """
    if not (0.0 < eps0 < L):
        raise ValidationError(f"need 0 < eps0 < L, got eps0={eps0}, L={L}")
    lam = (4.0 / eps0**2) * math.sin(math.pi * eps0 / L) ** 2
    return 1.0 / lam


@dataclass
class ValidationReport:
    """Outcome of the admissibility checks, one entry per check."""

    ok: bool
    strict_ok: bool
    relaxed_ok: bool
    kappa: float
    eps0: float
    checks: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "strict_ok": self.strict_ok,
            "relaxed_ok": self.relaxed_ok,
            "kappa": self.kappa,
            "eps0": self.eps0,
            "checks": [
                {"name": name, "ok": passed, "detail": detail} for name, passed, detail in self.checks
            ],
        }


def validate_model(spec: ModelSpec, eps0: float | None = None) -> ValidationReport:
    """Check that a model is admissible for stable simulation.

    Strict admissibility asks every coefficient to be nonnegative with
    ``A_0 > 0`` and ``A_n > 0``.  The relaxed alternative lets interior
    coefficients go negative as long as their weighted magnitude stays below
    half the top coefficient, ``sum |A_a| * kappa**(n-a) <= A_n / 2`` over the
    negative interior entries, with kappa from :func:`compute_kappa` at the
    coarsest admitted spacing (default ``L/8``).  The polynomial perturbation
    must carry no quadratic part (enforced at construction), must not depend on
    the first difference when n == 1, and must pass the sign certificate (all
    powers even, coefficients nonnegative).
    """
    if eps0 is None:
        eps0 = spec.L / 8.0
    kappa = compute_kappa(spec.L, eps0)
    A = np.asarray(spec.A, dtype=float)
    n = spec.n
    checks = []

    an_ok = A[n] != 0.0
    checks.append(("top_coefficient_nonzero", an_ok, f"A_n = {A[n]!r}"))

    if n == 1:
        r_dep_ok = all(q == 0 for _, q, _ in spec.R.terms)
        checks.append(
            ("r_first_difference_unused_when_n_is_1", r_dep_ok,
             "n == 1 allows R to depend on the displacement only")
        )
    else:
        r_dep_ok = True

    cert_ok = all(p % 2 == 0 and q % 2 == 0 and c >= 0.0 for p, q, c in spec.R.terms)
    checks.append(
        ("r_sign_certificate", cert_ok,
         "sufficient condition for R >= 0: every power even, every coefficient >= 0")
    )

    strict_ok = bool(A[0] > 0.0 and A[n] > 0.0 and np.all(A[1:n] >= 0.0))
    checks.append(("strict_admissibility", strict_ok, f"A = {tuple(A.tolist())}"))

    neg_weight = sum(abs(A[a]) * kappa ** (n - a) for a in range(1, n) if A[a] < 0.0)
    relaxed_ok = bool(A[0] >= 0.0 and A[n] > 0.0 and neg_weight <= 0.5 * A[n])
    checks.append(
        ("relaxed_admissibility", relaxed_ok,
         f"negative-interior weight {neg_weight:.6g} vs A_n/2 = {0.5 * A[n]:.6g} "
         f"(kappa = {kappa:.6g} at eps0 = {eps0:.6g})")
    )

    ok = bool(an_ok and r_dep_ok and cert_ok and (strict_ok or relaxed_ok))
    return ValidationReport(ok=ok, strict_ok=strict_ok, relaxed_ok=relaxed_ok,
                            kappa=kappa, eps0=eps0, checks=checks)


def _trig_deriv(coeffs_cos, coeffs_sin, L, x, d):
    """Exact d-th derivative of a finite trig series at x (scalar or array)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    shift = d * math.pi / 2.0
    for m, a in enumerate(coeffs_cos):
        if a == 0.0:
            continue
        w = 2.0 * math.pi * m / L
        if m == 0:
            out += a if d == 0 else 0.0
        else:
            out += a * w**d * np.cos(w * x + shift)
    for m, b in enumerate(coeffs_sin):
        if b == 0.0 or m == 0:
            continue
        w = 2.0 * math.pi * m / L
        out += b * w**d * np.sin(w * x + shift)
    return out if out.shape else float(out)


def _envelope_poly(L: float, power: int) -> Polynomial:
    base = Polynomial([0.0, 1.0 / L, -1.0 / L**2])  # x*(L-x)/L**2
    return base**power


def eval_initial(spec: ModelSpec, x, d: int = 0, which: str = "u"):
    """Exact value of the d-th spatial derivative of the initial data at x.

    ``which`` selects the displacement ("u") or velocity ("v") component.
    Derivative orders above ``2n + 2`` are outside the regularity the rest of
    the pipeline relies on and are rejected.
    """
    if which not in ("u", "v"):
        raise ValueError(f"which must be 'u' or 'v', got {which!r}")
    if d < 0 or d > 2 * spec.n + 2:
        raise ValueError(f"derivative order {d} outside [0, {2 * spec.n + 2}]")
    data = spec.initial
    ccos = data.u_cos if which == "u" else data.v_cos
    csin = data.u_sin if which == "u" else data.v_sin
    if data.kind == "trig":
        return _trig_deriv(ccos, csin, spec.L, x, d)
    # clamped: product rule against the polynomial envelope, all pieces exact
    x = np.asarray(x, dtype=float)
    env = _envelope_poly(spec.L, data.envelope_power)
    out = np.zeros(x.shape)
    for j in range(d + 1):
        pj = env.deriv(j) if j else env
        out += math.comb(d, j) * pj(x) * _trig_deriv(ccos, csin, spec.L, x, d - j)
    return out if out.shape else float(out)
