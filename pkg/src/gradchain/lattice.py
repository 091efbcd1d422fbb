"""Lattice fields and discrete difference calculus on a 1D chain.

A field lives on equally spaced sites ``x_i = i * eps``.  Periodic fields store
``u_0 .. u_{N-1}`` with ``u_{N+k} = u_k``; clamped ("dirichlet") fields store
``u_0 .. u_N`` and are extended by zero outside that range, with the first and
last ``n`` stored sites frozen at zero when a gradient order n is in play.

Integrals are Riemann sums of the piecewise-constant extension at resolution
eps: the cell ``[i*eps, (i+1)*eps)`` carries the value at site i, so periodic
sums run over all stored sites and clamped sums over sites ``0 .. N-1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LatticeMismatchError, ValidationError

__all__ = [
    "LatticeField",
    "dplus",
    "dminus",
    "laplacian",
    "dalpha",
    "sample_function",
    "sample_initial",
    "inner",
    "eps_norm",
]


@dataclass
class LatticeField:
    """Values on a uniform chain together with its geometry."""

    eps: float
    bc: str
    values: np.ndarray

    def __post_init__(self):
        if self.bc not in ("periodic", "dirichlet"):
            raise ValidationError(f"unknown boundary kind {self.bc!r}")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 2:
            raise ValidationError("field values must be a 1D array with at least two sites")

    @property
    def N(self) -> int:
        """Number of cells per period (periodic) or per span (clamped)."""
        return self.values.size if self.bc == "periodic" else self.values.size - 1

    @property
    def L(self) -> float:
        return self.N * self.eps

    def x(self) -> np.ndarray:
        return np.arange(self.values.size) * self.eps

    def copy(self) -> "LatticeField":
        return LatticeField(self.eps, self.bc, self.values.copy())

    def same_lattice(self, other: "LatticeField") -> bool:
        return (
            self.bc == other.bc
            and self.values.size == other.values.size
            and math.isclose(self.eps, other.eps, rel_tol=1e-12, abs_tol=0.0)
        )


def _require_same(f: LatticeField, g: LatticeField):
    if not f.same_lattice(g):
        raise LatticeMismatchError(
            f"fields disagree: ({f.eps}, {f.values.size}, {f.bc}) vs ({g.eps}, {g.values.size}, {g.bc})"
        )


# ---------------------------------------------------------------------------
# array-level operators; "zero" variants assume zero extension beyond the array
# ---------------------------------------------------------------------------

def dplus_array(u: np.ndarray, eps: float, bc: str) -> np.ndarray:
    if bc == "periodic":
        return (np.roll(u, -1) - u) / eps
    out = np.empty_like(u)
    out[:-1] = u[1:] - u[:-1]
    out[-1] = -u[-1]
    return out / eps


def dminus_array(u: np.ndarray, eps: float, bc: str) -> np.ndarray:
    if bc == "periodic":
        return (u - np.roll(u, 1)) / eps
    out = np.empty_like(u)
    out[1:] = u[1:] - u[:-1]
    out[0] = u[0]
    return out / eps


def laplacian_array(u: np.ndarray, eps: float, bc: str) -> np.ndarray:
    if bc == "periodic":
        return (np.roll(u, -1) + np.roll(u, 1) - 2.0 * u) / eps**2
    out = -2.0 * u
    out[:-1] += u[1:]
    out[1:] += u[:-1]
    return out / eps**2


def dalpha_array(u: np.ndarray, eps: float, alpha: int, bc: str) -> np.ndarray:
    """Difference operator of order alpha: even orders iterate the three-point
    second difference, odd orders append one forward difference."""
    if alpha < 0:
        raise ValidationError(f"difference order must be >= 0, got {alpha}")
    out = u.astype(float, copy=True)
    for _ in range(alpha // 2):
        out = laplacian_array(out, eps, bc)
    if alpha % 2:
        out = dplus_array(out, eps, bc)
    return out


def padded(u: np.ndarray, pad: int) -> np.ndarray:
    """Zero-extend a clamped-field array by `pad` sites on each side."""
    return np.pad(u, pad)


# ---------------------------------------------------------------------------
# field-level wrappers
# ---------------------------------------------------------------------------

def dplus(f: LatticeField) -> LatticeField:
    return LatticeField(f.eps, f.bc, dplus_array(f.values, f.eps, f.bc))


def dminus(f: LatticeField) -> LatticeField:
    return LatticeField(f.eps, f.bc, dminus_array(f.values, f.eps, f.bc))


def laplacian(f: LatticeField) -> LatticeField:
    return LatticeField(f.eps, f.bc, laplacian_array(f.values, f.eps, f.bc))


def dalpha(f: LatticeField, alpha: int) -> LatticeField:
    if f.bc == "periodic":
        return LatticeField(f.eps, f.bc, dalpha_array(f.values, f.eps, alpha, f.bc))
    # compute on a zero-padded copy so intermediate spread is never truncated
    pad = alpha + 1
    wide = dalpha_array(padded(f.values, pad), f.eps, alpha, "dirichlet")
    return LatticeField(f.eps, f.bc, wide[pad:-pad])


def sample_function(g, eps: float, N: int, bc: str, n_frozen: int = 0,
                    end_tol: float = 1e-10) -> LatticeField:
    """Sample a callable at the lattice points.

    For clamped lattices the sampled data must vanish at both domain ends
    (within `end_tol`); the first/last `n_frozen` stored sites are then pinned
    to exactly zero, matching the constraint the dynamics enforces.
    """
    if N < 2:
        raise ValidationError(f"need at least 2 cells, got N={N}")
    if bc == "periodic":
        x = np.arange(N) * eps
        return LatticeField(eps, bc, np.asarray(g(x), dtype=float))
    x = np.arange(N + 1) * eps
    vals = np.asarray(g(x), dtype=float)
    if abs(vals[0]) > end_tol or abs(vals[-1]) > end_tol:
        raise ValidationError(
            f"clamped data must vanish at the ends: got {vals[0]!r} at 0, {vals[-1]!r} at L"
        )
    if n_frozen:
        vals[:n_frozen] = 0.0
        vals[N + 1 - n_frozen:] = 0.0
    return LatticeField(eps, bc, vals)


def sample_initial(spec, N: int, which: str = "u") -> LatticeField:
    """Sample the model's analytic initial data onto an N-cell lattice."""
    from .model import eval_initial  # local import to avoid a cycle

    eps = spec.L / N
    return sample_function(
        lambda x: eval_initial(spec, x, 0, which), eps, N, spec.bc,
        n_frozen=spec.n if spec.bc == "dirichlet" else 0,
    )


def inner(f: LatticeField, g: LatticeField) -> float:
    """Riemann-sum inner product of the piecewise-constant extensions."""
    _require_same(f, g)
    if f.bc == "periodic":
        return f.eps * float(np.dot(f.values, g.values))
    return f.eps * float(np.dot(f.values[:-1], g.values[:-1]))


def norm2(f: LatticeField) -> float:
    return inner(f, f)


def eps_norm(u: LatticeField, v: LatticeField, n: int) -> float:
    """Combined norm: velocity, displacement, and difference orders 1..n.

    Clamped fields are zero-extended so that no stencil spread is lost.
    """
    _require_same(u, v)
    if u.bc == "periodic":
        total = norm2(v) + norm2(u)
        for k in range(1, n + 1):
            total += norm2(dalpha(u, k))
        return math.sqrt(total)
    pad = n + 1
    uw = padded(u.values, pad)
    total = u.eps * float(np.dot(v.values, v.values)) + u.eps * float(np.dot(uw, uw))
    for k in range(1, n + 1):
        dk = dalpha_array(uw, u.eps, k, "dirichlet")
        total += u.eps * float(np.dot(dk, dk))
    return math.sqrt(total)
