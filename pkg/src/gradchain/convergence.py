"""Mesh-refinement studies: how fast chain trajectories approach the limit.

The deviation functional compares a chain state against a reference sampled
at the same lattice sites:

    ``W = (1/2) [ |du|^2 + |dv|^2 + sum_a c_a |D^a du|^2 ]``

with Riemann-sum norms at the chain resolution.  Beam-type runs ("elastica")
use the single weight ``c_2 = 1``; on clamped spans the displacement term is
dropped and all sums run over the zero-extended line so stencil spread past
the span is counted.  General runs weight each order with ``c_a = 2 A_a`` and
keep the displacement term.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .continuum import FineTrajectory, _spectral_fields, fine_grid_oracle
from .dynamics import SimState, energy, exact_linear_propagate, run_verlet
from .errors import ConfigError, DivergenceError, InsufficientDataError, LatticeMismatchError
from .lattice import LatticeField, dalpha_array, padded, sample_initial
from .model import ModelSpec
from .synthesis import assemble_stiffness

__all__ = [
    "DeviationWeights",
    "ScenarioInfo",
    "detect_scenario",
    "scenario_by_name",
    "deviation_W",
    "estimate_order",
    "RowResult",
    "ConvergenceReport",
    "sweep",
    "default_thresholds",
    "evaluate_verdicts",
]

ROUNDOFF_FLOOR = 1e-22


@dataclass(frozen=True)
class DeviationWeights:
    include_u: bool
    c: tuple


@dataclass(frozen=True)
class ScenarioInfo:
    name: str
    weights: DeviationWeights
    reference: str  # "spectral" | "fine"
    extrapolated: bool = False


def _is_beam_like(spec: ModelSpec) -> bool:
    A = spec.A
    return spec.is_linear and spec.n == 2 and A[0] == 0.0 and A[1] == 0.0 and A[2] != 0.0


def detect_scenario(spec: ModelSpec) -> ScenarioInfo:
    """Classify a model into a measurement scenario.

    Clamped non-beam or nonlinear-clamped runs are flagged `extrapolated`:
    they reuse the machinery outside the regime the beam analysis covers.
    """
    beam = _is_beam_like(spec)
    if spec.bc == "dirichlet":
        if beam:
            w = DeviationWeights(include_u=False, c=(0.0, 0.0, 1.0))
            return ScenarioInfo("elastica-dirichlet", w, "fine", extrapolated=False)
        w = DeviationWeights(include_u=True, c=tuple(2.0 * a for a in spec.A))
        return ScenarioInfo("general-dirichlet", w, "fine", extrapolated=True)
    if beam:
        w = DeviationWeights(include_u=True, c=(0.0, 0.0, 1.0))
        return ScenarioInfo("elastica-periodic", w, "spectral", extrapolated=False)
    if spec.is_linear:
        w = DeviationWeights(include_u=True, c=tuple(2.0 * a for a in spec.A))
        return ScenarioInfo("general-linear", w, "spectral", extrapolated=False)
    w = DeviationWeights(include_u=True, c=tuple(2.0 * a for a in spec.A))
    return ScenarioInfo("nonlinear-periodic", w, "fine", extrapolated=False)


def scenario_by_name(spec: ModelSpec, name: str) -> ScenarioInfo:
    """Build a named scenario for a model, rejecting impossible pairings."""
    if name in ("auto", ""):
        return detect_scenario(spec)
    general = DeviationWeights(include_u=True, c=tuple(2.0 * a for a in spec.A))
    table = {
        "elastica-periodic": ScenarioInfo(name, DeviationWeights(True, (0.0, 0.0, 1.0)),
                                          "spectral", False),
        "elastica-dirichlet": ScenarioInfo(name, DeviationWeights(False, (0.0, 0.0, 1.0)),
                                           "fine", False),
        "general-linear": ScenarioInfo(name, general, "spectral", False),
        "nonlinear-periodic": ScenarioInfo(name, general, "fine", False),
        "general-dirichlet": ScenarioInfo(name, general, "fine", True),
    }
    if name not in table:
        raise ConfigError(f"unknown scenario {name!r}; known: {sorted(table)} or 'auto'")
    info = table[name]
    if info.reference == "spectral" and not (spec.is_linear and spec.bc == "periodic"):
        raise ConfigError(f"scenario {name!r} needs a linear periodic model")
    if name.endswith("dirichlet") and spec.bc != "dirichlet":
        raise ConfigError(f"scenario {name!r} needs clamped boundaries")
    return info


def deviation_W(ref_u: LatticeField, ref_v: LatticeField, state: SimState,
                weights: DeviationWeights) -> float:
    """Weighted squared deviation between a state and reference samples."""
    if not (ref_u.same_lattice(state.u) and ref_v.same_lattice(state.v)):
        raise LatticeMismatchError("reference and state live on different lattices")
    eps = state.u.eps
    du = ref_u.values - state.u.values
    dv = ref_v.values - state.v.values
    if state.u.bc == "dirichlet":
        pad = max(len(weights.c), 2)
        du = padded(du, pad)
        dv = padded(dv, pad)
        bc = "dirichlet"
    else:
        bc = "periodic"
    total = float(dv @ dv)
    if weights.include_u:
        total += float(du @ du)
    for a_ord, ca in enumerate(weights.c):
        if ca == 0.0:
            continue
        da = dalpha_array(du, eps, a_ord, bc) if a_ord else du
        total += ca * float(da @ da)
    return 0.5 * eps * total


def estimate_order(eps_values, W_values, floor: float = ROUNDOFF_FLOOR):
    """Least-squares slope of log W against log eps, skipping roundoff-floor rows.

    Returns ``(order, max_log_residual, rows_used)``.
    """
    eps_values = np.asarray(eps_values, dtype=float)
    W_values = np.asarray(W_values, dtype=float)
    keep = W_values > floor
    if int(keep.sum()) < 3:
        raise InsufficientDataError(
            f"only {int(keep.sum())} usable rows above the roundoff floor {floor}; need >= 3"
        )
    x = np.log(eps_values[keep])
    y = np.log(W_values[keep])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.abs(slope * x + intercept - y).max())
    return float(slope), residual, int(keep.sum())


@dataclass
class SampleRecord:
    t: float
    W: float
    E_total: float
    E_drift: float


@dataclass
class RowResult:
    N: int
    eps: float
    samples: list
    wall_s: float
    bound_ratio_max: float | None = None  # clamped runs: max |D2 u| / sqrt(2 E0 / eps)
    failed: bool = False

    @property
    def W_terminal(self) -> float:
        if self.failed or not self.samples:
            return math.nan
        return self.samples[-1].W

    @property
    def drift_max(self) -> float:
        if self.failed or not self.samples:
            return math.nan
        return max(s.E_drift for s in self.samples)


@dataclass
class ConvergenceReport:
    scenario: ScenarioInfo
    sample_times: tuple
    rows: list
    order: float | None = None
    order_residual: float | None = None
    rows_used: int = 0
    oracle_check: dict | None = None
    oracle_wall_s: float = 0.0
    notes: list = field(default_factory=list)

    def terminal_W(self) -> np.ndarray:
        return np.array([r.W_terminal for r in self.rows if not r.failed])

    def eps_values(self) -> np.ndarray:
        return np.array([r.eps for r in self.rows if not r.failed])

    @property
    def any_failed(self) -> bool:
        return any(r.failed for r in self.rows)


def _second_difference_max(state: SimState) -> float:
    pad = 2
    uw = padded(state.u.values, pad) if state.u.bc == "dirichlet" else state.u.values
    d2 = dalpha_array(uw, state.u.eps, 2, state.u.bc)
    return float(np.abs(d2).max())


def _reference_fields(scenario, spec, traj, t, N):
    if scenario.reference == "spectral":
        return _spectral_fields(spec, t, N)
    return traj.restrict(t, N)


def _run_row(spec, scenario, N, sample_times, integrator, cfl, traj):
    t_start = time.perf_counter()
    eps = spec.L / N
    net = assemble_stiffness(spec.A, eps, N, spec.bc)
    u0 = sample_initial(spec, N, "u")
    v0 = sample_initial(spec, N, "v")
    state0 = SimState(0.0, u0, v0)
    E0 = energy(spec, net, state0).total
    try:
        if integrator == "exact":
            states = [exact_linear_propagate(spec, state0, t) for t in sample_times]
        else:
            states = run_verlet(spec, net, state0, list(sample_times), cfl=cfl)
    except DivergenceError:
        wall = time.perf_counter() - t_start
        return RowResult(N=N, eps=eps, samples=[], wall_s=wall, failed=True)
    samples = []
    bound_ratio = None
    for st in states:
        eb = energy(spec, net, st)
        drift = abs(eb.total - E0) / max(abs(E0), 1e-300)
        ref_u, ref_v = _reference_fields(scenario, spec, traj, st.t, N)
        W = deviation_W(ref_u, ref_v, st, scenario.weights)
        samples.append(SampleRecord(t=st.t, W=W, E_total=eb.total, E_drift=drift))
        if spec.bc == "dirichlet":
            cap = math.sqrt(2.0 * E0 / eps)
            ratio = _second_difference_max(st) / cap if cap > 0 else 0.0
            bound_ratio = ratio if bound_ratio is None else max(bound_ratio, ratio)
    wall = time.perf_counter() - t_start
    return RowResult(N=N, eps=eps, samples=samples, wall_s=wall, bound_ratio_max=bound_ratio)


def sweep(spec: ModelSpec, N_list, sample_times=None, integrator: str = "verlet",
          cfl: float | None = None, ratio: int = 16, scenario: ScenarioInfo | None = None,
          oracle_cfl: float | None = None, self_check: bool = True,
          threads: int = 1) -> ConvergenceReport:
    """Run the model over a family of meshes and measure the deviation decay.

    Fine-grid references share one trajectory at ``ratio * max(N)`` cells;
    coarser rows then see an even larger effective refinement.  The optional
    self-check re-runs the reference at half the fine resolution on the
    second-finest row and reports the distance between the two references in
    the same deviation metric.
    """
    N_list = sorted(int(N) for N in N_list)
    if len(set(N_list)) != len(N_list):
        raise ConfigError("duplicate mesh sizes in sweep")
    if sample_times is None:
        sample_times = tuple(spec.T * (i + 1) / 5.0 for i in range(5))
    sample_times = tuple(float(t) for t in sample_times)
    if scenario is None:
        scenario = detect_scenario(spec)
    if not N_list:
        return ConvergenceReport(scenario=scenario, sample_times=sample_times, rows=[],
                                 notes=["empty mesh list: nothing to run"])
    if integrator not in ("verlet", "exact"):
        raise ConfigError(f"unknown integrator {integrator!r}")
    if integrator == "exact" and not (spec.is_linear and spec.bc == "periodic"):
        raise ConfigError("the exact integrator needs a linear periodic model")

    traj = None
    oracle_wall = 0.0
    notes = []
    if scenario.reference == "fine":
        if ratio < 8:
            raise ConfigError(f"refinement ratio {ratio} below the trusted minimum 8")
        N_fine = ratio * N_list[-1]
        for N in N_list:
            if N_fine % N != 0 or N_fine // N < 8:
                raise ConfigError(f"mesh N = {N} does not nest in the fine chain N = {N_fine}")
        t0 = time.perf_counter()
        traj = fine_grid_oracle(spec, N_fine, sample_times, cfl=oracle_cfl)
        oracle_wall = time.perf_counter() - t0
        notes.append(f"fine reference at N = {N_fine} (ratio {ratio} vs finest row)")

    if threads > 1 and len(N_list) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(
                lambda N: _run_row(spec, scenario, N, sample_times, integrator, cfl, traj),
                N_list,
            ))
    else:
        rows = [_run_row(spec, scenario, N, sample_times, integrator, cfl, traj) for N in N_list]

    report = ConvergenceReport(scenario=scenario, sample_times=sample_times, rows=rows,
                               oracle_wall_s=oracle_wall, notes=notes)
    try:
        order, resid, used = estimate_order(report.eps_values(), report.terminal_W())
        report.order, report.order_residual, report.rows_used = order, resid, used
    except InsufficientDataError as exc:
        report.notes.append(str(exc))

    if traj is not None and self_check and len(N_list) >= 2:
        N_c = N_list[-2]
        N_fine_b = (ratio * N_list[-1]) // 2
        if N_fine_b % N_c == 0 and N_fine_b // N_c >= 8:
            t0 = time.perf_counter()
            traj_b = fine_grid_oracle(spec, N_fine_b, sample_times, cfl=oracle_cfl)
            tb_wall = time.perf_counter() - t0
            T = sample_times[-1]
            au, av = traj.restrict(T, N_c)
            bu, bv = traj_b.restrict(T, N_c)
            dist = deviation_W(au, av, SimState(T, bu, bv), scenario.weights)
            smallest = float(report.terminal_W().min())
            report.oracle_check = {
                "N": N_c,
                "ratio_hi": (ratio * N_list[-1]) // N_c,
                "ratio_lo": N_fine_b // N_c,
                "distance": dist,
                "smallest_W": smallest,
                "ok": bool(dist < 0.10 * smallest),
                "wall_s": tb_wall,
            }
        else:
            report.notes.append("self-check skipped: half-resolution reference would not nest")
    return report


def default_thresholds(scenario_name: str) -> dict:
    table = {
        "elastica-periodic": {"monotone": True, "order_min": 1.9, "terminal_ratio_max": 1e-4},
        "elastica-dirichlet": {"monotone": True, "order_min": 0.45, "boundary_bound": True},
        "general-linear": {"monotone": True, "order_min": 1.9},
        "nonlinear-periodic": {"monotone": True, "oracle_check": True},
        "general-dirichlet": {"monotone": True, "order_min": 0.45},
    }
    return dict(table.get(scenario_name, {"monotone": True}))


def evaluate_verdicts(report: ConvergenceReport, thresholds: dict | None = None) -> dict:
    """Apply scenario thresholds to a finished report; returns named verdicts."""
    th = default_thresholds(report.scenario.name)
    if thresholds:
        th.update(thresholds)
    W = report.terminal_W()
    verdicts = {}
    if report.any_failed:
        verdicts["all_rows_finished"] = False
    if th.get("monotone"):
        verdicts["monotone_decrease"] = bool(np.all(np.diff(W) < 0.0))
    if "order_min" in th:
        verdicts["order"] = bool(report.order is not None and report.order >= th["order_min"])
    if "terminal_ratio_max" in th and W.size >= 2:
        verdicts["terminal_ratio"] = bool(W[-1] <= th["terminal_ratio_max"] * W[0])
    if th.get("boundary_bound"):
        verdicts["boundary_bound"] = all(
            r.bound_ratio_max is not None and r.bound_ratio_max <= 1.0 for r in report.rows
        )
    if th.get("oracle_check"):
        verdicts["oracle_check"] = bool(report.oracle_check and report.oracle_check["ok"])
    verdicts["pass"] = all(verdicts.values()) if verdicts else True
    return verdicts
