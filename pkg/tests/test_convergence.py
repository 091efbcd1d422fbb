import math

import numpy as np
import pytest

from gradchain import (
    ConfigError,
    DeviationWeights,
    InitialData,
    InsufficientDataError,
    LatticeField,
    LatticeMismatchError,
    ModelSpec,
    PolynomialR,
    SimState,
    assemble_stiffness,
    default_thresholds,
    detect_scenario,
    deviation_W,
    estimate_order,
    evaluate_verdicts,
    fine_grid_oracle,
    run_verlet,
    scenario_by_name,
    sweep,
)
from gradchain.lattice import dalpha_array, padded, sample_initial

TWO_PI = 2.0 * math.pi


def _periodic_beam(**kw):
    kw.setdefault("initial", InitialData(u_sin=(0.0, 1.0)))
    return ModelSpec(n=2, A=(0.0, 0.0, 1.0), R=PolynomialR(()), **kw)


def _clamped_beam(**kw):
    kw.setdefault("initial", InitialData(kind="clamped", u_cos=(1.0,), envelope_power=2))
    return ModelSpec(n=2, A=(0.0, 0.0, 1.0), R=PolynomialR(()), bc="dirichlet", **kw)


# ---------------------------------------------------------------- deviation


def test_deviation_zero_for_identical_states():
    N = 32
    eps = TWO_PI / N
    rng = np.random.default_rng(0)
    u = LatticeField(eps, "periodic", rng.standard_normal(N))
    v = LatticeField(eps, "periodic", rng.standard_normal(N))
    w = DeviationWeights(include_u=True, c=(0.0, 0.0, 1.0))
    assert deviation_W(u, v, SimState(0.0, u, v), w) == 0.0


def test_deviation_matches_hand_sum_periodic():
    N = 16
    eps = TWO_PI / N
    rng = np.random.default_rng(1)
    ru, rv = rng.standard_normal(N), rng.standard_normal(N)
    su, sv = rng.standard_normal(N), rng.standard_normal(N)
    w = DeviationWeights(include_u=True, c=(0.0, 0.5, 2.0))
    got = deviation_W(LatticeField(eps, "periodic", ru), LatticeField(eps, "periodic", rv),
                      SimState(0.0, LatticeField(eps, "periodic", su),
                               LatticeField(eps, "periodic", sv)), w)
    du, dv = ru - su, rv - sv
    d1 = dalpha_array(du, eps, 1, "periodic")
    d2 = dalpha_array(du, eps, 2, "periodic")
    want = 0.5 * eps * (du @ du + dv @ dv + 0.5 * (d1 @ d1) + 2.0 * (d2 @ d2))
    assert math.isclose(got, want, rel_tol=1e-13)


def test_deviation_dirichlet_counts_stencil_overhang():
    # differences of the zero-extended mismatch reach past the span ends;
    # dropping that overhang would undercount the deviation
    N = 12
    eps = 1.0
    du = np.zeros(N + 1)
    du[1] = 1.0  # next to the left end
    zero = np.zeros(N + 1)
    w = DeviationWeights(include_u=False, c=(0.0, 0.0, 1.0))
    got = deviation_W(LatticeField(eps, "dirichlet", du), LatticeField(eps, "dirichlet", zero),
                      SimState(0.0, LatticeField(eps, "dirichlet", zero),
                               LatticeField(eps, "dirichlet", zero)), w)
    d2 = dalpha_array(padded(du, 2), eps, 2, "dirichlet")
    want = 0.5 * eps * float(d2 @ d2)
    assert math.isclose(got, want, rel_tol=1e-14)
    # second differences of a unit spike: (1, -2, 1), squares summing to 6
    assert math.isclose(got, 3.0, rel_tol=1e-14)


def test_deviation_rejects_mismatched_lattices():
    u16 = LatticeField(TWO_PI / 16, "periodic", np.zeros(16))
    u32 = LatticeField(TWO_PI / 32, "periodic", np.zeros(32))
    w = DeviationWeights(include_u=True, c=(0.0, 0.0, 1.0))
    with pytest.raises(LatticeMismatchError):
        deviation_W(u32, u32, SimState(0.0, u16, u16), w)


def test_initial_deviation_vanishes_against_spectral_reference():
    spec = _periodic_beam()
    N = 32
    from gradchain.continuum import _spectral_fields
    ru, rv = _spectral_fields(spec, 0.0, N)
    st = SimState(0.0, sample_initial(spec, N, "u"), sample_initial(spec, N, "v"))
    scen = detect_scenario(spec)
    assert deviation_W(ru, rv, st, scen.weights) == 0.0


def test_initial_clamped_deviation_shrinks_with_mesh():
    # the coarse chain freezes a wider physical strip than the fine chain,
    # so even at t = 0 the deviation is nonzero -- but it must shrink
    spec = _clamped_beam(T=0.5)
    traj = fine_grid_oracle(spec, 1024, [0.5])
    scen = detect_scenario(spec)
    vals = []
    for N in (32, 64, 128):
        st = SimState(0.0, sample_initial(spec, N, "u"), sample_initial(spec, N, "v"))
        ru, rv = traj.restrict(0.0, N)
        vals.append(deviation_W(ru, rv, st, scen.weights))
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 0.5 * vals[0]


# ------------------------------------------------------------ order fitting


def test_estimate_order_recovers_power_laws():
    eps = np.array([0.2, 0.1, 0.05, 0.025])
    for p, C in ((2.0, 3.0), (0.5, 2.0), (4.0, 0.7)):
        order, resid, used = estimate_order(eps, C * eps**p)
        assert math.isclose(order, p, rel_tol=1e-10)
        assert resid < 1e-10
        assert used == 4


def test_estimate_order_skips_floor_rows():
    eps = np.array([0.2, 0.1, 0.05, 0.025])
    W = 3.0 * eps**2
    W[-1] = 1e-30  # roundoff-dominated row
    order, _, used = estimate_order(eps, W)
    assert used == 3
    assert math.isclose(order, 2.0, rel_tol=1e-10)


def test_estimate_order_needs_three_rows():
    with pytest.raises(InsufficientDataError):
        estimate_order([0.2, 0.1], [1.0, 0.25])
    with pytest.raises(InsufficientDataError):
        estimate_order([0.2, 0.1, 0.05], [1.0, 1e-30, 1e-30])


# ------------------------------------------------------------- scenarios


def test_detect_scenario_names():
    assert detect_scenario(_periodic_beam()).name == "elastica-periodic"
    assert detect_scenario(_clamped_beam()).name == "elastica-dirichlet"
    gen = ModelSpec(n=2, A=(1.0, 0.5, 1.0), R=PolynomialR(()))
    assert detect_scenario(gen).name == "general-linear"
    nl = ModelSpec(n=2, A=(1.0, 0.0, 1.0), R=PolynomialR(((4, 0, 0.1),)))
    assert detect_scenario(nl).name == "nonlinear-periodic"
    gd = ModelSpec(n=2, A=(1.0, 0.5, 1.0), R=PolynomialR(()), bc="dirichlet",
                   initial=InitialData(kind="clamped", u_cos=(1.0,), envelope_power=2))
    info = detect_scenario(gd)
    assert info.name == "general-dirichlet"
    assert info.extrapolated


def test_scenario_weights():
    info = detect_scenario(_periodic_beam())
    assert info.weights.include_u and info.weights.c == (0.0, 0.0, 1.0)
    info_d = detect_scenario(_clamped_beam())
    assert not info_d.weights.include_u
    gen = ModelSpec(n=2, A=(1.0, 0.5, 1.0), R=PolynomialR(()))
    assert detect_scenario(gen).weights.c == (2.0, 1.0, 2.0)


def test_scenario_by_name_guards():
    spec = _periodic_beam()
    assert scenario_by_name(spec, "auto").name == "elastica-periodic"
    assert scenario_by_name(spec, "general-linear").name == "general-linear"
    with pytest.raises(ConfigError):
        scenario_by_name(spec, "elastica-dirichlet")  # needs clamped ends
    with pytest.raises(ConfigError):
        scenario_by_name(_clamped_beam(), "elastica-periodic")
    with pytest.raises(ConfigError):
        scenario_by_name(spec, "no-such-scenario")
    nl = ModelSpec(n=2, A=(1.0, 0.0, 1.0), R=PolynomialR(((4, 0, 0.1),)))
    with pytest.raises(ConfigError):
        scenario_by_name(nl, "general-linear")  # spectral reference needs linear


# --------------------------------------------------------------- sweeps


def test_sweep_empty_mesh_list_is_not_an_error():
    rep = sweep(_periodic_beam(), [])
    assert rep.rows == []
    assert rep.order is None
    assert any("empty" in n for n in rep.notes)


def test_sweep_rejects_duplicates_and_bad_config():
    spec = _periodic_beam()
    with pytest.raises(ConfigError):
        sweep(spec, [32, 32])
    with pytest.raises(ConfigError):
        sweep(spec, [16, 32], integrator="rk4")
    nl = ModelSpec(n=2, A=(1.0, 0.0, 1.0), R=PolynomialR(((4, 0, 0.1),)))
    with pytest.raises(ConfigError):
        sweep(nl, [16, 32], integrator="exact")
    with pytest.raises(ConfigError):
        sweep(_clamped_beam(), [16, 32], ratio=4)
    with pytest.raises(ConfigError):
        sweep(_clamped_beam(), [24, 32], ratio=8)  # 256 does not nest 24


def test_sweep_elastica_periodic_exact():
    spec = _periodic_beam(T=1.0)
    rep = sweep(spec, [16, 32, 64], integrator="exact")
    assert rep.scenario.name == "elastica-periodic"
    W = rep.terminal_W()
    assert np.all(np.diff(W) < 0.0)
    assert rep.order is not None and rep.order > 3.5
    for row in rep.rows:
        assert row.drift_max <= 1e-12
    verdicts = evaluate_verdicts(rep, {"terminal_ratio_max": 1e-2})
    assert verdicts["pass"]
    # five default sample times ending at the horizon
    assert rep.sample_times[-1] == spec.T
    assert len(rep.rows[0].samples) == 5


def test_sweep_fine_reference_with_self_check():
    nl = ModelSpec(n=2, A=(1.0, 0.0, 1.0), R=PolynomialR(((4, 0, 0.1),)), T=0.5,
                   initial=InitialData(u_sin=(0.0, 0.5)))
    rep = sweep(nl, [8, 16], ratio=8)
    assert rep.scenario.name == "nonlinear-periodic"
    assert not rep.any_failed
    W = rep.terminal_W()
    assert W[1] < W[0]
    assert rep.order is None  # two rows cannot support a fit
    assert rep.oracle_check is not None
    for key in ("N", "ratio_hi", "ratio_lo", "distance", "smallest_W", "ok"):
        assert key in rep.oracle_check
    assert rep.oracle_check["ratio_hi"] == 16 and rep.oracle_check["ratio_lo"] == 8
    assert rep.oracle_wall_s > 0.0


def test_sweep_marks_diverged_rows_and_continues():
    # steps never exceed the sample span, so an unstable step needs a span
    # long enough that the target step is actually taken many times
    spec = _periodic_beam(T=1.0)
    rep = sweep(spec, [16, 32], cfl=3.0, sample_times=(200.0,))
    assert rep.any_failed
    assert all(r.failed for r in rep.rows)
    assert rep.terminal_W().size == 0
    verdicts = evaluate_verdicts(rep)
    assert verdicts["all_rows_finished"] is False
    assert verdicts["pass"] is False


def test_sweep_thread_pool_matches_serial():
    spec = _periodic_beam(T=0.5)
    a = sweep(spec, [16, 32, 64], integrator="exact")
    b = sweep(spec, [16, 32, 64], integrator="exact", threads=3)
    assert np.array_equal(a.terminal_W(), b.terminal_W())


def test_default_thresholds_cover_all_scenarios():
    for name in ("elastica-periodic", "elastica-dirichlet", "general-linear",
                 "nonlinear-periodic", "general-dirichlet"):
        th = default_thresholds(name)
        assert th.get("monotone") is True
    assert default_thresholds("elastica-periodic")["terminal_ratio_max"] == 1e-4
    assert default_thresholds("elastica-dirichlet")["boundary_bound"] is True


def test_clamped_sweep_reports_boundary_bound_ratio():
    spec = _clamped_beam(T=0.5)
    rep = sweep(spec, [16, 32], ratio=8, self_check=False)
    for row in rep.rows:
        assert row.bound_ratio_max is not None
        assert 0.0 < row.bound_ratio_max <= 1.0


def test_boundary_strip_coupling_decays_like_sqrt_eps():
    # the end-strip power leak: eps * | sum over the outermost sites of
    # (reference velocity) * (fourth difference of the chain state) | must
    # vanish as the mesh refines, at sqrt(eps) rate or better
    spec = _clamped_beam(T=0.5)
    traj = fine_grid_oracle(spec, 1024, [0.5])
    terms = []
    eps_vals = []
    for N in (32, 64, 128):
        eps = spec.L / N
        net = assemble_stiffness(spec.A, eps, N, "dirichlet")
        st0 = SimState(0.0, sample_initial(spec, N, "u"), sample_initial(spec, N, "v"))
        st = run_verlet(spec, net, st0, [0.5])[0]
        rv = traj.restrict(0.5, N)[1]
        d4 = dalpha_array(padded(st.u.values, 3), eps, 4, "dirichlet")
        strip = (0, 1, N - 1, N)
        terms.append(eps * abs(sum(rv.values[i] * d4[i + 3] for i in strip)))
        eps_vals.append(eps)
    assert terms[0] > terms[1] > terms[2]
    slope = np.polyfit(np.log(eps_vals), np.log(terms), 1)[0]
    assert slope >= 0.4
