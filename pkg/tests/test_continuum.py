import math

import numpy as np
import pytest

from gradchain import (
    FineTrajectory,
    InitialData,
    ModelSpec,
    PolynomialR,
    UnsupportedModelError,
    ValidationError,
    discrete_dispersion_omega,
    dispersion_omega,
    eval_reference,
    fine_grid_oracle,
    spectral_solve,
)

TWO_PI = 2.0 * math.pi


def test_dispersion_known_values():
    assert math.isclose(dispersion_omega((0.0, 0.0, 1.0), 3.0), 9.0, rel_tol=1e-14)
    assert math.isclose(dispersion_omega((1.0, 0.0, 1.0), 2.0),
                        math.sqrt(1.0 + 16.0), rel_tol=1e-14)
    assert math.isclose(dispersion_omega((0.0, 1.0), 0.5), 0.5, rel_tol=1e-14)
    ks = np.array([0.0, 1.0, 2.0])
    got = dispersion_omega((0.0, 0.0, 1.0), ks)
    assert np.allclose(got, ks**2)


def test_dispersion_rejects_imaginary_frequency():
    with pytest.raises(ValidationError):
        dispersion_omega((-1.0, 0.0, 0.01), 1.0)
    with pytest.raises(ValidationError):
        discrete_dispersion_omega((-1.0, 0.0, 0.01), 0.5, 0.3)


def test_discrete_dispersion_approaches_limit():
    # second-order consistency: halving eps shrinks the gap about fourfold
    A = (1.0, 0.5, 1.0)
    k = 2.0
    exact = dispersion_omega(A, k)
    gaps = [abs(discrete_dispersion_omega(A, eps, k) - exact)
            for eps in (0.1, 0.05, 0.025)]
    assert gaps[0] / gaps[1] > 3.7
    assert gaps[1] / gaps[2] > 3.7


def test_spectral_single_mode_rotation():
    spec = ModelSpec(n=2, A=(0.0, 0.0, 1.0), R=PolynomialR(()),
                     initial=InitialData(u_sin=(0.0, 1.0)))
    t = 0.7
    sol = spectral_solve(spec, t)
    # mode 1 of the fourth-order chain has omega = 1
    x = np.linspace(0.0, TWO_PI, 17)
    u = eval_reference(sol, x, 0, "u")
    v = eval_reference(sol, x, 0, "v")
    assert np.abs(u - math.cos(t) * np.sin(x)).max() < 1e-14
    assert np.abs(v + math.sin(t) * np.sin(x)).max() < 1e-14


def test_spectral_zero_mode_drift():
    spec = ModelSpec(n=1, A=(0.0, 1.0), R=PolynomialR(()),
                     initial=InitialData(u_cos=(1.0,), v_cos=(0.5,)))
    sol = spectral_solve(spec, 4.0)
    assert math.isclose(float(eval_reference(sol, 0.3, 0, "u")), 1.0 + 4.0 * 0.5,
                        rel_tol=1e-14)


def test_spectral_guards():
    nl = ModelSpec(n=2, A=(0.0, 0.0, 1.0), R=PolynomialR(((4, 0, 0.1),)))
    with pytest.raises(UnsupportedModelError):
        spectral_solve(nl, 1.0)
    clamped = ModelSpec(n=2, A=(0.0, 0.0, 1.0), R=PolynomialR(()), bc="dirichlet",
                        initial=InitialData(kind="clamped", u_cos=(1.0,), envelope_power=2))
    with pytest.raises(UnsupportedModelError):
        spectral_solve(clamped, 1.0)


def test_eval_reference_derivatives_and_guards():
    spec = ModelSpec(n=2, A=(0.0, 0.0, 1.0), R=PolynomialR(()),
                     initial=InitialData(u_cos=(0.0, 0.0, 0.3), u_sin=(0.0, 2.0)))
    sol = spectral_solve(spec, 0.0)
    x = np.linspace(0.0, TWO_PI, 11)
    d1 = eval_reference(sol, x, 1, "u")
    expected = 0.3 * (-2.0) * np.sin(2 * x) + 2.0 * np.cos(x)
    assert np.abs(d1 - expected).max() < 1e-13
    d4 = eval_reference(sol, x, 4, "u")
    expected4 = 0.3 * 16.0 * np.cos(2 * x) + 2.0 * np.sin(x)
    assert np.abs(d4 - expected4).max() < 1e-12
    with pytest.raises(ValidationError):
        eval_reference(sol, x, 2 * spec.n + 2, "u")
    with pytest.raises(ValidationError):
        eval_reference(sol, x, 0, "speed")


def test_restrict_requires_nesting_and_ratio():
    spec = ModelSpec(n=2, A=(0.0, 0.0, 1.0), R=PolynomialR(()),
                     initial=InitialData(u_sin=(0.0, 1.0)))
    traj = FineTrajectory(spec=spec, N_fine=256, sample_times=(0.0,),
                          snapshots={0.0: (np.zeros(256), np.zeros(256))})
    with pytest.raises(ValidationError):
        traj.restrict(0.0, 24)  # 256 % 24 != 0
    with pytest.raises(ValidationError):
        traj.restrict(0.0, 64)  # ratio 4 < 8
    u, v = traj.restrict(0.0, 32)
    assert u.values.shape == (32,)


def test_restrict_time_lookup_tolerance():
    spec = ModelSpec(n=2, A=(0.0, 0.0, 1.0), R=PolynomialR(()),
                     initial=InitialData(u_sin=(0.0, 1.0)))
    traj = FineTrajectory(spec=spec, N_fine=128, sample_times=(0.5,),
                          snapshots={0.5: (np.ones(128), np.zeros(128))})
    u, _ = traj.restrict(0.5 * (1.0 + 1e-14), 16)
    assert np.all(u.values == 1.0)
    with pytest.raises(ValidationError):
        traj.restrict(0.51, 16)


def test_fine_oracle_matches_spectral_solution():
    # cheap cross-check: the Verlet oracle on a fine chain reproduces the
    # closed-form limiting solution to within the mesh's own O(eps^2) error
    spec = ModelSpec(n=2, A=(0.0, 0.0, 1.0), R=PolynomialR(()), T=0.5,
                     initial=InitialData(u_sin=(0.0, 1.0)))
    traj = fine_grid_oracle(spec, 256, [0.5])
    u, v = traj.restrict(0.5, 32)
    sol = spectral_solve(spec, 0.5)
    x = np.arange(32) * (spec.L / 32)
    assert np.abs(u.values - eval_reference(sol, x, 0, "u")).max() < 2e-4
    assert np.abs(v.values - eval_reference(sol, x, 0, "v")).max() < 2e-4


def test_fine_oracle_includes_initial_snapshot():
    spec = ModelSpec(n=2, A=(0.0, 0.0, 1.0), R=PolynomialR(()),
                     initial=InitialData(u_sin=(0.0, 1.0)))
    traj = fine_grid_oracle(spec, 128, [0.25])
    u0, v0 = traj.restrict(0.0, 16)
    x = np.arange(16) * (spec.L / 16)
    assert np.abs(u0.values - np.sin(x)).max() < 1e-13
    assert np.all(v0.values == 0.0)


def test_fine_oracle_clamped_endpoints():
    spec = ModelSpec(n=2, A=(0.0, 0.0, 1.0), R=PolynomialR(()), bc="dirichlet",
                     initial=InitialData(kind="clamped", u_cos=(1.0,), envelope_power=2))
    traj = fine_grid_oracle(spec, 128, [0.2])
    u, v = traj.restrict(0.2, 16)
    assert u.values.shape == (17,)
    assert u.values[0] == 0.0 and u.values[-1] == 0.0
    assert v.values[0] == 0.0 and v.values[-1] == 0.0
