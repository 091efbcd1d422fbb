import math

import numpy as np
import pytest

from gradchain import (
    InitialData,
    ModelSpec,
    PolynomialR,
    ValidationError,
    compute_kappa,
    eval_initial,
    reduce_quadratic,
    validate_model,
)

TWO_PI = 2.0 * math.pi


def test_polynomial_r_rejects_low_degree():
    with pytest.raises(ValidationError):
        PolynomialR(terms=((1, 1, 0.5),))
    with pytest.raises(ValidationError):
        PolynomialR(terms=((2, 0, 0.5),))
    with pytest.raises(ValidationError):
        PolynomialR(terms=((-1, 4, 0.5),))
    PolynomialR(terms=((3, 0, 0.5), (0, 4, 1.0)))  # fine


def test_polynomial_r_value_and_derivatives():
    R = PolynomialR(terms=((4, 0, 0.3), (2, 2, 0.7), (0, 3, -0.2)))
    rng = np.random.default_rng(3)
    x0 = rng.standard_normal(50)
    x1 = rng.standard_normal(50)
    v = R.value(x0, x1)
    expected = 0.3 * x0**4 + 0.7 * x0**2 * x1**2 - 0.2 * x1**3
    assert np.allclose(v, expected, rtol=1e-13)

    h = 1e-6
    d0_fd = (R.value(x0 + h, x1) - R.value(x0 - h, x1)) / (2 * h)
    d1_fd = (R.value(x0, x1 + h) - R.value(x0, x1 - h)) / (2 * h)
    assert np.allclose(R.d0(x0, x1), d0_fd, rtol=1e-6, atol=1e-6)
    assert np.allclose(R.d1(x0, x1), d1_fd, rtol=1e-6, atol=1e-6)
    d01_fd = (R.d0(x0, x1 + h) - R.d0(x0, x1 - h)) / (2 * h)
    d11_fd = (R.d1(x0, x1 + h) - R.d1(x0, x1 - h)) / (2 * h)
    assert np.allclose(R.d01(x0, x1), d01_fd, rtol=1e-6, atol=1e-6)
    assert np.allclose(R.d11(x0, x1), d11_fd, rtol=1e-6, atol=1e-6)


def test_polynomial_r_is_zero():
    assert PolynomialR().is_zero
    assert PolynomialR(terms=((4, 0, 0.0),)).is_zero
    assert not PolynomialR(terms=((4, 0, 0.1),)).is_zero


def test_model_spec_validation():
    with pytest.raises(ValidationError):
        ModelSpec(n=0, A=(1.0,))
    with pytest.raises(ValidationError):
        ModelSpec(n=2, A=(1.0, 1.0))  # wrong length
    with pytest.raises(ValidationError):
        ModelSpec(n=1, A=(1.0, 1.0), L=-1.0)
    with pytest.raises(ValidationError):
        ModelSpec(n=1, A=(1.0, 1.0), bc="weird")
    # periodic needs trig data, clamped needs clamped data
    with pytest.raises(ValidationError):
        ModelSpec(n=1, A=(1.0, 1.0), bc="periodic",
                  initial=InitialData(kind="clamped", envelope_power=2))
    with pytest.raises(ValidationError):
        ModelSpec(n=2, A=(0.0, 0.0, 1.0), bc="dirichlet",
                  initial=InitialData(kind="trig", u_cos=(0.0, 1.0)))
    # clamped envelope must flatten at least n derivatives
    with pytest.raises(ValidationError):
        ModelSpec(n=3, A=(0.0, 0.0, 0.0, 1.0), bc="dirichlet",
                  initial=InitialData(kind="clamped", u_cos=(1.0,), envelope_power=2))


def test_reduce_quadratic_requires_symmetry():
    Q = np.array([[1.0, 0.5], [0.4, 1.0]])
    with pytest.raises(ValidationError):
        reduce_quadratic(Q)


def test_reduce_quadratic_diagonal_passthrough():
    # diagonal couplings are already squared derivatives: A_g = Q[g, g]
    Q = np.diag([2.0, 3.0, 4.0])
    A = reduce_quadratic(Q)
    assert np.allclose(A, [2.0, 3.0, 4.0], rtol=0, atol=0)


def test_reduce_quadratic_cross_terms():
    # coupling D^0 u * D^2 u integrates by parts onto -|D^1 u|^2
    Q = np.zeros((3, 3))
    Q[0, 2] = Q[2, 0] = 0.5
    A = reduce_quadratic(Q)
    assert np.allclose(A, [0.0, -1.0, 0.0])
    # odd-total couplings vanish outright
    Q = np.zeros((2, 2))
    Q[0, 1] = Q[1, 0] = 0.7
    assert np.allclose(reduce_quadratic(Q), [0.0, 0.0])


def test_reduce_quadratic_definition():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        Q = rng.standard_normal((n + 1, n + 1))
        Q = 0.5 * (Q + Q.T)
        A = reduce_quadratic(Q)
        for g in range(n + 1):
            acc = 0.0
            for a in range(n + 1):
                for b in range(n + 1):
                    if a + b == 2 * g:
                        acc += Q[a, b] * ((-1) ** a + (-1) ** b)
            assert math.isclose(A[g], 0.5 * acc * (-1) ** g, rel_tol=1e-13, abs_tol=1e-13)


def test_compute_kappa():
    # reciprocal of the smallest nonzero eigenvalue of the minus second
    # difference at the coarsest admitted spacing
    L = TWO_PI
    eps0 = L / 8.0
    lam = (4.0 / eps0**2) * math.sin(math.pi * eps0 / L) ** 2
    assert math.isclose(compute_kappa(L, eps0), 1.0 / lam, rel_tol=1e-15)
    # frozen values of the formula above
    assert math.isclose(compute_kappa(L, eps0), 1.0530292875455147, rel_tol=1e-12)
    assert math.isclose(compute_kappa(L, math.pi / 8.0), 1.0129507467218792, rel_tol=1e-12)
    with pytest.raises(ValidationError):
        compute_kappa(L, 0.0)
    with pytest.raises(ValidationError):
        compute_kappa(L, 2 * L)


def test_compute_kappa_against_eigen_oracle():
    # reciprocal of the smallest nonzero eigenvalue of the dense -second
    # difference matrix on the coarsest lattice
    L = TWO_PI
    N = 16
    eps0 = L / N
    M = np.zeros((N, N))
    for i in range(N):
        M[i, i] = 2.0
        M[i, (i + 1) % N] = -1.0
        M[i, (i - 1) % N] = -1.0
    M /= eps0**2
    lams = np.sort(np.linalg.eigvalsh(M))
    assert lams[0] < 1e-10  # the constant field
    assert math.isclose(compute_kappa(L, eps0), 1.0 / lams[1], rel_tol=1e-10)


def test_compute_kappa_refines_toward_continuum():
    L = TWO_PI
    # as eps0 shrinks, kappa increases toward (L / (2 pi))^2 = 1
    k8 = compute_kappa(L, L / 8)
    k64 = compute_kappa(L, L / 64)
    assert k8 > k64 > (L / TWO_PI) ** 2 * 0.999


def test_validate_strict_and_relaxed():
    # beam chain: A_0 = A_1 = 0 fails strict but passes relaxed
    spec = ModelSpec(n=2, A=(0.0, 0.0, 1.0), initial=InitialData(kind="trig", u_cos=(0.0, 1.0)))
    rep = validate_model(spec)
    assert rep.ok and not rep.strict_ok and rep.relaxed_ok

    spec = ModelSpec(n=2, A=(1.0, 0.5, 1.0), initial=InitialData(kind="trig", u_cos=(0.0, 1.0)))
    rep = validate_model(spec)
    assert rep.ok and rep.strict_ok

    # vanishing top coefficient is always rejected
    spec = ModelSpec(n=2, A=(1.0, 1.0, 0.0), initial=InitialData(kind="trig", u_cos=(0.0, 1.0)))
    rep = validate_model(spec)
    assert not rep.ok
    names = {name for name, okflag, _ in rep.checks if not okflag}
    assert "top_coefficient_nonzero" in names


def test_validate_relaxed_negativity_budget():
    # a slightly negative middle weight is fine, a hugely negative one is not
    small = ModelSpec(n=2, A=(0.1, -0.01, 1.0), initial=InitialData(kind="trig", u_cos=(0.0, 1.0)))
    assert validate_model(small).ok
    big = ModelSpec(n=2, A=(0.1, -100.0, 1.0), initial=InitialData(kind="trig", u_cos=(0.0, 1.0)))
    assert not validate_model(big).ok


def test_validate_r_constraints():
    # n = 1 forbids difference-dependent perturbations
    bad = ModelSpec(n=1, A=(1.0, 1.0), R=PolynomialR(terms=((0, 4, 0.1),)),
                    initial=InitialData(kind="trig", u_cos=(0.0, 1.0)))
    assert not validate_model(bad).ok
    good = ModelSpec(n=1, A=(1.0, 1.0), R=PolynomialR(terms=((4, 0, 0.1),)),
                     initial=InitialData(kind="trig", u_cos=(0.0, 1.0)))
    assert validate_model(good).ok
    # sign certificate: odd powers or negative coefficients fail
    odd = ModelSpec(n=2, A=(1.0, 0.0, 1.0), R=PolynomialR(terms=((3, 0, 0.1),)),
                    initial=InitialData(kind="trig", u_cos=(0.0, 1.0)))
    assert not validate_model(odd).ok
    neg = ModelSpec(n=2, A=(1.0, 0.0, 1.0), R=PolynomialR(terms=((4, 0, -0.1),)),
                    initial=InitialData(kind="trig", u_cos=(0.0, 1.0)))
    assert not validate_model(neg).ok


def test_eval_initial_trig_derivatives():
    spec = ModelSpec(n=2, A=(0.0, 0.0, 1.0), L=TWO_PI,
                     initial=InitialData(kind="trig", u_cos=(0.5, 0.0, 1.0), u_sin=(0.0, 2.0)))
    x = np.linspace(0.0, TWO_PI, 37)
    u = eval_initial(spec, x, 0, "u")
    expected = 0.5 + np.cos(2 * x) + 2.0 * np.sin(x)
    assert np.allclose(u, expected, rtol=1e-13, atol=1e-13)
    # derivative vs central differences
    h = 1e-6
    for d in (1, 2, 3):
        fd = (eval_initial(spec, x + h, d - 1, "u") - eval_initial(spec, x - h, d - 1, "u")) / (2 * h)
        assert np.allclose(eval_initial(spec, x, d, "u"), fd, rtol=1e-7, atol=1e-5)


def test_eval_initial_clamped():
    spec = ModelSpec(n=2, A=(0.0, 0.0, 1.0), bc="dirichlet", L=TWO_PI,
                     initial=InitialData(kind="clamped", u_cos=(1.0,), envelope_power=2))
    L = spec.L
    x = np.linspace(0.0, L, 41)
    u = eval_initial(spec, x, 0, "u")
    assert np.allclose(u, (x * (L - x) / L**2) ** 2, rtol=1e-13, atol=1e-15)
    # value and first derivative vanish at both ends (envelope power 2)
    for d in (0, 1):
        assert abs(eval_initial(spec, 0.0, d, "u")) < 1e-15
        assert abs(eval_initial(spec, L, d, "u")) < 1e-15
    # but the second derivative does not
    assert abs(eval_initial(spec, 0.0, 2, "u")) > 1e-3
    h = 1e-5
    for d in (1, 2, 3):
        fd = (eval_initial(spec, x + h, d - 1, "u") - eval_initial(spec, x - h, d - 1, "u")) / (2 * h)
        assert np.allclose(eval_initial(spec, x, d, "u"), fd, rtol=1e-6, atol=1e-6)


def test_eval_initial_errors():
    spec = ModelSpec(n=1, A=(1.0, 1.0), initial=InitialData(kind="trig", u_cos=(0.0, 1.0)))
    with pytest.raises(ValueError):
        eval_initial(spec, 0.0, 2 * spec.n + 3, "u")
    with pytest.raises(ValueError):
        eval_initial(spec, 0.0, 0, "w")


def test_velocity_slot_is_independent():
    spec = ModelSpec(n=1, A=(1.0, 1.0),
                     initial=InitialData(kind="trig", u_cos=(0.0, 1.0), v_sin=(0.0, 0.0, 3.0)))
    x = np.array([0.3, 1.1])
    assert np.allclose(eval_initial(spec, x, 0, "v"), 3.0 * np.sin(2 * x), rtol=1e-13)
    assert np.allclose(eval_initial(spec, x, 0, "u"), np.cos(x), rtol=1e-13)
