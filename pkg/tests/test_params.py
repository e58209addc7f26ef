import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vessel_lab.params import ALPHA, canonical_parameters, commutant, phi, phi_generator, principal_cbrt


def test_literal_matrices():
    p = canonical_parameters()
    assert list(p.sigma1[0]) == [0, 0, 1]
    assert np.array_equal(p.sigma2, np.diag([1, 0, 0]))
    assert p.gamma[1, 2] == 1 and p.gamma[2, 1] == -1
    assert p.gamma_t[2, 2] == -1j
    paper = canonical_parameters("paper")
    assert paper.gamma_t[2, 2] == 1j
    np.testing.assert_array_equal(paper.sigma2_t, [[0, -1j, 0], [1j, 0, 0], [0, 0, 0]])


@pytest.mark.parametrize("sign", ["paper", "compatible"])
def test_parameter_invariants(sign):
    p = canonical_parameters(sign)
    np.testing.assert_array_equal(p.sigma1 @ p.sigma1, np.eye(3))
    np.testing.assert_array_equal(p.sigma1, p.sigma1.T)
    np.testing.assert_array_equal(p.sigma2 @ p.sigma2, p.sigma2)
    np.testing.assert_array_equal(p.gamma, -p.gamma.T)
    np.testing.assert_array_equal(p.sigma1_t, p.sigma1)
    np.testing.assert_array_equal(p.sigma2_t, p.sigma2_t.conj().T)
    off = p.gamma_t - np.diag(np.diag(p.gamma_t))
    assert not off.any() and p.gamma_t[0, 0] == 0 and p.gamma_t[1, 1] == 0


def test_parameters_read_only():
    p = canonical_parameters()
    with pytest.raises(ValueError):
        p.sigma1[0, 0] = 5


def test_unknown_convention():
    with pytest.raises(ValueError):
        canonical_parameters("other")


def test_alpha_is_cube_root_of_unity():
    assert abs(ALPHA ** 3 - 1) < 1e-15
    assert abs(1 + ALPHA + ALPHA ** 2) < 1e-15


@pytest.mark.parametrize("lam", [0, 1, -2 + 3j])
def test_phi_at_zero(lam):
    assert np.array_equal(phi(lam, 0.0), np.eye(3))


@pytest.mark.parametrize("x", [-1.5, 0.2, 2.0])
def test_phi_lambda_zero(x):
    np.testing.assert_allclose(phi(0, x), [[1, -x, -x * x / 2], [0, 1, x], [0, 0, 1]], atol=1e-15)


def test_phi_tiny_lambda_continuous():
    np.testing.assert_allclose(phi(1e-12, 1.3), phi(0, 1.3), atol=1e-11)


@pytest.mark.parametrize("lam", [1, -2 + 3j, 5 + 2j, -8, 0.3j])
@pytest.mark.parametrize("x", [0.1, 0.9, -2.5])
def test_phi_branch_independence(lam, x):
    k = principal_cbrt(lam)
    ref = phi(lam, x)
    for kk in (ALPHA * k, ALPHA ** 2 * k):
        assert np.abs(phi(lam, x, k=kk) - ref).max() <= 1e-12 * np.abs(ref).max()


def test_principal_cbrt_branch():
    assert principal_cbrt(8) == pytest.approx(2)
    z = principal_cbrt(-8)
    assert z ** 3 == pytest.approx(-8)
    assert abs(np.angle(z) - np.pi / 3) < 1e-14


def test_phi_ode_residual():
    rng = np.random.default_rng(3)
    h = 1e-4
    for _ in range(20):
        lam = complex(*rng.uniform(-7, 7, 2))
        if abs(lam) > 10:
            continue
        x = rng.uniform(-3, 3)
        d = (phi(lam, x + h) - phi(lam, x - h)) / (2 * h)
        P = phi(lam, x)
        assert np.abs(d - phi_generator(lam) @ P).max() <= 1e-6 * max(1.0, np.abs(P).max())


def test_phi_equation_form():
    p = canonical_parameters()
    lam, x, h = 2 - 1j, 0.7, 1e-4
    P = phi(lam, x)
    dP = (phi(lam, x + h) - phi(lam, x - h)) / (2 * h)
    assert np.abs(lam * p.sigma2 @ P - p.sigma1 @ dP + p.gamma @ P).max() < 1e-6


lam_st = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
x_st = st.floats(-3, 3)


@settings(max_examples=60, deadline=None)
@given(lam_st, x_st)
def test_phi_determinant_one(lam, x):
    assert abs(np.linalg.det(phi(lam, x)) - 1) <= 1e-10 * max(1.0, np.abs(phi(lam, x)).max() ** 2)


@settings(max_examples=60, deadline=None)
@given(lam_st, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_phi_group_law(lam, x, y):
    lhs = phi(lam, x + y)
    rhs = phi(lam, x) @ phi(lam, y)
    assert np.abs(lhs - rhs).max() <= 1e-9 * max(1.0, np.abs(lhs).max())


def test_commutant_examples():
    np.testing.assert_array_equal(commutant(1, 0, 0, 3.0), np.eye(3))
    np.testing.assert_array_equal(commutant(0, 1, 0, 2), [[0, 1, 0], [0, 0, -1], [-2, 0, 0]])
    np.testing.assert_array_equal(commutant(0, 0, 1, 2), [[0, 0, 1], [-2, 0, 0], [0, 2, 0]])


@settings(max_examples=60, deadline=None)
@given(lam_st, x_st, lam_st, lam_st, lam_st)
def test_commutant_commutes_with_phi(lam, x, a, b, c):
    Y = commutant(a, b, c, lam)
    P = phi(lam, x)
    scale = max(1.0, np.abs(Y).max() * np.abs(P).max())
    assert np.abs(Y @ P - P @ Y).max() <= 1e-10 * scale
