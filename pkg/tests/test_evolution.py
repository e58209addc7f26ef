import numpy as np
import pytest

from vessel_lab import numkernel as nk
from vessel_lab.errors import ConventionError, SylvesterSingular
from vessel_lab.evolution import (Propagator, compatibility_residual, generators, integrate_X,
                                  propagate, stack_B, stack_C, unstack_B, unstack_C)
from vessel_lab.params import canonical_parameters
from vessel_lab.realization import Realization, random_regular, random_symmetric

from conftest import crandn


def test_stacking_roundtrip(rng):
    B = crandn(rng, 4, 3)
    C = crandn(rng, 3, 4)
    assert np.array_equal(unstack_B(stack_B(B), 4), B)
    assert np.array_equal(unstack_C(stack_C(C), 4), C)


def test_generator_cubes():
    r = random_regular(3, 1)
    g = generators(r)
    eye3 = np.eye(3)
    np.testing.assert_allclose(np.linalg.matrix_power(g.Mx_B, 3), np.kron(eye3, r.A), atol=1e-13)
    # the C generator cubes to right multiplication by +A_zeta
    np.testing.assert_allclose(np.linalg.matrix_power(g.Mx_C, 3), np.kron(eye3, r.A_zeta.T), atol=1e-13)


def test_time_generator_is_square_of_space_generator():
    r = random_regular(2, 4)
    g = generators(r)
    np.testing.assert_allclose(g.Mt_B, -1j * g.Mx_B @ g.Mx_B, atol=1e-14)
    np.testing.assert_allclose(g.Mt_C, 1j * g.Mx_C @ g.Mx_C, atol=1e-14)


def test_commutators_by_convention(exp1):
    assert max(generators(exp1.realization).commutators()) <= 1e-12
    paper = generators(exp1.realization, canonical_parameters("paper")).commutators()
    assert max(paper) > 1.0


def test_basepoint_state_is_data(reg4):
    st = propagate(reg4, 0.0, 0.0)
    assert np.array_equal(st.B, reg4.B0) and np.array_equal(st.X, reg4.X0)
    assert st.tau == 1 and st.x_route == "basepoint"


def test_x_ode_by_central_difference(reg4):
    prop = Propagator(reg4)
    p = prop.params
    h, x, t = 1e-5, 0.4, -0.2
    Bp, Cp = prop.BC(x + h, t)
    Bm, Cm = prop.BC(x - h, t)
    B, C = prop.BC(x, t)
    dB = (Bp - Bm) / (2 * h)
    dC = (Cp - Cm) / (2 * h)
    # the x-flow equations for B and C, multiplied through by sigma1
    np.testing.assert_allclose(reg4.A @ B @ p.sigma2 + dB @ p.sigma1 + B @ p.gamma, 0, atol=1e-7)
    np.testing.assert_allclose(p.sigma1 @ dC - p.gamma @ C + p.sigma2 @ C @ reg4.A_zeta, 0, atol=1e-7)


def test_sylvester_and_integration_agree():
    r = random_regular(3, 5)
    st = propagate(r, 0.8, -0.6)
    Xi = integrate_X(r, 0.8, -0.6)
    assert np.abs(st.X - Xi).max() <= 1e-8 * max(1.0, np.abs(Xi).max())


def test_integration_fallback_on_resonance():
    # A + A_zeta = 0 defeats the Sylvester route; the path integral still works
    A = np.array([[1j]])
    B0 = np.array([[1.0, 0.5, 0.2]])
    C0 = np.array([[0.3], [0.1], [1.0]])
    r = Realization(A, -A, [[2.0]], B0, C0)
    with pytest.raises(SylvesterSingular):
        propagate(r, 0.3, 0.1, route="sylvester")
    st = propagate(r, 0.3, 0.1)
    assert st.x_route == "integrate"
    assert np.isfinite(st.tau)


def test_paper_convention_restricted_to_t0(exp1):
    p = canonical_parameters("paper")
    st = propagate(exp1.realization, 0.5, 0.0, p)
    assert np.isfinite(st.tau)
    with pytest.raises(ConventionError):
        propagate(exp1.realization, 0.5, 0.1, p)


@pytest.mark.parametrize("seed", range(4))
def test_lyapunov_preserved(seed):
    for r in (random_regular(4, seed), random_symmetric(3, seed)):
        prop = Propagator(r)
        for x, t in [(-1.7, 1.2), (0.3, -0.9), (1.9, 1.9)]:
            st = prop.state(x, t)
            assert st.lyapunov_residual() <= 1e-9 * st.lyapunov_scale()


def test_symmetric_state_stays_symmetric(sym3):
    st = propagate(sym3, 0.7, 0.4)
    np.testing.assert_allclose(st.C, st.B.conj().T, atol=1e-10 * np.abs(st.B).max())
    np.testing.assert_allclose(st.X, st.X.conj().T, atol=1e-10 * np.abs(st.X).max())


def test_tau_is_determinant_ratio(reg4):
    st = propagate(reg4, 0.5, 0.5)
    expected = np.linalg.det(st.X) / np.linalg.det(reg4.X0)
    assert abs(st.tau - expected) <= 1e-10 * abs(expected)
    assert st.x_min_sv == pytest.approx(nk.min_sv(np.linalg.solve(reg4.X0, st.X)))


def test_compatibility_residual(exp1, reg4):
    assert compatibility_residual(exp1.realization, (0.3, 0.2)) <= 1e-6
    assert compatibility_residual(reg4, (-0.5, 0.4)) <= 1e-6
    assert compatibility_residual(exp1.realization, (0.3, 0.0), params=canonical_parameters("paper")) > 1e-3
    with pytest.raises(ValueError):
        compatibility_residual(reg4, (0, 0), h=0)
