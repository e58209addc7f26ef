import numpy as np
import pytest

from vessel_lab.evolution import Propagator, propagate
from vessel_lab.potentials import (MomentLadder, gamma_star, ladder_derivatives, moments, pi_relations,
                                   q_p, tau_ratios)
from vessel_lab.realization import random_regular, random_symmetric


def fd(prop, x, t, axis, h, fn):
    if axis == "x":
        return (fn(prop.state(x + h, t)) - fn(prop.state(x - h, t))) / (2 * h)
    return (fn(prop.state(x, t + h)) - fn(prop.state(x, t - h))) / (2 * h)


def test_moment_definition(reg4):
    st = propagate(reg4, 0.2, 0.1)
    L = moments(st, 2)
    Xinv = np.linalg.inv(st.X)
    for n in range(3):
        np.testing.assert_allclose(L.H[n], st.C @ Xinv @ np.linalg.matrix_power(reg4.A, n) @ st.B,
                                   rtol=1e-10, atol=1e-12)
    assert len(ladder_derivatives(st, 3).H) >= 4


@pytest.mark.parametrize("n", [0, 1])
def test_ladder_matches_fd_in_x(reg4, n):
    prop = Propagator(reg4)
    x, t = 0.35, -0.15
    exact = MomentLadder(prop.state(x, t), 3).dH_dx[n]
    approx = fd(prop, x, t, "x", 1e-4, lambda s: moments(s, 1).H[n])
    assert np.abs(exact - approx).max() <= 1e-6 * max(1, np.abs(exact).max())


def test_ladder_matches_fd_in_t(reg4):
    prop = Propagator(reg4)
    x, t = -0.3, 0.25
    exact = MomentLadder(prop.state(x, t), 3).dH_dt[0]
    approx = fd(prop, x, t, "t", 1e-4, lambda s: moments(s, 0).H[0])
    assert np.abs(exact - approx).max() <= 1e-6 * max(1, np.abs(exact).max())


def test_log_tau_derivative_is_pi11(reg4):
    prop = Propagator(reg4)
    x, t, h = 0.1, 0.3, 1e-5
    dlog = (np.log(prop.state(x + h, t).tau) - np.log(prop.state(x - h, t).tau)) / (2 * h)
    assert abs(dlog - MomentLadder(prop.state(x, t), 0).pi11()) <= 1e-6


def test_q_two_ways(exp1):
    prop = Propagator(exp1.realization)
    x, t, h = 0.2, 0.1, 1e-3
    logt = [np.log(prop.state(x + k * h, t).tau) for k in (-2, -1, 0, 1, 2)]
    d2 = (-logt[0] + 16 * logt[1] - 30 * logt[2] + 16 * logt[3] - logt[4]) / (12 * h ** 2)
    q_tau = -1.5 * d2
    q = q_p(prop.state(x, t)).q
    assert abs(q - q_tau) <= 1e-6
    assert abs(q - exp1.q_ref(x, t)) <= 1e-9


def test_tau_ratios_consistent(reg4):
    prop = Propagator(reg4)
    x, t, h = 0.0, 0.2, 1e-3
    taus = [prop.state(x + k * h, t).tau for k in (-1, 0, 1)]
    second = (taus[0] - 2 * taus[1] + taus[2]) / h ** 2 / taus[1]
    tr = tau_ratios(MomentLadder(prop.state(x, t), 3))
    assert abs(tr[2] - second) <= 1e-5 * max(1, abs(second))


def test_gamma_star_trivial(triv):
    L = MomentLadder(propagate(triv, 0.5, 0.5), 0)
    p = propagate(triv, 0, 0).params
    np.testing.assert_array_equal(gamma_star(L), p.gamma)
    np.testing.assert_array_equal(gamma_star(L, tilde=True), p.gamma_t)


def test_potentials_real_for_soliton(exp1):
    s = q_p(propagate(exp1.realization, 0.4, -0.3))
    assert abs(s.q - exp1.q_ref(0.4, -0.3)) <= 1e-9
    assert abs(s.q.imag) <= 1e-9


def test_derivatives_of_q(exp1):
    prop = Propagator(exp1.realization)
    x, t, h = 0.3, 0.1, 1e-4
    s = q_p(prop.state(x, t))
    qx = (q_p(prop.state(x + h, t)).q - q_p(prop.state(x - h, t)).q) / (2 * h)
    qt = (q_p(prop.state(x, t + h)).q - q_p(prop.state(x, t - h)).q) / (2 * h)
    assert abs(s.q_x - qx) <= 1e-6
    assert abs(s.q_t - qt) <= 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_unconditional_relations(seed):
    r = random_regular(3, seed)
    rel = pi_relations(propagate(r, 0.4, -0.2))
    assert rel.residuals["pi21"] <= 1e-8
    assert rel.residuals["pi22"] <= 1e-8
    assert "pi31" not in rel.applicable() or rel.normalized


def test_pi31_on_normalized():
    r = random_regular(3, 9, normalized=True)
    rel = pi_relations(propagate(r, -0.6, 0.3))
    assert rel.normalized
    assert rel.residuals["normalization"] <= 1e-8
    assert rel.residuals["pi31"] <= 1e-8


def test_symmetric_hermitian_moment(sym3):
    for x, t in [(0.1, 0.2), (-1.0, 0.5)]:
        rel = pi_relations(propagate(sym3, x, t))
        assert rel.symmetric["hermitian_H0"] <= 1e-9
        assert rel.symmetric["re_pi12"] <= 1e-8


def test_symmetric_section_absent_for_regular(reg4):
    assert pi_relations(propagate(reg4, 0.1, 0.1)).symmetric is None


def test_symmetric_potential_real():
    r = random_symmetric(2, 5, normalized=True)
    s = q_p(propagate(r, 0.3, 0.2))
    assert abs(s.q.imag) <= 1e-8 * max(1, abs(s.q))
