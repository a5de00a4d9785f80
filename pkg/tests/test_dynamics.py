import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from becqfi.dynamics import (
    CompensationWarning,
    QubitDensity,
    SingularDerivativeError,
    cavity_at_tau,
    generating_sums,
    impurity_at_tau,
    joint_elements,
    log_derivative_A,
    reference_phase,
    series_sums,
    working_point_coefficients,
)
from becqfi.params import EffectiveParams
from becqfi.states import InputState, ThermalMode, choose_truncation, fock_amplitudes

GENERIC = EffectiveParams(chi=0.3, g_ab=0.4, G=-0.1, Omega_c=0.7, Omega_A=1.3, kappa=0.02, gamma=0.01)
COH2 = InputState.from_nbar("coherent", 2.0)
SQ2 = InputState.from_nbar("squeezed", 2.0, 0.9)


def test_initial_elements_are_outer_product():
    c_e, c_g = working_point_coefficients(GENERIC.gamma)
    j = joint_elements(GENERIC, COH2, ThermalMode(1.0), c_e, c_g, 0.0)
    phi = fock_amplitudes(COH2, choose_truncation(COH2))
    P = np.outer(phi, phi.conj())
    assert np.allclose(j.ee, abs(c_e) ** 2 * P, rtol=0, atol=1e-15)
    assert np.allclose(j.gg, abs(c_g) ** 2 * P, rtol=0, atol=1e-15)
    assert np.allclose(j.eg, c_e * np.conj(c_g) * P, rtol=0, atol=1e-15)


def test_thermal_factor_drops_out_at_tau():
    c = math.sqrt(0.5)
    ref = joint_elements(GENERIC, SQ2, ThermalMode(1.0), c, c, 1.0).full()
    for beta in (0.1, 10.0):
        assert np.array_equal(joint_elements(GENERIC, SQ2, ThermalMode(beta), c, c, 1.0).full(), ref)


@pytest.mark.parametrize("t", [0.0, 0.21, 0.37, 0.5, 1.0, 1.6])
@pytest.mark.parametrize("s", [COH2, SQ2])
def test_joint_matrix_hermitian_and_positive(t, s):
    c_e, c_g = working_point_coefficients(GENERIC.gamma)
    j = joint_elements(GENERIC, s, ThermalMode(0.5), c_e, c_g, t)
    rho = j.full()
    assert np.array_equal(j.ge, j.eg.conj().T)
    assert np.allclose(rho, rho.conj().T, rtol=0, atol=1e-15)
    assert np.linalg.eigvalsh(rho).min() >= -1e-10


@pytest.mark.parametrize("s", [COH2, SQ2, InputState.from_nbar("squeezed", 20.0)])
def test_joint_trace_reduces_to_impurity(s):
    c_e, c_g = working_point_coefficients(GENERIC.gamma)
    j = joint_elements(GENERIC, s, ThermalMode(1.0), c_e, c_g, 1.0)
    decay = math.exp(-2 * math.pi * GENERIC.gamma)
    q = impurity_at_tau(GENERIC, s, c_e * decay, c_g, reference_frame=False, normalize=False)
    assert np.allclose(j.impurity(), q.matrix(), rtol=0, atol=1e-12)
    assert np.allclose(j.cavity(), j.ee + j.gg)


@pytest.mark.parametrize("s", [COH2, SQ2, InputState.from_nbar("coherent", 30.0), InputState.from_nbar("squeezed", 30.0)])
@pytest.mark.parametrize("kappa", [0.0, 0.01, 0.1])
def test_series_matches_closed_form(s, kappa):
    e = EffectiveParams.from_estimand(0.23, G=-0.1, kappa=kappa)
    closed = np.array(generating_sums(e, s))
    series = np.array(series_sums(e, s, choose_truncation(s)))
    assert np.all(np.abs(closed[:2] - series[:2]) <= 10 * 1e-12)
    # derivatives weight the tail by n and n^2, so sum further out
    deep = np.array(series_sums(e, s, 3 * choose_truncation(s) + 40, tail_tol=0.5))
    n = s.nbar
    moments = np.array([4 * math.pi * n, (4 * math.pi) ** 2 * (n * n + 3 * n + 1)])
    assert np.all(np.abs(closed[2:] - deep[2:]) <= 1e-13 * moments + 1e-15)
    qc = impurity_at_tau(e, s)
    qs = impurity_at_tau(e, s, closed_form=False)
    assert abs(qc.rho_eg - qs.rho_eg) <= 1e-11
    assert abs(qc.rho_ee - qs.rho_ee) <= 1e-11


def test_coherent_closed_form_elements():
    nbar, kappa, G, O = 2.0, 0.02, -0.1, 0.13
    e = EffectiveParams.from_estimand(O, chi=0.5, G=G, kappa=kappa, Omega_A=0.4)
    q = impurity_at_tau(e, InputState.from_nbar("coherent", nbar), reference_frame=False, normalize=False)
    x = math.exp(-4 * math.pi * kappa)
    assert q.rho_ee == pytest.approx(0.5 * math.exp(nbar * (x - 1)), rel=1e-14)
    expected = 0.5 * np.exp(nbar * (x * np.exp(-2j * math.pi * (G + 2 * O)) - 1)) * reference_phase(e)
    assert abs(q.rho_eg - expected) < 1e-15


@settings(max_examples=40, deadline=None)
@given(theta=st.floats(0, 2 * math.pi), O=st.floats(-1, 1), kappa=st.floats(0, 0.1), nbar=st.floats(0.01, 30))
def test_squeezed_phase_independence(theta, O, kappa, nbar):
    e = EffectiveParams.from_estimand(O, G=-0.1, kappa=kappa)
    a = impurity_at_tau(e, InputState.from_nbar("squeezed", nbar, 0.0))
    b = impurity_at_tau(e, InputState.from_nbar("squeezed", nbar, theta))
    assert a == b
    sa = impurity_at_tau(e, InputState.from_nbar("squeezed", nbar, 0.0), closed_form=False)
    sb = impurity_at_tau(e, InputState.from_nbar("squeezed", nbar, theta), closed_form=False)
    assert abs(sa.rho_eg - sb.rho_eg) < 1e-12


@settings(max_examples=40, deadline=None)
@given(O=st.floats(-1, 1), kappa=st.floats(0, 0.1), nbar=st.floats(0.01, 20), m=st.integers(-3, 3))
def test_periodicity_in_estimand(O, kappa, nbar, m):
    for kind, period in (("coherent", 0.5), ("squeezed", 0.25)):
        s = InputState.from_nbar(kind, nbar)
        a = impurity_at_tau(EffectiveParams.from_estimand(O, G=-0.1, kappa=kappa), s)
        b = impurity_at_tau(EffectiveParams.from_estimand(O + m * period, G=-0.1, kappa=kappa), s)
        assert abs(a.rho_eg - b.rho_eg) < 1e-12
        assert abs(a.d_rho_eg - b.d_rho_eg) < 1e-10 * max(1.0, abs(a.d_rho_eg))


def test_pure_at_coherent_optimum():
    G = -0.1
    e = EffectiveParams.from_estimand(-G / 2, G=G)
    q = impurity_at_tau(e, InputState.from_nbar("coherent", 3.7))
    assert abs(q.rho_eg) / q.rho_ee == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("m", [-1, 0, 2])
@pytest.mark.parametrize("nbar", [0.5, 5.0])
def test_A_on_coherent_lattice(m, nbar):
    G = -0.1
    e = EffectiveParams.from_estimand((m - G) / 2, G=G)
    A = log_derivative_A(e, InputState.from_nbar("coherent", nbar))
    assert abs(A - (-4j * math.pi * nbar)) < 1e-12 * nbar


@pytest.mark.parametrize("kind", ["coherent", "squeezed"])
def test_vacuum_carries_no_information(kind):
    e = EffectiveParams.from_estimand(0.3, G=-0.1, kappa=0.01)
    assert log_derivative_A(e, InputState.from_nbar(kind, 0.0)) == 0


def test_A_matches_central_difference():
    e = EffectiveParams.from_estimand(0.2, G=-0.1, kappa=0.01)
    s = InputState.squeezed(math.asinh(1.0))
    h = 1e-6
    up = impurity_at_tau(e.with_estimand(0.2 + h), s, normalize=False).rho_eg
    dn = impurity_at_tau(e.with_estimand(0.2 - h), s, normalize=False).rho_eg
    mid = impurity_at_tau(e, s, normalize=False).rho_eg
    fd = (up - dn) / (2 * h * mid)
    A = log_derivative_A(e, s)
    assert abs(fd - A) / abs(A) < 1e-6
    assert abs(log_derivative_A(e, s, closed_form=False) - A) < 1e-10 * abs(A)


def test_zero_coherence_has_no_log_derivative():
    q = QubitDensity(0.5, 0.5, 0j, 0.1 + 0j, None, True)
    with pytest.raises(SingularDerivativeError):
        q.A


@pytest.mark.parametrize("s", [COH2, SQ2])
def test_lossless_cavity_diagonal_is_input_distribution(s):
    e = EffectiveParams.from_estimand(0.17, G=-0.1, Omega_c=0.3)
    rho = cavity_at_tau(e, s, normalize=False)
    p = np.abs(fock_amplitudes(s, choose_truncation(s))) ** 2
    assert np.allclose(np.diag(rho).real, p, rtol=1e-14, atol=0)
    assert np.allclose(np.diag(rho).imag, 0, atol=1e-15)


def test_cavity_alternative_form_shares_photon_statistics():
    e = EffectiveParams.from_estimand(0.17, G=-0.1, kappa=0.03)
    exact = cavity_at_tau(e, SQ2)
    alt = cavity_at_tau(e, SQ2, printed=True)
    assert np.allclose(np.diag(exact), np.diag(alt), rtol=1e-14, atol=0)
    assert not np.allclose(exact, alt)
    assert np.allclose(np.linalg.eigvalsh(exact), np.linalg.eigvalsh(alt), atol=1e-13)


def test_working_point_coefficients():
    gamma = 0.05
    c_e, c_g = working_point_coefficients(gamma)
    assert abs(c_e) ** 2 + abs(c_g) ** 2 == pytest.approx(1.0, abs=1e-15)
    assert c_e * math.exp(-2 * math.pi * gamma) == pytest.approx(c_g, rel=1e-14)
    with pytest.warns(CompensationWarning):
        working_point_coefficients(0.3)


def test_joint_input_validation():
    th = ThermalMode(1.0)
    with pytest.raises(ValueError):
        joint_elements(GENERIC, COH2, th, 1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        joint_elements(GENERIC, COH2, th, 1.0, 0.0, -0.1)
    with pytest.raises(ValueError):
        impurity_at_tau(GENERIC, COH2, c_e=0.5)
