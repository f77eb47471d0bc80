import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from conftest import random_density, random_hermitian
from nicoh.core import (DegenerateSteadyStateWarning, DensityMatrix,
                        HermitianOperator, IntegrationFailure,
                        NoSteadyStateError, Superoperator, Trajectory,
                        TurnOnEnvelope, check_generator, expectation,
                        gibbs_state, propagate, propagate_envelope,
                        steady_state)


# ---------------------------------------------------------------------------
# state objects
# ---------------------------------------------------------------------------

def test_density_matrix_enforces_hermiticity_exactly(rng):
    rho = DensityMatrix(random_density(rng, 4))
    assert np.array_equal(rho.elements, rho.elements.conj().T)


def test_density_matrix_rejects_bad_inputs(rng):
    good = random_density(rng, 3)
    bad_herm = good.copy()
    bad_herm[0, 1] += 0.2
    with pytest.raises(ValueError, match="Hermiticity"):
        DensityMatrix(bad_herm)
    with pytest.raises(ValueError, match="trace"):
        DensityMatrix(1.5 * good)
    neg = np.diag([1.2, -0.2, 0.0]).astype(complex)
    with pytest.raises(ValueError, match="eigenvalue"):
        DensityMatrix(neg)
    cs = np.array([[0.5, 0.4], [0.4, 0.5]], dtype=complex)
    cs[0, 0], cs[1, 1] = 0.9, 0.1  # |rho_01|^2 > rho_00 rho_11
    with pytest.raises(ValueError, match="Cauchy"):
        DensityMatrix(cs)
    with pytest.raises(ValueError, match="square"):
        DensityMatrix(np.zeros((2, 3)))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_density_matrix_accepts_random_valid_states(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(2, 6))
    rho = DensityMatrix(random_density(rng, dim))
    assert abs(np.trace(rho.elements) - 1) < 1e-10
    assert np.linalg.eigvalsh(rho.elements).min() > -1e-9


def test_hermitian_operator_rejects_non_hermitian():
    with pytest.raises(ValueError):
        HermitianOperator(np.array([[0.0, 1.0], [0.0, 0.0]]))


# ---------------------------------------------------------------------------
# expectation values
# ---------------------------------------------------------------------------

def test_expectation_identity_is_one(rng):
    rho = DensityMatrix(random_density(rng, 5))
    assert expectation(HermitianOperator(np.eye(5)), rho) == pytest.approx(1.0, abs=1e-12)


def test_expectation_diagonal_case():
    a = HermitianOperator(np.diag([0.0, 1.0]))
    rho = DensityMatrix(np.diag([0.3, 0.7]).astype(complex))
    assert expectation(a, rho) == pytest.approx(0.7, abs=1e-14)


def test_expectation_matches_eigenbasis_sum(rng):
    # independent oracle: rotate rho into A's eigenbasis and sum a_n rho_nn
    a = HermitianOperator(random_hermitian(rng, 4))
    rho = DensityMatrix(random_density(rng, 4))
    evals, vecs = np.linalg.eigh(a.elements)
    rho_eig = vecs.conj().T @ rho.elements @ vecs
    oracle = float(np.sum(evals * np.diag(rho_eig).real))
    assert expectation(a, rho) == pytest.approx(oracle, abs=1e-12)


def test_expectation_dimension_mismatch(rng):
    with pytest.raises(ValueError, match="dimension"):
        expectation(HermitianOperator(np.eye(3)),
                    DensityMatrix(random_density(rng, 2)))


# ---------------------------------------------------------------------------
# thermal states
# ---------------------------------------------------------------------------

def test_gibbs_limits():
    h = HermitianOperator(np.diag([0.0, 1.0]))
    hot = gibbs_state(h, 1e9)
    np.testing.assert_allclose(np.diag(hot.elements).real, [0.5, 0.5], atol=1e-9)
    cold = gibbs_state(h, 1e-3)
    np.testing.assert_allclose(np.diag(cold.elements).real, [1.0, 0.0], atol=1e-12)


def test_gibbs_scalar_value():
    # exp(-E_n/T) populations for H = diag(0, 1), T = 1
    h = HermitianOperator(np.diag([0.0, 1.0]))
    rho = gibbs_state(h, 1.0)
    z = 1.0 + np.exp(-1.0)
    np.testing.assert_allclose(np.diag(rho.elements).real,
                               [1.0 / z, np.exp(-1.0) / z], rtol=1e-14)


def test_gibbs_rejects_nonpositive_temperature():
    h = HermitianOperator(np.diag([0.0, 1.0]))
    with pytest.raises(ValueError):
        gibbs_state(h, 0.0)
    with pytest.raises(ValueError):
        gibbs_state(h, -1.0)


def test_gibbs_stationary_under_unitary_generator(rng):
    h = HermitianOperator(random_hermitian(rng, 4))
    rho = gibbs_state(h, 0.7)
    drho = Superoperator.from_hamiltonian(h).apply(rho)
    assert np.max(np.abs(drho)) < 1e-12


# ---------------------------------------------------------------------------
# superoperators
# ---------------------------------------------------------------------------

def test_generators_annihilate_trace_and_preserve_hermiticity(rng):
    h = random_hermitian(rng, 3)
    c = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    gen = Superoperator.from_hamiltonian(h) + Superoperator.lindblad(c, 0.7)
    check_generator(gen, n_samples=100, rng=1)


def test_from_apply_roundtrip(rng):
    h = random_hermitian(rng, 3)
    direct = Superoperator.from_hamiltonian(h)
    rebuilt = Superoperator.from_apply(3, lambda m: -1j * (h @ m - m @ h))
    np.testing.assert_allclose(direct.dense(), rebuilt.dense(), atol=1e-14)


def test_superoperator_algebra(rng):
    a = Superoperator.from_hamiltonian(random_hermitian(rng, 2))
    b = Superoperator.lindblad(np.array([[0, 1], [0, 0]], dtype=complex), 0.5)
    rho = random_density(rng, 2)
    np.testing.assert_allclose((a + b).apply(rho), a.apply(rho) + b.apply(rho))
    np.testing.assert_allclose((2.0 * a).apply(rho), 2.0 * a.apply(rho))


# ---------------------------------------------------------------------------
# envelope
# ---------------------------------------------------------------------------

def test_envelope_sudden():
    env = TurnOnEnvelope("sudden")
    assert env.value(-1.0) == 0.0
    assert env.value(0.0) == 1.0
    assert env.value(10.0) == 1.0


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e3),
       st.floats(min_value=-5.0, max_value=50.0),
       st.floats(min_value=0.0, max_value=50.0))
def test_envelope_bounded_and_monotone(tau_r, t, dt):
    env = TurnOnEnvelope("exponential", tau_r)
    v0, v1 = env.value(t), env.value(t + dt)
    assert 0.0 <= v0 <= 1.0
    assert v1 >= v0 - 1e-15


def test_envelope_validation():
    with pytest.raises(ValueError):
        TurnOnEnvelope("linear")
    with pytest.raises(ValueError):
        TurnOnEnvelope("exponential", -1.0)


def test_trajectory_validation(rng):
    rho = DensityMatrix(random_density(rng, 2))
    with pytest.raises(ValueError, match="increasing"):
        Trajectory(np.array([0.0, 0.0]), [rho, rho])
    with pytest.raises(ValueError, match="length"):
        Trajectory(np.array([0.0, 1.0]), [rho])


# ---------------------------------------------------------------------------
# propagation
# ---------------------------------------------------------------------------

def test_propagate_zero_generator(rng):
    rho0 = DensityMatrix(random_density(rng, 3))
    traj = propagate(Superoperator.zero(3), rho0, np.linspace(0, 5, 6))
    for state in traj.states:
        np.testing.assert_allclose(state.elements, rho0.elements, atol=1e-12)


def test_propagate_unitary_closed_form():
    omega = 2.0
    h = HermitianOperator(np.diag([0.0, omega]))
    rho0 = DensityMatrix(0.5 * np.ones((2, 2), dtype=complex))
    times = np.linspace(0.0, 3.0, 13)
    traj = propagate(Superoperator.from_hamiltonian(h), rho0, times,
                     rtol=1e-10, atol=1e-14)
    for t, state in zip(times, traj.states):
        assert state.elements[0, 1] == pytest.approx(
            0.5 * np.exp(1j * omega * t), abs=2e-9)
        assert state.elements[0, 0] == pytest.approx(0.5, abs=1e-9)


def test_propagate_matches_matrix_exponential(rng):
    # dense exponential oracle on the vectorized three-level generator
    h = random_hermitian(rng, 3)
    c1 = np.zeros((3, 3), dtype=complex)
    c1[0, 1] = 1.0
    c2 = np.zeros((3, 3), dtype=complex)
    c2[0, 2] = 1.0
    gen = (Superoperator.from_hamiltonian(h)
           + Superoperator.lindblad(c1, 0.8) + Superoperator.lindblad(c2, 0.3))
    rho0 = DensityMatrix(random_density(rng, 3))
    times = np.linspace(0.0, 5.0, 11)
    traj = propagate(gen, rho0, times, rtol=1e-11, atol=1e-14)
    vec0 = rho0.elements.reshape(-1, order="F")
    for t, state in zip(times, traj.states):
        oracle = (expm(gen.dense() * t) @ vec0).reshape((3, 3), order="F")
        assert np.max(np.abs(state.elements - oracle)) < 1e-8


def test_propagate_reports_invariant_violation():
    # trace-breaking map: rho' = +rho grows the trace beyond tolerance
    bad = Superoperator(2, np.eye(4, dtype=complex))
    rho0 = DensityMatrix(np.diag([0.6, 0.4]).astype(complex))
    with pytest.raises(IntegrationFailure) as err:
        propagate(bad, rho0, np.linspace(0.0, 2.0, 5))
    assert err.value.time is not None


def test_propagate_input_validation(rng):
    rho0 = DensityMatrix(random_density(rng, 2))
    gen = Superoperator.zero(2)
    with pytest.raises(ValueError):
        propagate(gen, rho0, np.array([0.0, 1.0]), rtol=0.0)
    with pytest.raises(ValueError):
        propagate(gen, rho0, np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        propagate(Superoperator.zero(3), rho0, np.array([0.0, 1.0]))


def test_propagate_accepts_callable_rhs():
    h = np.diag([0.0, 1.0]).astype(complex)
    rho0 = DensityMatrix(0.5 * np.ones((2, 2), dtype=complex))
    traj = propagate(lambda t, m: -1j * (h @ m - m @ h), rho0,
                     np.linspace(0, 1, 3), rtol=1e-10, atol=1e-13)
    assert traj.states[-1].elements[0, 1] == pytest.approx(
        0.5 * np.exp(1j * 1.0), abs=1e-8)


def test_propagate_envelope_matches_direct_integration(rng):
    # envelope path against a plain RK run of the combined generator
    c = np.zeros((2, 2), dtype=complex)
    c[0, 1] = 1.0
    l_static = Superoperator.lindblad(c, 1.0)
    l_pump = Superoperator.lindblad(c.conj().T, 0.4)
    env = TurnOnEnvelope("exponential", 0.7)
    rho0 = DensityMatrix(np.diag([1.0, 0.0]).astype(complex))
    times = np.linspace(0.0, 4.0, 9)
    traj = propagate_envelope(l_static, l_pump, env, rho0, times,
                              rtol=1e-10, atol=1e-13)
    m0, m1 = l_static.dense(), l_pump.dense()
    ref = propagate(lambda t, m: ((m0 + env.value(t) * m1)
                                  @ m.reshape(-1, order="F")).reshape((2, 2), order="F"),
                    rho0, times, rtol=1e-10, atol=1e-13)
    for a, b in zip(traj.states, ref.states):
        np.testing.assert_allclose(a.elements, b.elements, atol=1e-8)


def test_envelope_stepper_handles_extreme_turn_on():
    # stiffness ratio ~ 1e7: far beyond the explicit pair's step budget
    c = np.zeros((2, 2), dtype=complex)
    c[0, 1] = 1.0
    l_static = Superoperator.lindblad(c, 1.0)
    l_pump = Superoperator.lindblad(c.conj().T, 0.5)
    env = TurnOnEnvelope("exponential", 1e7)
    rho0 = DensityMatrix(np.diag([1.0, 0.0]).astype(complex))
    times = np.array([0.0, 1e7, 3e7])
    traj = propagate_envelope(l_static, l_pump, env, rho0, times)
    # quasi-static: state tracks the instantaneous fixed point r f/(1 + rf)-ish
    f = env.value(times[-1])
    expected = 0.5 * f / (1.0 + 0.5 * f)
    assert traj.states[-1].elements[1, 1].real == pytest.approx(expected, rel=1e-4)


# ---------------------------------------------------------------------------
# steady states
# ---------------------------------------------------------------------------

def test_steady_state_pure_decay():
    c = np.zeros((2, 2), dtype=complex)
    c[0, 1] = 1.0
    gen = Superoperator.lindblad(c, 1.0)
    rho = steady_state(gen)
    np.testing.assert_allclose(rho.elements, np.diag([1.0, 0.0]), atol=1e-12)


def test_steady_state_agrees_with_long_time_propagation(rng):
    from nicoh.vsystem import detailed_balance_params, vsystem_generator
    gen = vsystem_generator(detailed_balance_params(1.0, 2.0, 0.4, delta=2.0, p=0.5))
    target = steady_state(gen)
    for _ in range(5):
        rho0 = DensityMatrix(random_density(rng, 3))
        traj = propagate(gen, rho0, np.array([0.0, 50.0 / 0.4]),
                         rtol=1e-11, atol=1e-14)
        np.testing.assert_allclose(traj.final().elements, target.elements,
                                   atol=1e-6)


def test_steady_state_residual_is_small():
    from nicoh.vsystem import VSystemParams, vsystem_generator
    gen = vsystem_generator(VSystemParams(delta=3.0, r1=0.3, r2=0.2,
                                          g1=1.0, g2=0.5, p=1.0))
    rho = steady_state(gen)
    assert np.linalg.norm(gen.apply(rho)) < 1e-10
    assert np.trace(rho.elements).real == pytest.approx(1.0, abs=1e-12)


def test_steady_state_degenerate_warns_and_returns_mixed():
    gen = Superoperator.zero(2)
    with pytest.warns(DegenerateSteadyStateWarning):
        rho = steady_state(gen)
    np.testing.assert_allclose(rho.elements, np.eye(2) / 2, atol=1e-9)


def test_steady_state_empty_nullspace_rejected():
    # rho' = -rho has no stationary state (not trace preserving either)
    gen = Superoperator(2, -np.eye(4, dtype=complex))
    with pytest.raises(NoSteadyStateError):
        steady_state(gen)
