import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dqc.qcore import (
    CNOT,
    CZ,
    ALG_TOL,
    TOL,
    Angle8,
    DensityOperator,
    DimensionError,
    KrausChannel,
    QuantumState,
    WireError,
    X,
    apply_channel,
    apply_unitary,
    as_density,
    basis_state,
    bell_state,
    choi,
    fidelity,
    fully_depolarizing,
    identity_channel,
    measure_xy,
    partial_trace,
    plus_state,
    purified_distance,
    random_channel,
    random_density,
    random_pure,
    tensor,
    trace_distance,
    unitary_channel,
    z_rotation,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def ket(*amps):
    v = np.array(amps, dtype=complex)
    return v / np.linalg.norm(v)


# -- Angle8 -----------------------------------------------------------------


@given(st.integers(-50, 50), st.integers(-50, 50))
def test_angle8_arithmetic_stays_mod_8(a, b):
    assert int(Angle8(a) + Angle8(b)) == (a + b) % 8
    assert int(Angle8(a) - b) == (a - b) % 8
    assert int(Angle8(a).negate()) == (8 - a % 8) % 8
    assert int(Angle8(a).add_pi()) == (a + 4) % 8


def test_angle8_radians():
    assert Angle8(2).radians == pytest.approx(np.pi / 2)


# -- unitaries ----------------------------------------------------------------


def test_x_flips_zero():
    out = apply_unitary(basis_state(["q"], [0]), X, ["q"])
    assert np.allclose(out.amplitudes, [0, 1])


def test_cz_on_11_is_minus_11():
    out = apply_unitary(basis_state(["a", "b"], [1, 1]), CZ, ["a", "b"])
    assert np.allclose(out.amplitudes, [0, 0, 0, -1])


def test_z_rotation_on_plus():
    plus = QuantumState(["q"], plus_state(0))
    out = apply_unitary(plus, z_rotation(1), ["q"])
    assert np.allclose(out.amplitudes, ket(1, np.exp(1j * np.pi / 4)))


def test_apply_unitary_respects_target_order():
    st_ = basis_state(["a", "b"], [1, 0])
    out = apply_unitary(st_, CNOT, ["a", "b"])
    assert np.allclose(out.amplitudes, basis_state(["a", "b"], [1, 1]).amplitudes)
    out = apply_unitary(st_, CNOT, ["b", "a"])
    assert np.allclose(out.amplitudes, st_.amplitudes)


def test_apply_unitary_errors():
    st_ = basis_state(["a"], [0])
    with pytest.raises(WireError):
        apply_unitary(st_, X, ["zz"])
    with pytest.raises(DimensionError):
        apply_unitary(st_, CZ, ["a"])


def test_state_invariants():
    with pytest.raises(ValueError):
        QuantumState(["a"], np.array([1, 1], dtype=complex))
    with pytest.raises(ValueError):
        QuantumState(["a", "a"], np.eye(4)[0])


# -- channels -----------------------------------------------------------------


def test_identity_channel_is_identity():
    rho = DensityOperator(["q"], random_density(2, np.random.default_rng(0)))
    assert np.allclose(apply_channel(rho, identity_channel(), ["q"]).matrix, rho.matrix)


def test_depolarizing_on_zero():
    rho = as_density(basis_state(["q"], [0]))
    assert np.allclose(apply_channel(rho, fully_depolarizing(), ["q"]).matrix, np.eye(2) / 2)


def test_projector_kraus_on_plus():
    plus = as_density(QuantumState(["q"], plus_state(0)))
    proj = KrausChannel([np.diag([1, 0]).astype(complex)], trace_preserving=False)
    out = apply_channel(plus, proj, ["q"])
    assert np.allclose(out.matrix, np.diag([0.5, 0]))
    assert out.trace() == pytest.approx(0.5)


def test_incomplete_kraus_rejected():
    with pytest.raises(ValueError):
        KrausChannel([np.diag([1, 0]).astype(complex)])
    with pytest.raises(ValueError):
        KrausChannel([2 * np.eye(2)], trace_preserving=False)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_channel_output_is_a_state(seed):
    rng = np.random.default_rng(seed)
    rho = DensityOperator(["a", "b"], random_density(4, rng))
    out = apply_channel(rho, random_channel(2, 2, 3, seed), ["b"]).matrix
    assert np.allclose(out, out.conj().T, atol=TOL)
    assert np.linalg.eigvalsh(out).min() > -TOL
    assert np.trace(out).real == pytest.approx(1.0)


# -- partial trace --------------------------------------------------------------


def test_partial_trace_bell():
    rho = as_density(bell_state("a", "b"))
    assert np.allclose(partial_trace(rho, ["b"]).matrix, np.eye(2) / 2)


def test_partial_trace_product_and_full():
    rng = np.random.default_rng(1)
    r = DensityOperator(["a"], random_density(2, rng))
    s = DensityOperator(["b"], random_density(2, rng))
    assert np.allclose(partial_trace(tensor(r, s), ["b"]).matrix, r.matrix)
    full = partial_trace(tensor(r, s), ["a", "b"])
    assert full.matrix.shape == (1, 1)
    assert full.matrix[0, 0] == pytest.approx(1.0)


# -- XY measurement ---------------------------------------------------------------


@pytest.mark.parametrize("k", range(8))
def test_measure_eigenstate(k):
    res = measure_xy(QuantumState(["q"], plus_state(k)), "q", k)
    assert res.probabilities[0] == pytest.approx(1.0)


@pytest.mark.parametrize("k", range(8))
def test_measure_zero_is_fair(k):
    res = measure_xy(basis_state(["q"], [0]), "q", k)
    assert np.allclose(res.probabilities, [0.5, 0.5])


def test_measure_plus_at_pi():
    res = measure_xy(QuantumState(["q"], plus_state(0)), "q", 4)
    assert res.probabilities[1] == pytest.approx(1.0)


def test_measure_removes_wire_and_sampling_is_seeded():
    psi = random_pure(["a", "b"], np.random.default_rng(3))
    res = measure_xy(psi, "a", 3)
    assert all(s.wires == ("b",) for s in res.states)
    a = measure_xy(psi, "a", 3, mode="sample", seed=9)
    b = measure_xy(psi, "a", 3, mode="sample", seed=9)
    assert a.outcome == b.outcome


# -- metrics -----------------------------------------------------------------------


def test_trace_distance_examples():
    z0, z1 = np.diag([1.0, 0]), np.diag([0, 1.0])
    assert trace_distance(z0, z1) == pytest.approx(1.0)
    assert trace_distance(z0, z0) == pytest.approx(0.0)
    assert trace_distance(z0, z0 / 2, generalized=True) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        trace_distance(z0, z0 / 2)
    with pytest.raises(DimensionError):
        trace_distance(z0, np.eye(4) / 4)


def test_fidelity_examples():
    z0 = np.diag([1.0, 0])
    plus = np.full((2, 2), 0.5)
    assert fidelity(z0, plus) == pytest.approx(1 / np.sqrt(2))
    assert fidelity(z0 / 2, z0 / 2, generalized=True) == pytest.approx(1.0)
    rho = random_density(3, np.random.default_rng(2))
    assert fidelity(rho, rho) == pytest.approx(1.0)


def test_purified_distance_examples():
    z0, z1 = np.diag([1.0, 0]), np.diag([0, 1.0])
    plus = np.full((2, 2), 0.5)
    rho = random_density(2, np.random.default_rng(4))
    assert purified_distance(rho, rho) == pytest.approx(0.0, abs=1e-7)
    assert purified_distance(z0, z1) == pytest.approx(1.0)
    assert purified_distance(z0, plus) == pytest.approx(1 / np.sqrt(2))


def _subnormalized(rng, dim):
    return random_density(dim, rng, rank=int(rng.integers(1, dim + 1)), trace=float(rng.uniform(0.05, 1)))


@settings(max_examples=200, deadline=None)
@given(seeds, st.sampled_from([2, 4]))
def test_generalized_distance_sandwich(seed, dim):
    rng = np.random.default_rng(seed)
    rho, sigma = _subnormalized(rng, dim), _subnormalized(rng, dim)
    d = trace_distance(rho, sigma, generalized=True)
    p = purified_distance(rho, sigma)
    assert d <= p + TOL
    assert p <= np.sqrt(2 * d) + TOL


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_pure_states_all_distances_agree(seed):
    rng = np.random.default_rng(seed)
    a = random_pure(["q", "r"], rng).amplitudes
    b = random_pure(["q", "r"], rng).amplitudes
    rho, sigma = np.outer(a, a.conj()), np.outer(b, b.conj())
    d = trace_distance(rho, sigma)
    assert trace_distance(rho, sigma, generalized=True) == pytest.approx(d, abs=TOL)
    assert purified_distance(rho, sigma) == pytest.approx(d, abs=TOL)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_channels_contract_trace_distance(seed):
    rng = np.random.default_rng(seed)
    rho = DensityOperator(["a", "b"], random_density(4, rng))
    sigma = DensityOperator(["a", "b"], random_density(4, rng))
    ch = KrausChannel(random_channel(4, 2, 4, seed).operators, out_wires=["o"])
    out_r = apply_channel(rho, ch, ["a", "b"])
    out_s = apply_channel(sigma, ch, ["a", "b"])
    assert trace_distance(out_r, out_s) <= trace_distance(rho, sigma) + TOL


# -- Choi ------------------------------------------------------------------------------


def test_choi_examples():
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(choi(identity_channel()).matrix, np.outer(phi, phi))
    assert np.allclose(choi(fully_depolarizing()).matrix, np.eye(4) / 4)
    xphi = np.kron(X, np.eye(2)) @ phi
    assert np.allclose(choi(unitary_channel(X)).matrix, np.outer(xphi, xphi.conj()))


def test_choi_marginal_is_maximally_mixed():
    c = choi(random_channel(2, 4, 3, 5))
    assert np.allclose(c.input_marginal(), np.eye(2) / 2, atol=TOL)


def test_equal_choi_means_equal_outputs():
    # same channel written with a rotated Kraus decomposition
    ch = random_channel(2, 2, 2, 11)
    V = np.array([[0.6, 0.8], [-0.8, 0.6]])
    ops = [sum(V[j, k] * ch.operators[k] for k in range(2)) for j in range(2)]
    other = KrausChannel(ops)
    assert np.allclose(choi(ch).matrix, choi(other).matrix, atol=TOL)
    rng = np.random.default_rng(0)
    for _ in range(100):
        rho = DensityOperator(["q"], random_density(2, rng))
        assert np.allclose(apply_channel(rho, ch, ["q"]).matrix, apply_channel(rho, other, ["q"]).matrix, atol=1e-8)


# -- random channels ---------------------------------------------------------------------


def test_random_channel_deterministic_and_complete():
    a, b = random_channel(2, 3, 4, 42), random_channel(2, 3, 4, 42)
    assert all(np.array_equal(x, y) for x, y in zip(a.operators, b.operators))
    total = sum(E.conj().T @ E for E in a.operators)
    assert np.allclose(total, np.eye(2), atol=ALG_TOL)


def test_random_channel_trivial_environment_is_unitary():
    ch = random_channel(4, 4, 1, 7)
    (U,) = ch.operators
    assert np.allclose(U.conj().T @ U, np.eye(4), atol=1e-10)


def test_random_channel_rejects_zero_dims():
    with pytest.raises(DimensionError):
        random_channel(0, 2, 2, 0)
