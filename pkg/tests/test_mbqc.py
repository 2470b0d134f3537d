import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dqc.mbqc import (
    MeasurementPattern,
    PatternError,
    adapt_angle,
    build_brickwork,
    derive_dependencies,
    flow_pattern,
    honest_mbqc_execute,
    otp_compensate,
    pattern_unitary,
    random_pattern,
    zero_pattern,
)
from dqc.qcore import (
    DensityOperator,
    H,
    QuantumState,
    as_density,
    basis_state,
    plus_state,
    random_density,
    random_pure,
    trace_distance,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


# -- brickwork graph ----------------------------------------------------------


def test_single_row_is_a_path():
    g = build_brickwork(1, 2)
    assert g.edges == {((1, 0), (1, 1)), ((1, 1), (1, 2))}


def test_vertical_edges_two_rows():
    g = build_brickwork(2, 7)
    vertical = sorted(e for e in g.edges if e[0][1] == e[1][1])
    assert vertical == [((1, 3), (2, 3)), ((1, 5), (2, 5))]


@pytest.mark.parametrize("m", [1, 2, 5, 9])
def test_single_row_edge_count(m):
    assert len(build_brickwork(1, m).edges) == m


def test_brickwork_rejects_empty():
    with pytest.raises(PatternError):
        build_brickwork(0, 3)


def test_brickwork_rebuild_is_idempotent():
    assert build_brickwork(3, 9).edges == build_brickwork(3, 9).edges


def test_second_brick_layer_uses_even_rows():
    g = build_brickwork(3, 9)
    assert ((2, 7), (3, 7)) in g.edges and ((2, 9), (3, 9)) in g.edges
    assert ((1, 7), (2, 7)) not in g.edges


# -- dependency sets -------------------------------------------------------------


def test_single_row_dependencies():
    xd, zd = derive_dependencies(build_brickwork(1, 4))
    for y in range(5):
        assert xd[(1, y)] == ({(1, y - 1)} if y >= 1 else set())
        assert zd[(1, y)] == ({(1, y - 2)} if y >= 2 else set())


def test_dependencies_point_backwards():
    xd, zd = derive_dependencies(build_brickwork(3, 8))
    for deps in (xd, zd):
        for v, s in deps.items():
            assert all(u[1] < v[1] for u in s)


# -- angle rules -----------------------------------------------------------------


def test_adapt_examples():
    assert int(adapt_angle(3, 0, 0)) == 3
    assert int(adapt_angle(3, 1, 0)) == 5
    assert int(adapt_angle(3, 0, 1)) == 7
    assert int(adapt_angle(3, 1, 1)) == 1


def test_otp_compensation_examples():
    assert tuple(map(int, otp_compensate(3, 2, 0))) == (3, 2)
    assert tuple(map(int, otp_compensate(3, 2, 1))) == (5, 6)


@given(st.integers(0, 7), st.integers(0, 7), st.integers(0, 1))
def test_otp_compensation_is_an_involution(a, b, i):
    once = otp_compensate(a, b, i)
    assert tuple(map(int, otp_compensate(*once, i))) == (a, b)


@given(st.integers(0, 7), st.integers(0, 1), st.integers(0, 1))
def test_adapt_is_an_involution(k, sx, sz):
    assert int(adapt_angle(adapt_angle(k, sx, sz), sx, sz)) == k


# -- patterns and serialization -----------------------------------------------------


def test_pattern_shape_validation():
    with pytest.raises(PatternError):
        flow_pattern([[0, 1], [2]])
    with pytest.raises(PatternError):
        MeasurementPattern(1, 2, ((0, 0),), {(1, 1): {(1, 1)}}, {})


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(1, 9), seeds)
def test_json_round_trip(n, m, seed):
    p = random_pattern(n, m, seed)
    q = MeasurementPattern.loads(p.dumps())
    assert q == p
    assert q.to_json()["x_deps"] == "flow"


def test_json_explicit_dependencies_round_trip():
    p = MeasurementPattern(1, 2, ((1, 2),), {(1, 1): {(1, 0)}}, {})
    obj = p.to_json()
    assert obj["x_deps"] != "flow"
    assert MeasurementPattern.from_json(json.loads(json.dumps(obj))) == p


@pytest.mark.parametrize("bad", [8, -1, 1.5, "3", True])
def test_json_rejects_bad_angles(bad):
    with pytest.raises(PatternError):
        MeasurementPattern.from_json({"n": 1, "m": 2, "angles": [[0, bad]]})


def test_random_pattern_is_seeded():
    assert random_pattern(2, 4, 7) == random_pattern(2, 4, 7)


# -- execution oracle --------------------------------------------------------------


def test_single_zero_angle_is_hadamard_on_zero():
    out = honest_mbqc_execute(zero_pattern(1, 1), basis_state(["q"], [0]))
    plus = plus_state(0)
    assert np.allclose(out.matrix, np.outer(plus, plus.conj()), atol=1e-9)
    assert np.allclose(pattern_unitary(zero_pattern(1, 1)), H, atol=1e-9)


@pytest.mark.parametrize("n,m", [(1, 1), (1, 3), (2, 2), (2, 4)])
def test_maximally_mixed_is_fixed(n, m):
    d = 2**n
    wires = [f"q{j}" for j in range(n)]
    out = honest_mbqc_execute(random_pattern(n, m, 3), DensityOperator(wires, np.eye(d) / d))
    assert np.allclose(out.matrix, np.eye(d) / d, atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 2), st.integers(1, 4), seeds)
def test_patterns_are_unitary(n, m, seed):
    U = pattern_unitary(random_pattern(n, m, seed))
    assert np.allclose(U.conj().T @ U, np.eye(2**n), atol=1e-9)


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 2), st.integers(1, 4), seeds)
def test_output_matches_unitary(n, m, seed):
    p = random_pattern(n, m, seed)
    psi = random_pure([f"q{j}" for j in range(n)], np.random.default_rng(seed))
    out = honest_mbqc_execute(p, psi).matrix
    v = pattern_unitary(p) @ psi.amplitudes
    assert trace_distance(out, np.outer(v, v.conj())) <= 1e-9


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 2), st.integers(1, 4), seeds)
def test_column_strategy_agrees(n, m, seed):
    p = random_pattern(n, m, seed)
    rho = DensityOperator([f"q{j}" for j in range(n)], random_density(2**n, np.random.default_rng(seed)))
    a = honest_mbqc_execute(p, rho)
    b = honest_mbqc_execute(p, rho, strategy="column")
    assert trace_distance(a, b) <= 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_sampled_run_equals_exact_for_deterministic_patterns(seed):
    p = random_pattern(2, 4, seed)
    psi = random_pure(["a", "b"], np.random.default_rng(seed))
    exact = honest_mbqc_execute(p, psi)
    sampled = honest_mbqc_execute(p, psi, mode="sample", seed=seed)
    assert trace_distance(exact, sampled) <= 1e-9


def test_reference_wire_is_untouched():
    p = random_pattern(1, 3, 2)
    psi = random_pure(["q", "r"], np.random.default_rng(0))
    out = honest_mbqc_execute(p, psi)
    U = np.kron(pattern_unitary(p), np.eye(2))
    v = U @ psi.amplitudes
    assert out.wires == ("q", "r")
    assert trace_distance(out.matrix, np.outer(v, v.conj())) <= 1e-9


def test_linearity_on_mixtures():
    p = random_pattern(1, 3, 4)
    a = as_density(QuantumState(["q"], plus_state(1)))
    b = as_density(basis_state(["q"], [1]))
    mix = DensityOperator(["q"], 0.3 * a.matrix + 0.7 * b.matrix)
    lhs = honest_mbqc_execute(p, mix).matrix
    rhs = 0.3 * honest_mbqc_execute(p, a).matrix + 0.7 * honest_mbqc_execute(p, b).matrix
    assert np.allclose(lhs, rhs, atol=1e-9)


def test_execute_rejects_short_input():
    with pytest.raises(PatternError):
        honest_mbqc_execute(zero_pattern(2, 1), basis_state(["q"], [0]))
