import numpy as np
import pytest

from dqc.interaction import comb_choi, comb_equal, evolve, run_interaction
from dqc.mbqc import honest_mbqc_execute, pattern_unitary, random_pattern
from dqc.protocols import (
    IdealResource,
    ideal_resource,
    oneway_suite,
    qotp_encrypt,
    qotp_ideal,
    qotp_real,
    ubqc_alice,
    ubqc_bob_honest,
    ubqc_ideal,
    ubqc_schedule,
)
from dqc.qcore import (
    DensityOperator,
    KrausChannel,
    as_density,
    random_channel,
    random_density,
    random_pure,
    random_unitary,
    trace_distance,
)


def run_honest(version, pattern, psi, ins, refs=()):
    res = run_interaction(ubqc_alice(version, pattern), ubqc_bob_honest(pattern.n, pattern.m), psi)
    outs = [f"A.out{x}" for x in range(1, pattern.n + 1)]
    got = res.state(outs + list(refs)).density().matrix
    want = honest_mbqc_execute(pattern, as_density(psi)).reorder(list(ins) + list(refs)).matrix
    return trace_distance(got, want)


# -- honest runs ------------------------------------------------------------------


@pytest.mark.parametrize("version", [1, 2, 3])
@pytest.mark.parametrize("m", [1, 2])
def test_honest_versions_match_direct_execution(version, m):
    pattern = random_pattern(1, m, 10 + m)
    psi = random_pure(["A.in1", "X.R1"], np.random.default_rng(m))
    assert run_honest(version, pattern, psi, ["A.in1"], ["X.R1"]) <= 1e-9


def test_honest_two_rows_with_reference():
    pattern = random_pattern(2, 2, 4)
    psi = random_pure(["A.in1", "A.in2", "X.R1"], np.random.default_rng(4))
    assert run_honest(1, pattern, psi, ["A.in1", "A.in2"], ["X.R1"]) <= 1e-9


@pytest.mark.parametrize("n,m", [(1, 1), (2, 3), (3, 8)])
def test_schedule_counts(n, m):
    sched = ubqc_schedule(n, m)
    assert len(sched) == 3 * n * m + n
    assert sum(r.kind == "qubit" for r in sched) == n * m + n
    assert sum(r.kind == "angle8" for r in sched) == n * m
    assert sum(r.kind == "bit" for r in sched) == n * m


def test_sample_mode_honest_run():
    pattern = random_pattern(1, 2, 3)
    psi = random_pure(["A.in1"], np.random.default_rng(3))
    res = run_interaction(ubqc_alice(1, pattern), ubqc_bob_honest(1, 2), psi, mode="sample", seed=3)
    got = res.state(["A.out1"]).density().matrix
    want = honest_mbqc_execute(pattern, psi).matrix
    assert trace_distance(got, want) <= 1e-9
    angles = [r["value"] for r in res.transcript["rounds"] if r["kind"] == "angle8"]
    assert len(angles) == 2 and all(0 <= a < 8 for a in angles)


# -- what Bob sees ------------------------------------------------------------------


def port_marginals(program):
    comb = comb_choi(program, ["A.in1"])
    sched = program.schedule
    deltas = []
    for r, rnd in enumerate(sched):
        if rnd.kind == "angle8":
            j = comb.keys.index(f"P{r}")
            probs = np.zeros(8)
            for key, mat in comb.state.blocks.items():
                probs[key[j]] += np.trace(mat).real
            deltas.append(probs)
    first = comb.state.forget_keys(comb.keys)
    first = first.partial_trace([w for w in first.wires if w != "P0"]).density().matrix
    return deltas, first


@pytest.mark.parametrize("version", [1, 2, 3])
def test_angles_are_uniform_and_qubits_maximally_mixed(version):
    deltas, first = port_marginals(ubqc_alice(version, random_pattern(1, 2, 8)))
    for probs in deltas:
        assert np.allclose(probs, 1 / 8, atol=1e-9)
    assert np.allclose(first, np.eye(2) / 2, atol=1e-9)


def test_simulator_sends_maximally_mixed_halves():
    deltas, first = port_marginals(ubqc_ideal(random_pattern(1, 2, 8)))
    assert np.allclose(first, np.eye(2) / 2, atol=1e-9)
    for probs in deltas:
        assert np.allclose(probs, 1 / 8, atol=1e-9)


def test_comb_chain_single_column():
    pattern = random_pattern(1, 1, 6)
    ref = comb_choi(ubqc_alice(1, pattern), ["A.in1"])
    for other in (ubqc_alice(2, pattern), ubqc_alice(3, pattern), ubqc_ideal(pattern)):
        assert comb_equal(ref, comb_choi(other, ["A.in1"]))[0]
    ok, gap = comb_equal(ref, comb_choi(ubqc_alice(1, pattern, leaky=True), ["A.in1"]))
    assert not ok and gap > 1e-3


def test_comb_dimensions_stay_small():
    comb = comb_choi(ubqc_alice(1, random_pattern(1, 2, 0)), ["A.in1"])
    assert len(comb.wires) <= 7
    assert int(np.prod(comb.key_dims)) <= 8 * 8 * 2 * 2


# -- ideal resources ---------------------------------------------------------------------


def resource_and_input(variant, seed=0):
    rng = np.random.default_rng(seed)
    U = random_unitary(2, rng)
    psi = random_pure(["A.in1"], rng)
    return ideal_resource(variant, U), U, psi


def test_honest_resource_outputs_computation():
    res, U, psi = resource_and_input("S^b")
    v = U @ psi.amplitudes
    assert np.allclose(res.run(psi).matrix, np.outer(v, v.conj()), atol=1e-9)


def test_verifiable_resource_error_branch():
    res, _, psi = resource_and_input("S^bv")
    out = res.run(psi, b=1, c=1)
    assert out.wires == ("A.out1", "A.flag")
    assert np.allclose(out.matrix, np.diag([0, 1, 0, 0]), atol=1e-12)


def test_verifiable_resource_honest_flag():
    res, U, psi = resource_and_input("S^bv")
    out = res.run(psi, b=1, c=0).matrix
    v = np.kron(U @ psi.amplitudes, [1, 0])
    assert np.allclose(out, np.outer(v, v.conj()), atol=1e-9)


def test_blind_resource_applies_bobs_map():
    res, _, psi = resource_and_input("S^b")
    reset = KrausChannel([np.array([[1, 0], [0, 0]], dtype=complex), np.array([[0, 1], [0, 0]], dtype=complex)])
    assert np.allclose(res.run(psi, b=1, instructions=reset).matrix, np.diag([1, 0]), atol=1e-12)
    filtered = res.run(psi, b=1, instructions=reset, filtered=True).matrix
    assert np.allclose(filtered, res.run(psi).matrix, atol=1e-12)


def test_resource_validation():
    with pytest.raises(ValueError):
        IdealResource("S^x", np.eye(2))
    with pytest.raises(ValueError):
        IdealResource("S^b", np.ones((2, 2)))
    res, _, psi = resource_and_input("S^bv")
    with pytest.raises(ValueError):
        res.run(psi, b=1, c=2)


def test_pattern_resource_leak():
    p = random_pattern(1, 3, 0)
    res = ideal_resource("S^b", p)
    assert res.leak == (1, 3, "quantum")
    assert np.allclose(res.unitary, pattern_unitary(p))


# -- quantum one-time pad -------------------------------------------------------------------


def test_qotp_identity_eavesdropper_is_perfect():
    psi = random_pure(["A.msg", "X.R1"], np.random.default_rng(0))
    eve = KrausChannel([np.eye(4, dtype=complex)])
    assert trace_distance(qotp_real(psi, eve), qotp_ideal(psi, eve)) <= 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_qotp_random_eavesdropper(seed):
    psi = random_pure(["A.msg", "X.R1"], np.random.default_rng(seed))
    eve = random_channel(4, 4, 4, seed)
    assert trace_distance(qotp_real(psi, eve), qotp_ideal(psi, eve)) <= 1e-9


def test_encryption_twirls_to_maximally_mixed():
    psi = random_pure(["q"], np.random.default_rng(1))
    res = evolve(psi, lambda ctx: qotp_encrypt(ctx, "q"))
    assert np.allclose(res.state(["q"]).density().matrix, np.eye(2) / 2, atol=1e-12)


# -- one-way protocols ------------------------------------------------------------------------


def discard_second():
    ops = [np.kron(np.eye(2), np.array([[1, 0]])), np.kron(np.eye(2), np.array([[0, 1]]))]
    return KrausChannel([o.astype(complex) for o in ops])


def test_oneway_discarding_bob_returns_input():
    tau = DensityOperator(["B.tau0"], random_density(2, np.random.default_rng(0)))
    suite = oneway_suite(tau, discard_second())
    psi = random_pure(["A.in1", "X.R1"], np.random.default_rng(1))
    res = run_interaction(suite["alice"], suite["bob"], psi)
    assert trace_distance(res.output().matrix, as_density(psi).matrix) <= 1e-12
    assert suite["leak"] == (1, 1, "quantum")


@pytest.mark.parametrize("seed", range(3))
def test_oneway_real_equals_ideal(seed):
    tau = DensityOperator(["B.tau0"], random_density(2, np.random.default_rng(seed)))
    suite = oneway_suite(tau, random_channel(4, 2, 4, seed))
    a = comb_choi(suite["alice"], suite["inputs"])
    b = comb_choi(suite["ideal"], suite["inputs"])
    assert comb_equal(a, b, 1e-12)[0]

