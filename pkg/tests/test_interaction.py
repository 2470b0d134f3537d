import numpy as np
import pytest

from dqc.interaction import (
    A2B,
    B2A,
    CapacityError,
    PartyProgram,
    Round,
    ScheduleError,
    comb_choi,
    comb_equal,
    evolve,
    run_interaction,
)
from dqc.qcore import X, as_density, random_pure, trace_distance

ECHO = (Round(A2B, "qubit"), Round(B2A, "qubit"))


def echo_alice(gate=None):
    def send(ctx):
        if gate is not None:
            ctx.apply(gate, "A.in")
        return "A.in"

    def recv(ctx, q):
        ctx.rename(q, "A.out")

    return PartyProgram("echo", "A", ECHO, (send, recv), outputs=("A.out",))


def echo_bob():
    def recv(ctx, q):
        ctx.rename(q, "B.q")

    return PartyProgram("bob", "B", ECHO, (recv, lambda ctx: "B.q"))


def test_echo_returns_input():
    psi = random_pure(["A.in", "X.R"], np.random.default_rng(0))
    res = run_interaction(echo_alice(), echo_bob(), psi)
    out = res.state(["A.out", "X.R"]).density()
    assert trace_distance(out.matrix, as_density(psi).matrix) <= 1e-12


def test_exact_mode_is_deterministic():
    psi = random_pure(["A.in"], np.random.default_rng(1))
    a = run_interaction(echo_alice(), echo_bob(), psi).output().matrix
    b = run_interaction(echo_alice(), echo_bob(), psi).output().matrix
    assert np.array_equal(a, b)


def test_schedule_mismatch_is_rejected():
    bob = PartyProgram("bad", "B", (Round(A2B, "qubit"), Round(B2A, "bit")), (lambda c, q: None, lambda c: 0))
    with pytest.raises(ScheduleError):
        run_interaction(echo_alice(), bob, random_pure(["A.in"], np.random.default_rng(0)))


def test_round_validation():
    with pytest.raises(ScheduleError):
        Round("sideways", "qubit")
    with pytest.raises(ScheduleError):
        Round(A2B, "trit")
    with pytest.raises(ScheduleError):
        PartyProgram("x", "A", ECHO, (lambda c: "A.in",))


def test_bad_payload_is_rejected():
    sched = (Round(A2B, "bit"),)
    alice = PartyProgram("a", "A", sched, (lambda c: 2,))
    bob = PartyProgram("b", "B", sched, (lambda c, v: None,))
    with pytest.raises(ScheduleError):
        run_interaction(alice, bob)


# -- classical randomness ------------------------------------------------------------

COIN = (Round(A2B, "bit"), Round(B2A, "bit"))


def coin_parties():
    def send(ctx):
        return ctx.random("A.c", 2)

    def bob_recv(ctx, v):
        ctx.set("B.c", v)

    def bob_send(ctx):
        return ctx.get("B.c") ^ 1

    def alice_recv(ctx, v):
        ctx.prepare("A.out")
        if v:
            ctx.apply(X, "A.out")

    alice = PartyProgram("a", "A", COIN, (send, alice_recv), outputs=("A.out",))
    bob = PartyProgram("b", "B", COIN, (bob_recv, bob_send))
    return alice, bob


def test_exact_mode_averages_over_coins():
    res = run_interaction(*coin_parties())
    assert np.allclose(res.output().matrix, np.eye(2) / 2)
    cq = res.state(["A.out"], keys=["A.c"])
    assert set(cq.blocks) == {(0,), (1,)}


def test_sample_mode_records_values_and_is_seeded():
    a = run_interaction(*coin_parties(), mode="sample", seed=5)
    b = run_interaction(*coin_parties(), mode="sample", seed=5)
    assert a.transcript == b.transcript
    v0, v1 = (r["value"] for r in a.transcript["rounds"])
    assert v1 == v0 ^ 1
    out = a.output().matrix
    assert out[v1, v1] == pytest.approx(1.0)


def test_transcript_shape():
    res = run_interaction(*coin_parties())
    t = res.transcript
    assert set(t) == {"mode", "seed", "rounds", "output_dim"}
    assert t["output_dim"] == 2
    assert t["rounds"][0] == {"dir": A2B, "kind": "bit", "value": None, "dim": 2}


def test_measurement_forks_branches():
    def fn(ctx):
        ctx.prepare("q", np.array([1, 1]) / np.sqrt(2))
        ctx.set("s", ctx.measure("q"))

    res = evolve(None, fn)
    cq = res.state([], keys=["s"])
    assert cq.trace() == pytest.approx(1.0)
    assert len(res.branches) == 2


def test_capacity_guard():
    def fn(ctx):
        for j in range(4):
            ctx.prepare(f"q{j}")

    sched = (Round(A2B, "bit"),)
    alice = PartyProgram("a", "A", sched, (lambda c: 0,), setup=fn)
    bob = PartyProgram("b", "B", sched, (lambda c, v: None,))
    with pytest.raises(CapacityError):
        run_interaction(alice, bob, max_wires=3)


# -- combs ------------------------------------------------------------------------------


def test_echo_comb_ports_and_normalization():
    c = comb_choi(echo_alice(), ["A.in"])
    assert c.wires == ("Rin0", "P0", "P1.ref", "Out0")
    assert (c.in_dim, c.out_dim) == (4, 4)
    assert c.state.trace() == pytest.approx(1.0)


def test_comb_equality_distinguishes_strategies():
    a = comb_choi(echo_alice(), ["A.in"])
    assert comb_equal(a, comb_choi(echo_alice(), ["A.in"]))[0]
    ok, gap = comb_equal(a, comb_choi(echo_alice(X), ["A.in"]))
    assert not ok and gap > 0.1


def test_comb_with_classical_ports():
    alice, _ = coin_parties()
    c = comb_choi(alice)
    assert c.keys == ("P0", "P1")
    assert c.key_dims == (2, 2)
    assert c.dense().matrix.shape == (c.in_dim * c.out_dim,) * 2
