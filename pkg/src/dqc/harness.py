"""Security-definition checkers, distinguishers, simulators and reduction identities.

Checkers return witness epsilons: values at which a definition provably holds
for an explicit construction. Exactness is only claimed at zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .interaction import (
    A2B,
    B2A,
    CapacityError,
    Ctx,
    InteractionResult,
    PartyProgram,
    Round,
    ScheduleError,
    comb_choi,
    comb_equal,
    qubit_cap,
    run_interaction,
)
from .mbqc import MeasurementPattern, pattern_unitary
from .protocols import IdealResource, ubqc_alice, ubqc_bob_honest
from .qcore import (
    CNOT,
    TOL,
    DensityOperator,
    H,
    KrausChannel,
    X,
    Z,
    apply_channel,
    maximally_entangled,
    purified_distance,
    random_density,
    random_pure,
    random_unitary,
    tensor,
    trace_distance,
    z_rotation,
)

VERIFY_XATOL = 1e-6


@dataclass(frozen=True)
class SecurityReport:
    check: str
    epsilon: float | None
    passed: bool
    trials: int
    seed: int
    tol: float
    citation: str
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.epsilon is not None and self.epsilon < -TOL:
            raise ValueError("witness epsilon must be non-negative")

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "epsilon": None if self.epsilon is None else float(self.epsilon),
            "pass": bool(self.passed),
            "trials": int(self.trials),
            "seed": int(self.seed),
            "tol": float(self.tol),
            "citation": self.citation,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict())


# ---------------------------------------------------------------------------
# Adversaries


@dataclass(frozen=True)
class AdversaryStrategy:
    """A cheating Bob described round by round.

    ``actions[r]`` depends on the round:

    * qubit received: a unitary on (received, memory) or ``"keep"``/``"measure"``;
      kept qubits join a FIFO of held qubits.
    * classical value received: ``None`` or a dict value -> unitary on
      (oldest held or a fresh |0>, memory); the value is recorded.
    * bit sent: a unitary on (oldest held or fresh, memory), then a Z
      measurement; ``("xy", flip)`` measures the oldest held qubit at the
      last received angle and optionally flips the reported bit.
    * qubit sent: a unitary on (oldest held or fresh, memory) or ``"fresh"``
      to send a new |0> while keeping everything held.

    The private register is ``memory`` qubits ``B.m*`` starting in |0...0>,
    or maximally entangled with external wires ``X.S*`` when
    ``entangle_reference`` is set.
    """

    name: str
    schedule: tuple
    actions: tuple
    memory: int = 1
    entangle_reference: bool = False

    def __post_init__(self):
        if len(self.actions) != len(self.schedule):
            raise ScheduleError("one action per round is required")
        for rnd, act in zip(self.schedule, self.actions):
            if rnd.sender() == "A" and rnd.kind == "qubit" and isinstance(act, np.ndarray):
                _check_unitary(act, 2 ** (1 + self.memory))

    def memory_wires(self) -> list[str]:
        return [f"B.m{j}" for j in range(self.memory)]

    def program(self) -> PartyProgram:
        mem = self.memory_wires()

        def setup(ctx: Ctx):
            if any(ctx.has_wire(w) for w in mem):
                return
            if self.entangle_reference:
                refs = [f"X.S{j}" for j in range(self.memory)]
                st = maximally_entangled(mem, refs)
                ctx.prepare(list(st.wires), st.amplitudes)
            elif mem:
                ctx.prepare(mem)

        def held_wires(ctx: Ctx) -> list[str]:
            return sorted((w for w in ctx.wires("B.h")), key=lambda w: int(w[3:]))

        def work(ctx: Ctx, r: int) -> str:
            hs = held_wires(ctx)
            if hs:
                return hs[0]
            w = f"B.w{r}"
            ctx.prepare(w)
            return w

        handlers = []
        for r, (rnd, act) in enumerate(zip(self.schedule, self.actions)):
            if rnd.sender() == "A" and rnd.kind == "qubit":
                def h(ctx, wire, r=r, act=act):
                    name = f"B.h{r}"
                    ctx.rename(wire, name)
                    if isinstance(act, str) and act == "measure":
                        ctx.set(f"B.c{r}", ctx.measure(name))
                    elif act is not None and not isinstance(act, str):
                        ctx.apply(act, [name] + mem)
            elif rnd.sender() == "A":
                def h(ctx, value, r=r, act=act):
                    ctx.set(f"B.c{r}", value)
                    if act:
                        ctx.apply(act[value], [work(ctx, r)] + mem)
            elif rnd.kind == "bit":
                def h(ctx, r=r, act=act):
                    if isinstance(act, tuple) and act[0] == "xy":
                        angle = _last_value(ctx, r)
                        s = ctx.measure_xy(held_wires(ctx)[0], angle) ^ int(act[1])
                    else:
                        w = work(ctx, r)
                        if act is not None:
                            ctx.apply(act, [w] + mem)
                        s = ctx.measure(w)
                    ctx.set(f"B.s{r}", s)
                    return s
            elif rnd.kind == "qubit":
                def h(ctx, r=r, act=act):
                    if isinstance(act, str) and act == "fresh":
                        w = f"B.w{r}"
                        ctx.prepare(w)
                        return w
                    w = work(ctx, r)
                    if act is not None:
                        ctx.apply(act, [w] + mem)
                    return w
            else:
                raise ScheduleError(f"adversary cannot send {rnd.kind} messages")
            handlers.append(h)
        return PartyProgram(self.name, "B", tuple(self.schedule), tuple(handlers), setup=setup)


def _last_value(ctx: Ctx, r: int) -> int:
    for q in range(r - 1, -1, -1):
        if ctx.has(f"B.c{q}"):
            return ctx.get(f"B.c{q}")
    return 0


def _check_unitary(U, d):
    U = np.asarray(U)
    if U.shape != (d, d) or not np.allclose(U.conj().T @ U, np.eye(d), atol=1e-9):
        raise ValueError(f"adversary action must be a {d}x{d} unitary")


def random_adversary(schedule: Sequence[Round], seed: int, *, memory: int = 1, entangle_reference: bool = False) -> AdversaryStrategy:
    """Haar-random unitaries in every round, angle-conditioned where angles arrive."""
    rng = np.random.default_rng(seed)
    d = 2 ** (1 + memory)
    actions = []
    for rnd in schedule:
        if rnd.sender() == "A" and rnd.kind != "qubit":
            actions.append({v: random_unitary(d, rng) for v in range(rnd.dim)})
        else:
            actions.append(random_unitary(d, rng))
    return AdversaryStrategy(f"random-{seed}", tuple(schedule), tuple(actions), memory, entangle_reference)


def library_adversary(kind: str, schedule: Sequence[Round]) -> AdversaryStrategy:
    """Fixed shapes: measure-first, replay, swap-fresh."""
    actions = []
    for rnd in schedule:
        if rnd.sender() == "A":
            if rnd.kind == "qubit":
                actions.append("measure" if kind == "measure-first" else "keep")
            else:
                actions.append(None)
        elif rnd.kind == "qubit":
            actions.append("fresh" if kind == "swap-fresh" else None)
        else:
            actions.append(None)
    if kind not in ("measure-first", "replay", "swap-fresh"):
        raise ValueError(f"unknown library adversary {kind!r}")
    return AdversaryStrategy(kind, tuple(schedule), tuple(actions), memory=0)


def _bob_program(adversary) -> PartyProgram:
    if isinstance(adversary, PartyProgram):
        return adversary
    if isinstance(adversary, AdversaryStrategy):
        return adversary.program()
    raise TypeError("adversary must be an AdversaryStrategy or a role-B PartyProgram")


# ---------------------------------------------------------------------------
# Protocols under test


@dataclass(frozen=True)
class DQCProtocol:
    """A delegated computation of ``unitary`` on ``n`` input qubits.

    ``factory(prefix, cut)`` builds Alice's program. With ``cut`` the program
    stops before the accept/reject measurement and leaves that register on
    ``{prefix}.bar``; otherwise verifiable protocols output ``{prefix}.flag``.
    """

    name: str
    n: int
    unitary: np.ndarray = field(repr=False)
    factory: Callable[[str, bool], PartyProgram] = field(repr=False)
    honest_bob: Callable[[], PartyProgram] | None = field(default=None, repr=False)
    verifiable: bool = True
    has_cut: bool = True

    def alice(self, prefix: str = "A", cut: bool = False) -> PartyProgram:
        if cut and not self.has_cut:
            raise ValueError(f"{self.name} exposes no accept/reject register")
        return self.factory(prefix, cut)

    @property
    def schedule(self) -> tuple:
        return self.alice().schedule

    def inputs(self, prefix: str = "A") -> list[str]:
        return [f"{prefix}.in{x}" for x in range(1, self.n + 1)]

    def outputs(self, prefix: str = "A") -> list[str]:
        outs = [f"{prefix}.out{x}" for x in range(1, self.n + 1)]
        return outs + [f"{prefix}.flag"] if self.verifiable else outs


def _flagged(program: PartyProgram, prefix: str, cut: bool) -> PartyProgram:
    """Add an accept-always flag (or an untouched cut register) to a program."""
    inner = program.finish

    def finish(ctx):
        if inner:
            inner(ctx)
        ctx.prepare(f"{prefix}.bar" if cut else f"{prefix}.flag")

    outs = tuple(program.outputs) + (() if cut else (f"{prefix}.flag",))
    return replace(program, finish=finish, outputs=outs)


def ubqc_protocol(pattern: MeasurementPattern, version: int = 1, *, accept_stub: bool = False, leaky: bool = False) -> DQCProtocol:
    """UBQC as a protocol under test; ``accept_stub`` adds a flag that always accepts."""
    U = pattern_unitary(pattern)

    def factory(prefix, cut):
        prog = ubqc_alice(version, pattern, prefix, leaky=leaky)
        return _flagged(prog, prefix, cut) if accept_stub else prog

    name = f"ubqc-v{version}" + ("-stub" if accept_stub else "") + ("-leaky" if leaky else "")
    return DQCProtocol(name, pattern.n, U, factory, lambda: ubqc_bob_honest(pattern.n, pattern.m),
                       verifiable=accept_stub, has_cut=accept_stub)


def cleartext_protocol() -> DQCProtocol:
    """Alice hands her qubit to Bob, who keeps it."""

    def factory(prefix, cut):
        return PartyProgram("cleartext", "A", (Round(A2B, "qubit"),), (lambda ctx: f"{prefix}.in1",))

    def bob():
        return PartyProgram("keep", "B", (Round(A2B, "qubit"),), (lambda ctx, w: ctx.rename(w, "B.h0"),))

    return DQCProtocol("cleartext", 1, np.eye(2), factory, bob, verifiable=False, has_cut=False)


TOY_UNITARY = H @ z_rotation(1)
TOY_SCHEDULE = (Round(A2B, "qubit"), Round(B2A, "qubit"))


def toy_protocol(lam: float, kind: str = "trap", unitary: np.ndarray | None = None) -> DQCProtocol:
    """One-qubit compute-with-trap family.

    Alice keeps a trap |0> next to her data. With probability ``lam`` she
    swaps them, so the data rather than the trap travels to Bob. Whatever
    travels is one-time padded and comes back; the trap is checked in Z.
    Larger ``lam`` means tampering goes unnoticed more often. ``kind="copy"``
    instead makes the check register a CNOT copy of the input, which
    breaks independence.
    """
    if not 0 <= lam <= 1:
        raise ValueError("lam must be a probability")
    if kind not in ("trap", "copy"):
        raise ValueError(f"unknown toy kind {kind!r}")
    U = TOY_UNITARY if unitary is None else np.asarray(unitary, dtype=complex)

    def factory(p, cut):
        data, trap = f"{p}.in1", f"{p}.trap"

        def setup(ctx):
            ctx.prepare(trap)
            if kind == "trap" and lam > 0 and ctx.random(f"{p}.t", 2, probs=[1 - lam, lam]):
                ctx.swap(data, trap)

        def send(ctx):
            z = ctx.random(f"{p}.kz", 2)
            x = ctx.random(f"{p}.kx", 2)
            if z:
                ctx.apply(Z, trap)
            if x:
                ctx.apply(X, trap)
            return trap

        def recv(ctx, wire):
            ctx.rename(wire, trap)
            if ctx.get(f"{p}.kx"):
                ctx.apply(X, trap)
            if ctx.get(f"{p}.kz"):
                ctx.apply(Z, trap)
            if ctx.peek(f"{p}.t", 0):
                ctx.swap(data, trap)
            ctx.forget(f"{p}.kx", f"{p}.kz", f"{p}.t")

        def finish(ctx):
            if kind == "copy":
                ctx.discard(trap)
                ctx.prepare(trap)
                ctx.apply(CNOT, [data, trap])
            ctx.apply(U, data)
            ctx.rename(data, f"{p}.out1")
            if cut:
                ctx.rename(trap, f"{p}.bar")
                return
            if ctx.measure(trap):
                ctx.discard(f"{p}.out1")
                ctx.prepare([f"{p}.out1", f"{p}.flag"], np.array([0, 1, 0, 0], dtype=complex))
            else:
                ctx.prepare(f"{p}.flag")

        outs = (f"{p}.out1",) + ((f"{p}.bar",) if cut else (f"{p}.flag",))
        return PartyProgram(f"toy-{kind}-{lam:g}", "A", TOY_SCHEDULE, (send, recv), setup=setup,
                            finish=finish, outputs=outs)

    def bob():
        return AdversaryStrategy("honest", TOY_SCHEDULE, ("keep", None), memory=0).program()

    return DQCProtocol(f"toy-{kind}-{lam:g}", 1, U, factory, bob)


# ---------------------------------------------------------------------------
# Simulator for S^bv built from the protocol itself


def simulator_from_verifiability(protocol: DQCProtocol, prefix: str = "A", *, cut: bool = False) -> PartyProgram:
    """S^bv with a simulator that runs Alice's side on a maximally mixed dummy input.

    The simulator never sees Alice's input: it projects the internal
    accept/reject register and sends c = 1 to the resource exactly when an
    error is detected. With ``cut`` the register is left on
    ``{prefix}.bar`` instead and the resource releases U(psi).
    """
    inner = protocol.alice("S", cut=True)
    resource = IdealResource("S^bv", protocol.unitary, (protocol.n, 0, "quantum"), None, prefix)
    holds = [f"S.hold{x}" for x in range(1, protocol.n + 1)]

    def setup(ctx):
        for x, h in enumerate(holds, 1):
            ctx.rename(f"{prefix}.in{x}", h)
            ctx.prepare_mixed([f"S.in{x}"], np.eye(2) / 2)
        if inner.setup:
            inner.setup(ctx)

    def finish(ctx):
        if inner.finish:
            inner.finish(ctx)
        ctx.discard(*[w for w in inner.outputs if w != "S.bar"])
        if cut:
            resource.honest(ctx, holds)
            ctx.discard(f"{prefix}.flag")
            ctx.rename("S.bar", f"{prefix}.bar")
        else:
            c = ctx.measure("S.bar")
            resource.cheat(ctx, c=c, inputs=holds)
        ctx.forget(*[k for k in list(ctx.b.cl) + list(ctx.b.lazy) if k.startswith("S.")])

    outs = tuple(protocol.outputs(prefix)[: protocol.n]) + ((f"{prefix}.bar",) if cut else (f"{prefix}.flag",))
    return PartyProgram(f"{protocol.name}-simulated", "A", inner.schedule, inner.handlers, setup=setup,
                        finish=finish, outputs=outs)


def verifiable_protocol_view(protocol: DQCProtocol) -> DQCProtocol:
    """The ideal system as a protocol object, so every checker applies to it."""
    return DQCProtocol(f"{protocol.name}-ideal", protocol.n, protocol.unitary,
                       lambda p, cut: simulator_from_verifiability(protocol, p, cut=cut),
                       protocol.honest_bob, True, True)


# ---------------------------------------------------------------------------
# Running protocol against adversary


def probe_state(wires: Sequence[str], ref: str = "X.R", *, classical: bool = False):
    """|Phi+> between each wire and a reference; dephased when ``classical``."""
    refs = [f"{ref}{j + 1}" for j in range(len(wires))]
    st = maximally_entangled(list(wires), refs)
    if not classical:
        return st
    rho = np.diag(np.abs(st.amplitudes) ** 2).astype(complex)
    return DensityOperator(st.wires, rho)


def _guard(state, protocol_qubits: int = 0) -> None:
    cap = qubit_cap()
    if len(state.wires) + protocol_qubits > cap:
        raise CapacityError(f"{len(state.wires) + protocol_qubits} qubits exceed the cap of {cap} (set DQC_QUBIT_CAP)")


def run_against(alice: PartyProgram, adversary, state, *, mode: str = "exact", seed: int = 0) -> InteractionResult:
    _guard(state)
    return run_interaction(alice, _bob_program(adversary), state, mode=mode, seed=seed)


def _view(res: InteractionResult, extra: Sequence[str] = (), refs: str = "X.") -> tuple[list, list]:
    wires = list(extra) + [w for w in res.wire_names("B.")] + [w for w in res.wire_names(refs) if w not in extra]
    return wires, res.key_names("B.")


def _factorization_defect(res: InteractionResult, tested: Sequence[str], refs: Sequence[str]) -> float:
    """D(rho_{tested,R}, rho_tested (x) I/d_R) over all of Bob's classical records."""
    keys = res.key_names("B.")
    rho = res.state(list(tested) + list(refs), keys)
    marg = rho.partial_trace(refs).kron(refs, np.eye(2 ** len(refs)) / 2 ** len(refs))
    return float(rho.distance(marg))


def check_sa_blindness(protocol: DQCProtocol, adversary, *, classical_probe: bool = False) -> float:
    """Witness epsilon for Bob's view factoring through discarding Alice's input."""
    probe = probe_state(protocol.inputs(), classical=classical_probe)
    res = run_against(protocol.alice(), adversary, probe)
    refs = [w for w in probe.wires if w.startswith("X.R")]
    bob = res.wire_names("B.") + res.wire_names("X.S")
    return _factorization_defect(res, bob, refs)


def check_independence(protocol: DQCProtocol, adversary) -> float:
    """Same probe test with the accept/reject register on the tested side."""
    if not protocol.has_cut:
        raise ValueError(f"{protocol.name} exposes no accept/reject register")
    probe = probe_state(protocol.inputs())
    res = run_against(protocol.alice(cut=True), adversary, probe)
    refs = [w for w in probe.wires if w.startswith("X.R")]
    tested = res.wire_names("A.bar") + res.wire_names("B.") + res.wire_names("X.S")
    return _factorization_defect(res, tested, refs)


def _ideal_targets(protocol: DQCProtocol, psi, outs: Sequence[str]):
    """(U psi (x) |flag 0>, |err> (x) psi_R) as densities on outs + references."""
    ins = protocol.inputs()
    rho = psi if isinstance(psi, DensityOperator) else DensityOperator(psi.wires, np.outer(psi.amplitudes, psi.amplitudes.conj()))
    refs = [w for w in rho.wires if w not in ins]
    rho = rho.reorder(ins + refs)
    d_in, d_ref = 2 ** len(ins), 2 ** len(refs)
    Uf = np.kron(protocol.unitary, np.eye(d_ref))
    ok = np.kron(Uf @ rho.matrix @ Uf.conj().T, np.diag([1, 0]))
    psi_r = rho.matrix.reshape(d_in, d_ref, d_in, d_ref).trace(axis1=0, axis2=2)
    err = np.zeros((2 * d_in, 2 * d_in))
    err[1, 1] = 1
    # ok is ordered (outs, refs, flag); bring the flag next to the outputs
    n_o = len(ins)
    ok = DensityOperator(list(outs[:n_o]) + refs + [outs[-1]], ok, check=False).reorder(list(outs) + refs).matrix
    err_full = np.kron(err, psi_r)
    return ok, err_full, refs


def check_sa_verifiability(protocol: DQCProtocol, adversary, psi, bob_state=None) -> tuple[float, float]:
    """(p, witness) minimizing D(rho_{AR}, p U(psi) + (1 - p) |err><err| (x) psi_R)."""
    if not protocol.verifiable:
        raise ValueError(f"{protocol.name} has no error flag")
    if any(w.startswith("B.") for w in psi.wires):
        raise ValueError("Alice's input must not contain Bob's registers (product form)")
    state = psi if bob_state is None else tensor(psi, bob_state)
    res = run_against(protocol.alice(), adversary, state)
    outs = protocol.outputs()
    ok, err, refs = _ideal_targets(protocol, psi, outs)
    rho = res.state(list(outs) + refs).density().matrix

    def dist(p):
        return trace_distance(rho, p * ok + (1 - p) * err, generalized=True)

    opt = minimize_scalar(dist, bounds=(0.0, 1.0), method="bounded", options={"xatol": VERIFY_XATOL})
    best = min([(dist(0.0), 0.0), (dist(1.0), 1.0), (float(opt.fun), float(opt.x))])
    return best[1], float(best[0])


def check_blind_verifiability(protocol: DQCProtocol, adversary, psi=None) -> float:
    """Distance between the real run and the accept/reject construction.

    The construction runs Alice's side on a maximally mixed input, keeps
    Bob's part together with the projected accept/reject register, and
    outputs U(psi) on accept or |err> on reject. It is evaluated on the
    probe (default) or on ``psi``.
    """
    state = probe_state(protocol.inputs()) if psi is None else psi
    real = run_against(protocol.alice(), adversary, state)
    ideal = run_against(simulator_from_verifiability(protocol), adversary, state)
    wires, keys = _view(real, protocol.outputs())
    return float(real.state(wires, keys).distance(ideal.state(wires, keys)))


# ---------------------------------------------------------------------------
# Distinguishers


@dataclass(frozen=True)
class DistinguisherStrategy:
    """Input on Alice's interface and Bob's behavior; the final measurement is optimal."""

    name: str
    state: object
    adversary: object


def strategy_pool(protocol: DQCProtocol, count: int, seed: int) -> list[DistinguisherStrategy]:
    """Seeded random strategies plus the fixed library shapes."""
    rng = np.random.default_rng(seed)
    sched = protocol.schedule
    out = []
    ins = protocol.inputs()
    for kind in ("measure-first", "replay", "swap-fresh"):
        if len(out) < count and all(r.kind == "qubit" or r.sender() == "A" for r in sched):
            out.append(DistinguisherStrategy(kind, random_pure(ins + ["X.R1"], rng), library_adversary(kind, sched)))
    j = 0
    while len(out) < count:
        s = int(rng.integers(2**31))
        psi = random_pure(ins + [f"X.R{k + 1}" for k in range(len(ins))], rng)
        out.append(DistinguisherStrategy(f"random-{j}", psi, random_adversary(sched, s)))
        j += 1
    return out


def distinguishing_advantage(real: PartyProgram, ideal: PartyProgram, strategy: DistinguisherStrategy) -> float:
    r = run_against(real, strategy.adversary, strategy.state)
    i = run_against(ideal, strategy.adversary, strategy.state)
    wires, keys = _view(r, list(real.outputs))
    return float(r.state(wires, keys).distance(i.state(wires, keys)))


def advantage_lower_bound(real: PartyProgram, ideal: PartyProgram, strategies: Sequence[DistinguisherStrategy]) -> float:
    if real.schedule != ideal.schedule:
        raise ScheduleError("real and ideal systems have different schedules")
    if tuple(real.outputs) != tuple(ideal.outputs):
        raise ScheduleError("real and ideal systems have different outputs")
    return max((distinguishing_advantage(real, ideal, s) for s in strategies), default=0.0)


def thm1_witness(protocol: DQCProtocol, strategies: Sequence[DistinguisherStrategy]) -> float:
    """Blind-verifiability witness covering every input the strategies and simulator use."""
    eps = 0.0
    for s in strategies:
        eps = max(eps, check_blind_verifiability(protocol, s.adversary),
                  check_blind_verifiability(protocol, s.adversary, s.state))
    return eps


def comb_equality(real: PartyProgram, ideal: PartyProgram, inputs: Sequence[str], tol: float = 1e-9) -> tuple[bool, float]:
    return comb_equal(comb_choi(real, inputs), comb_choi(ideal, inputs), tol)


# ---------------------------------------------------------------------------
# Numeric identities


def teleport_reduction_check(channel: KrausChannel, n: int, psi, seed: int = 0) -> float:
    """Gap between E(psi_{ABR}) and 2^{2n} <Phi+|_{QS} E(Phi+_{QA} (x) psi_{SBR}) |Phi+>_{QS}.

    ``psi`` lists Alice's ``n`` wires first; the channel acts on Alice's wires
    followed by the next ``k`` wires, where ``2^(n+k)`` is its input dimension.
    """
    wires = list(psi.wires)
    k = int(round(np.log2(channel.in_dim))) - n
    if k < 0 or channel.in_dim != channel.out_dim or 2 ** (n + k) != channel.in_dim or n + k > len(wires):
        raise ValueError("channel must map Alice's n qubits plus Bob's qubits to themselves")
    a, b = wires[:n], wires[n:n + k]
    rho = psi if isinstance(psi, DensityOperator) else DensityOperator(wires, np.outer(psi.amplitudes, psi.amplitudes.conj()))
    _guard(rho, 2 * n)
    ch = KrausChannel(channel.operators)
    lhs = apply_channel(rho, ch, a + b).reorder(wires)

    q = [f"T.q{j}" for j in range(n)]
    s = [f"T.s{j}" for j in range(n)]
    moved = DensityOperator(s + wires[n:], rho.matrix, check=False)
    full = apply_channel(tensor(maximally_entangled(q, a), moved), ch, a + b)
    full = full.reorder(q + s + wires)
    d = 2**n
    phi = np.eye(d).reshape(-1) / np.sqrt(d)
    rest = 2 ** len(wires)
    m = full.matrix.reshape(d * d, rest, d * d, rest)
    rhs = d * d * np.einsum("i,iajb,j->ab", phi.conj(), m, phi)
    return float(trace_distance(lhs.matrix, rhs))


def metric_lemma_check(sample_count: int, dim: int, seed: int, slack: float = 1e-9) -> SecurityReport:
    """Sample subnormalized pairs and test D-bar <= P <= sqrt(2 D-bar)."""
    if dim > 2 ** qubit_cap():
        raise CapacityError("dimension exceeds the qubit cap")
    rng = np.random.default_rng(seed)
    worst, violations = 0.0, 0
    for _ in range(sample_count):
        pair = []
        for _ in range(2):
            rank = int(rng.integers(1, dim + 1))
            pair.append(random_density(dim, rng, rank=rank, trace=float(rng.uniform(0.05, 1.0))))
        rho, sigma = pair
        d = trace_distance(rho, sigma, generalized=True)
        p = purified_distance(rho, sigma)
        v = max(d - p, p - np.sqrt(2 * d), 0.0)
        worst = max(worst, v)
        violations += v > slack
    return SecurityReport("metric-lemma", worst, violations == 0, sample_count, seed, slack,
                          "generalized trace distance is bounded by the purified distance",
                          {"dim": dim, "violations": int(violations)})


def fk_conversion_check(sample_count: int, seed: int, slack: float = 1e-9) -> SecurityReport:
    """Sample (p, psi, sigma) and test p D(sigma, U psi) <= sqrt(tr(Pi rho))."""
    rng = np.random.default_rng(seed)
    worst, violations = -np.inf, 0
    for _ in range(sample_count):
        U = random_unitary(2, rng)
        psi = random_pure(["a", "r"], rng).amplitudes
        target = np.kron(U, np.eye(2)) @ psi  # (out, ref)
        # basis order (out, flag, ref): flag 0 is accept
        v_ok = np.einsum("ar,f->afr", target.reshape(2, 2), np.array([1, 0])).reshape(-1)
        ok = np.outer(v_ok, v_ok.conj())
        p = float(rng.uniform())
        mix = float(rng.uniform())
        s = random_density(4, rng, rank=int(rng.integers(1, 5)))
        s = mix * s + (1 - mix) * np.outer(target, target.conj())
        sigma = np.einsum("arbs,fg->afrbgs", s.reshape(2, 2, 2, 2), np.diag([1, 0])).reshape(8, 8)
        psi_r = np.einsum("ar,as->rs", psi.reshape(2, 2), psi.reshape(2, 2).conj())
        err = np.einsum("ab,fg,rs->afrbgs", np.diag([1, 0]), np.diag([0, 1]), psi_r).reshape(8, 8)
        err_proj = np.einsum("ab,fg,rs->afrbgs", np.diag([1, 0]), np.diag([0, 1]), np.eye(2)).reshape(8, 8)
        rho = p * sigma + (1 - p) * err
        Pi = np.eye(8) - ok - err_proj
        lhs = p * trace_distance(sigma, ok)
        rhs = np.sqrt(max(np.trace(Pi @ rho).real, 0.0))
        worst = max(worst, lhs - rhs)
        violations += lhs > rhs + slack
    return SecurityReport("fk-conversion", max(worst, 0.0), violations == 0, sample_count, seed, slack,
                          "output-projection test implies verifiability", {"violations": int(violations)})


def oneway_protocol(bob_state, alice_map: KrausChannel) -> DQCProtocol:
    """One-way protocol wrapped for the checkers (Alice's prefix is fixed to ``A``)."""
    from .protocols import oneway_suite

    suite = oneway_suite(bob_state, alice_map)

    def factory(prefix, cut):
        if prefix != "A" or cut:
            raise ValueError("one-way protocols run under prefix 'A' without a cut")
        return suite["alice"]

    n = len(suite["inputs"])
    return DQCProtocol("oneway", n, np.eye(2**n), factory, lambda: suite["bob"], verifiable=False, has_cut=False)
