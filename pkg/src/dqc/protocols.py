"""UBQC protocols, ideal resources, simulators, QOTP and one-way constructions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .interaction import (
    A2B,
    B2A,
    Ctx,
    PartyProgram,
    Round,
    ScheduleError,
    evolve,
)
from .mbqc import (
    MeasurementPattern,
    adapt_angle,
    build_brickwork,
    otp_compensate,
    pattern_unitary,
)
from .qcore import (
    CNOT,
    CZ,
    H,
    X,
    Z,
    Angle8,
    DensityOperator,
    KrausChannel,
    QuantumState,
    plus_state,
    tensor,
    z_rotation,
)

EPR = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
PLUS = plus_state(0)


def _phase_table() -> np.ndarray:
    """Row k is the diagonal of Z_{k pi/4}."""
    return np.stack([np.ones(8), np.exp(1j * np.pi * np.arange(8) / 4)], axis=1)


# ---------------------------------------------------------------------------
# Schedules and shared UBQC bookkeeping


def ubqc_schedule(n: int, m: int) -> tuple:
    """n*m qubits to Bob, n*m (angle out, bit back) pairs, n qubits back."""
    rounds = [Round(A2B, "qubit")] * (n * m)
    for _ in range(n * m):
        rounds += [Round(A2B, "angle8"), Round(B2A, "bit")]
    rounds += [Round(B2A, "qubit")] * n
    return tuple(rounds)


class _UBQCBook:
    """Angle bookkeeping common to Alice's versions and the ideal resource."""

    def __init__(self, pattern: MeasurementPattern, prefix: str):
        self.pattern = pattern
        self.p = prefix
        self.order = pattern.order()
        pos = {v: j for j, v in enumerate(self.order)}
        n, m = pattern.n, pattern.m
        self.needed_until = {v: -1 for v in self.order}
        for w in list(self.order) + [(x, m) for x in range(1, n + 1)]:
            at = pos[w] if w in pos else len(self.order) + w[0]
            for u in pattern.x_deps[w] | pattern.z_deps[w]:
                self.needed_until[u] = max(self.needed_until[u], at)
        # i_x is read for columns 0 and 1 (and for the output when m = 1)
        self.i_until = {
            x: (pos[(x, 1)] if m > 1 else len(self.order) + x) for x in range(1, n + 1)
        }

    def key(self, name: str, v) -> str:
        return f"{self.p}.{name}{v[0]}_{v[1]}"

    def ikey(self, x: int) -> str:
        return f"{self.p}.i{x}"

    def phi_prime(self, ctx: Ctx, v) -> Angle8:
        x, y = v
        phi = self.pattern.angle(x, y)
        if y in (0, 1):
            i = ctx.get(self.ikey(x))
            phi0, phi1 = otp_compensate(phi if y == 0 else 0, phi if y == 1 else 0, i)
            phi = phi0 if y == 0 else phi1
        sx = sum(ctx.get(self.key("s", u)) for u in self.pattern.x_deps[v]) & 1
        sz = sum(ctx.get(self.key("s", u)) for u in self.pattern.z_deps[v]) & 1
        return adapt_angle(phi, sx, sz)

    def record_s(self, ctx: Ctx, j: int, s: int) -> None:
        v = self.order[j]
        ctx.set(self.key("s", v), s)
        for u in self.order[: j + 1]:
            if self.needed_until[u] <= j:
                ctx.forget(self.key("s", u))
        for x, until in self.i_until.items():
            if until <= j:
                ctx.forget(self.ikey(x))

    def correct_output(self, ctx: Ctx, x: int, wire: str) -> None:
        m = self.pattern.m
        v = (x, m)
        sx = sum(ctx.get(self.key("s", u)) for u in self.pattern.x_deps[v]) & 1
        sz = sum(ctx.get(self.key("s", u)) for u in self.pattern.z_deps[v]) & 1
        if m == 1:
            sz ^= ctx.get(self.ikey(x))
        if sx:
            ctx.apply(X, wire)
        if sz:
            ctx.apply(Z, wire)

    def forget_all(self, ctx: Ctx) -> None:
        ctx.forget(*[k for k in list(ctx.b.cl) + list(ctx.b.lazy) if k.startswith(self.p + ".")])


def _alice_program(
    name: str,
    pattern: MeasurementPattern,
    prefix: str,
    send_qubit: Callable,
    send_angle: Callable,
    recv_bit: Callable,
    setup: Callable | None,
) -> PartyProgram:
    n, m = pattern.n, pattern.m
    book = _UBQCBook(pattern, prefix)
    handlers = []
    for j, v in enumerate(book.order):
        handlers.append(lambda ctx, v=v: send_qubit(ctx, book, v))
    for j, v in enumerate(book.order):
        handlers.append(lambda ctx, j=j, v=v: send_angle(ctx, book, j, v))
        handlers.append(lambda ctx, s, j=j, v=v: recv_bit(ctx, book, j, v, s))
    outs = []
    for x in range(1, n + 1):
        out = f"{prefix}.out{x}"
        outs.append(out)

        def recv_out(ctx, wire, x=x, out=out):
            ctx.rename(wire, out)
            book.correct_output(ctx, x, out)
            if x == n:
                book.forget_all(ctx)

        handlers.append(recv_out)
    return PartyProgram(
        name,
        "A",
        ubqc_schedule(n, m),
        tuple(handlers),
        setup=(lambda ctx: setup(ctx, book)) if setup else None,
        outputs=tuple(outs),
    )


# ---------------------------------------------------------------------------
# Alice, version 1: one-time padded input and rotated |+> states


def _v1_setup(ctx: Ctx, book: _UBQCBook, leaky: bool = False) -> None:
    for x in range(1, book.pattern.n + 1):
        ctx.random(book.ikey(x), 2)
    for v in book.order:
        if leaky:
            ctx.set(book.key("th", v), 0)
        else:
            ctx.lazy_random(book.key("th", v), 8)


def _v1_send_qubit(ctx: Ctx, book: _UBQCBook, v) -> str:
    x, y = v
    th = book.key("th", v)
    if y == 0:
        wire = f"{book.p}.in{x}"
        # bit flip first, then the rotation, so the flip only changes phi's sign
        if ctx.get(book.ikey(x)):
            ctx.apply(X, wire)
        ctx.keyed_phase(wire, th, _phase_table())
    else:
        wire = f"{book.p}.q{x}_{y}"
        ctx.prepare(wire, PLUS)
        ctx.keyed_phase(wire, th, _phase_table())
    return wire


def _v1_send_angle(ctx: Ctx, book: _UBQCBook, j: int, v) -> int:
    phi = book.phi_prime(ctx, v)
    r = ctx.random(book.key("r", v), 2)
    theta = ctx.get(book.key("th", v))
    ctx.forget(book.key("th", v))
    return int(phi + theta + 4 * r)


def _flip_recv_bit(ctx: Ctx, book: _UBQCBook, j: int, v, s: int) -> None:
    r = ctx.get(book.key("r", v))
    ctx.forget(book.key("r", v))
    book.record_s(ctx, j, s ^ r)


# ---------------------------------------------------------------------------
# Alice, version 2: EPR halves and teleportation


def _epr(ctx: Ctx, book: _UBQCBook, v) -> tuple[str, str]:
    keep = book.key("e", v)
    send = book.key("h", v)
    ctx.prepare([keep, send], EPR)
    return keep, send


def _v2_send_qubit(ctx: Ctx, book: _UBQCBook, v) -> str:
    x, y = v
    keep, send = _epr(ctx, book, v)
    th = ctx.random(book.key("th", v), 8)
    if y == 0:
        wire = f"{book.p}.in{x}"
        ctx.apply(z_rotation(th), wire)
        ctx.apply(CNOT, [wire, keep])
        ctx.apply(H, wire)
        ctx.set(book.key("r", v), ctx.measure(wire))
        ctx.set(book.ikey(x), ctx.measure(keep))
    else:
        ctx.apply(z_rotation(th), keep)
        ctx.apply(H, keep)
        ctx.set(book.key("r", v), ctx.measure(keep))
    return send


def _v2_send_angle(ctx: Ctx, book: _UBQCBook, j: int, v) -> int:
    phi = book.phi_prime(ctx, v)
    theta = Angle8(ctx.get(book.key("th", v)))
    ctx.forget(book.key("th", v))
    # teleporting Z_theta psi hands Bob X^i Z_theta psi = Z_{-theta} X^i psi
    if v[1] == 0 and ctx.get(book.ikey(v[0])):
        theta = -theta
    return int(phi + theta)


# ---------------------------------------------------------------------------
# Alice, version 3: uniform angles first, teleportation completed later


def _v3_send_qubit(ctx: Ctx, book: _UBQCBook, v) -> str:
    x, y = v
    keep, send = _epr(ctx, book, v)
    if y == 0:
        ctx.apply(CNOT, [f"{book.p}.in{x}", keep])
        ctx.set(book.ikey(x), ctx.measure(keep))
    return send


def _v3_send_angle(ctx: Ctx, book: _UBQCBook, j: int, v) -> int:
    return ctx.random(book.key("d", v), 8)


def _finish_teleport(ctx: Ctx, book: _UBQCBook, v, delta: int) -> int:
    """Apply Z_{theta'} and H to the held half with theta' = delta - phi', return r."""
    x, y = v
    theta = Angle8(delta) - book.phi_prime(ctx, v)
    if y == 0 and ctx.get(book.ikey(x)):
        theta = -theta
    target = f"{book.p}.in{x}" if y == 0 else book.key("e", v)
    ctx.apply(z_rotation(theta), target)
    ctx.apply(H, target)
    return ctx.measure(target)


def _v3_recv_bit(ctx: Ctx, book: _UBQCBook, j: int, v, s: int) -> None:
    delta = ctx.get(book.key("d", v))
    ctx.forget(book.key("d", v))
    r = _finish_teleport(ctx, book, v, delta)
    book.record_s(ctx, j, s ^ r)


def ubqc_alice(version: int, pattern: MeasurementPattern, prefix: str = "A", *, leaky: bool = False) -> PartyProgram:
    """Alice's side of UBQC.

    Version 1 pads the input with X^i Z_theta and sends rotated |+_theta>
    qubits; version 2 teleports through EPR halves; version 3 sends uniform
    angles and completes the teleportation after each bit arrives. With
    ``leaky=True`` version 1 never rotates (theta = 0), so every angle
    reveals the adapted computation angle.
    """
    if not isinstance(pattern, MeasurementPattern):
        raise TypeError("pattern must be a MeasurementPattern")
    if leaky and version != 1:
        raise ValueError("the leaky variant exists for version 1 only")
    if version == 1:
        return _alice_program(
            "ubqc-v1-leaky" if leaky else "ubqc-v1",
            pattern, prefix, _v1_send_qubit, _v1_send_angle, _flip_recv_bit,
            lambda ctx, book: _v1_setup(ctx, book, leaky),
        )
    if version == 2:
        return _alice_program("ubqc-v2", pattern, prefix, _v2_send_qubit, _v2_send_angle, _flip_recv_bit, None)
    if version == 3:
        return _alice_program("ubqc-v3", pattern, prefix, _v3_send_qubit, _v3_send_angle, _v3_recv_bit, None)
    raise ValueError(f"unknown UBQC version {version}")


# ---------------------------------------------------------------------------
# Honest Bob


def ubqc_bob_honest(n: int, m: int, *, flip_s: bool = False) -> PartyProgram:
    """Entangles the received qubits into a brickwork state and measures on request.

    ``flip_s`` makes Bob report the complement of every outcome.
    """
    graph = build_brickwork(n, m)
    order = [(x, y) for y in range(m) for x in range(1, n + 1)]
    q = lambda v: f"B.q{v[0]}_{v[1]}"  # noqa: E731
    handlers = []
    for j, v in enumerate(order):
        def recv_qubit(ctx, wire, j=j, v=v):
            ctx.rename(wire, q(v))
            if j == len(order) - 1:
                for x in range(1, n + 1):
                    ctx.prepare(q((x, m)), PLUS)
                for a, b in sorted(graph.edges):
                    ctx.apply(CZ, [q(a), q(b)])

        handlers.append(recv_qubit)
    for v in order:
        def recv_angle(ctx, delta):
            ctx.set("B.delta", delta)

        def send_bit(ctx, v=v):
            delta = ctx.get("B.delta")
            ctx.forget("B.delta")
            s = ctx.measure_xy(q(v), delta)
            return s ^ 1 if flip_s else s

        handlers += [recv_angle, send_bit]
    for x in range(1, n + 1):
        handlers.append(lambda ctx, x=x: q((x, m)))
    return PartyProgram("ubqc-bob", "B", ubqc_schedule(n, m), tuple(handlers))


# ---------------------------------------------------------------------------
# Ideal resources


ERR_FLAG = "flag"


@dataclass(frozen=True)
class IdealResource:
    """Blind (S^b) or blind-verifiable (S^bv) delegated computation.

    Alice's interface holds ``n`` input wires ``{prefix}.in{x}`` and returns
    ``{prefix}.out{x}``; S^bv adds ``{prefix}.flag`` (0 valid, 1 error, with
    the data wires reset to |0>). With b = 0 the resource outputs U(psi).
    With b = 1 it emits the leak and, for S^b, applies Bob's map to
    (Alice's input, Bob's state); for S^bv it obeys Bob's bit c.
    """

    variant: str
    unitary: np.ndarray = field(repr=False)
    leak: tuple = ()
    computation: object = field(default=None, repr=False)
    prefix: str = "A"

    def __post_init__(self):
        if self.variant not in ("S^b", "S^bv"):
            raise ValueError(f"unknown ideal resource {self.variant!r}")
        U = np.asarray(self.unitary, dtype=complex)
        d = U.shape[0]
        if U.shape != (d, d) or d & (d - 1) or not np.allclose(U.conj().T @ U, np.eye(d), atol=1e-9):
            raise ValueError("computation must be a unitary on whole qubits")

    @property
    def n(self) -> int:
        return int(np.log2(np.asarray(self.unitary).shape[0]))

    def inputs(self) -> list[str]:
        return [f"{self.prefix}.in{x}" for x in range(1, self.n + 1)]

    def outputs(self) -> list[str]:
        outs = [f"{self.prefix}.out{x}" for x in range(1, self.n + 1)]
        return outs + [f"{self.prefix}.{ERR_FLAG}"] if self.variant == "S^bv" else outs

    def honest(self, ctx: Ctx, inputs: Sequence[str] | None = None) -> None:
        inputs = list(inputs or self.inputs())
        ctx.apply(self.unitary, inputs)
        for w, out in zip(inputs, self.outputs()):
            ctx.rename(w, out)
        if self.variant == "S^bv":
            ctx.prepare(self.outputs()[-1])

    def error(self, ctx: Ctx, inputs: Sequence[str] | None = None) -> None:
        if self.variant != "S^bv":
            raise ValueError("only S^bv has an error output")
        ctx.discard(*(inputs or self.inputs()))
        outs = self.outputs()
        ctx.prepare(outs, np.eye(2 ** len(outs))[1])

    def cheat(self, ctx: Ctx, bob_wires: Sequence[str] = (), instructions=None, c: int | None = None,
              classical: dict | None = None, inputs: Sequence[str] | None = None) -> None:
        """Interface behavior when Bob set b = 1."""
        inputs = list(inputs or self.inputs())
        if self.variant == "S^bv":
            if c not in (0, 1):
                raise ValueError(f"c must be a bit, got {c!r}")
            (self.error if c else self.honest)(ctx, inputs)
            return
        if isinstance(instructions, KrausChannel):
            targets = inputs + list(bob_wires)
            if instructions.in_dim != 2 ** len(targets):
                raise ValueError("Bob's map does not match (Alice input, Bob state)")
            n_out = int(round(np.log2(instructions.out_dim)))
            if instructions.out_dim != 2**n_out:
                raise ValueError("Bob's map must output whole qubits")
            outs = [f"{self.prefix}.out{x}" for x in range(1, n_out + 1)]
            ctx.apply_kraus(instructions.operators, targets, outs)
        elif callable(instructions):
            instructions(ctx, inputs, list(bob_wires), self.outputs(), self.computation, classical or {})
        else:
            raise TypeError("Bob's map must be a KrausChannel or an instruction callable")

    def run(self, state, *, b: int = 0, c: int = 0, instructions=None, bob_state=None, filtered: bool = False) -> DensityOperator:
        """Stand-alone evaluation; the filter forces b = 0."""
        if filtered:
            b = 0
        if b not in (0, 1):
            raise ValueError("b must be a bit")
        full = state if bob_state is None else tensor(state, bob_state)
        bob_wires = [] if bob_state is None else list(bob_state.wires)

        def fn(ctx):
            if b == 0:
                self.honest(ctx)
                ctx.discard(*bob_wires) if bob_wires else None
            else:
                self.cheat(ctx, bob_wires, instructions, c)

        res = evolve(full, fn)
        keep = [w for w in res.wire_names() if not w.startswith("~")]
        return res.state(keep).density()


def ideal_resource(variant: str, computation, leak: tuple | None = None, prefix: str = "A") -> IdealResource:
    """Build S^b or S^bv for a unitary matrix or a measurement pattern."""
    if isinstance(computation, MeasurementPattern):
        U = pattern_unitary(computation)
        leak = leak or (computation.n, computation.m, "quantum")
        return IdealResource(variant, U, leak, computation, prefix)
    U = np.asarray(computation, dtype=complex)
    n = int(np.log2(U.shape[0]))
    return IdealResource(variant, U, leak or (n, 0, "quantum"), None, prefix)


# ---------------------------------------------------------------------------
# Simulator for UBQC


def protocol4_instructions(ctx: Ctx, inputs, bob_wires, outputs, pattern: MeasurementPattern, classical: dict) -> None:
    """Operations the simulator asks S^b to perform on (input, EPR halves, outputs).

    Completes the teleportation of the input through the held halves using
    the uniform angles the simulator sent, so the result matches what an
    honest Alice would have produced against the same Bob.
    """
    book = _UBQCBook(pattern, "I")
    halves = classical["halves"]
    for x in range(1, pattern.n + 1):
        ctx.rename(inputs[x - 1], f"I.in{x}")
        ctx.rename(halves[(x, 0)], book.key("e", (x, 0)))
        ctx.apply(CNOT, [f"I.in{x}", book.key("e", (x, 0))])
        ctx.set(book.ikey(x), ctx.measure(book.key("e", (x, 0))))
    for v in book.order:
        if v[1] > 0:
            ctx.rename(halves[v], book.key("e", v))
    for j, v in enumerate(book.order):
        r = _finish_teleport(ctx, book, v, classical["delta"][v])
        book.record_s(ctx, j, classical["s"][v] ^ r)
    for x in range(1, pattern.n + 1):
        wire = classical["outputs"][x - 1]
        book.correct_output(ctx, x, wire)
        ctx.rename(wire, outputs[x - 1])
    book.forget_all(ctx)


def ubqc_simulator(n: int, m: int, prefix: str = "S") -> dict:
    """Handlers of the simulator attached to S^b's Bob interface.

    Returned as ``{"schedule", "handlers", "forward"}``: the handlers face the
    outer (Bob) interface; ``forward(ctx, resource)`` hands the collected
    halves, angles, bits and output qubits to the resource with b = 1.
    """
    order = [(x, y) for y in range(m) for x in range(1, n + 1)]
    handlers = []
    for v in order:
        def send_half(ctx, v=v):
            keep, send = f"{prefix}.e{v[0]}_{v[1]}", f"{prefix}.h{v[0]}_{v[1]}"
            ctx.prepare([keep, send], EPR)
            return send

        handlers.append(send_half)
    for v in order:
        def send_delta(ctx, v=v):
            return ctx.random(f"{prefix}.d{v[0]}_{v[1]}", 8)

        def recv_s(ctx, s, v=v):
            ctx.set(f"{prefix}.s{v[0]}_{v[1]}", s)

        handlers += [send_delta, recv_s]
    for x in range(1, n + 1):
        handlers.append(lambda ctx, wire, x=x: ctx.rename(wire, f"{prefix}.o{x}"))

    def forward(ctx: Ctx, resource: IdealResource) -> None:
        if resource.leak[:2] != (n, m):
            raise ScheduleError(f"leak {resource.leak} does not match the simulated size {(n, m)}")
        msg = {
            "halves": {v: f"{prefix}.e{v[0]}_{v[1]}" for v in order},
            "delta": {v: ctx.get(f"{prefix}.d{v[0]}_{v[1]}") for v in order},
            "s": {v: ctx.get(f"{prefix}.s{v[0]}_{v[1]}") for v in order},
            "outputs": [f"{prefix}.o{x}" for x in range(1, n + 1)],
        }
        wires = list(msg["halves"].values()) + msg["outputs"]
        resource.cheat(ctx, wires, protocol4_instructions, classical=msg)
        ctx.forget(*[k for k in list(ctx.b.cl) if k.startswith(prefix + ".")])

    return {"schedule": ubqc_schedule(n, m), "handlers": tuple(handlers), "forward": forward}


def compose_ideal(resource: IdealResource, simulator: dict, name: str = "ideal") -> PartyProgram:
    """S^b with the simulator plugged into its Bob interface, seen from the outside."""

    def finish(ctx):
        simulator["forward"](ctx, resource)

    return PartyProgram(name, "A", simulator["schedule"], simulator["handlers"], finish=finish,
                        outputs=tuple(resource.outputs()))


def ubqc_ideal(pattern: MeasurementPattern, prefix: str = "A") -> PartyProgram:
    """S^b composed with the UBQC simulator for this pattern."""
    res = ideal_resource("S^b", pattern, prefix=prefix)
    return compose_ideal(res, ubqc_simulator(pattern.n, pattern.m), "ubqc-ideal")


# ---------------------------------------------------------------------------
# Quantum one-time pad


def qotp_encrypt(ctx: Ctx, wire: str, prefix: str = "A") -> None:
    x = ctx.random(f"K.x.{wire}", 2)
    z = ctx.random(f"K.z.{wire}", 2)
    if z:
        ctx.apply(Z, wire)
    if x:
        ctx.apply(X, wire)


def qotp_decrypt(ctx: Ctx, wire: str, key_wire: str) -> None:
    x, z = ctx.get(f"K.x.{key_wire}"), ctx.get(f"K.z.{key_wire}")
    if x:
        ctx.apply(X, wire)
    if z:
        ctx.apply(Z, wire)
    ctx.forget(f"K.x.{key_wire}", f"K.z.{key_wire}")


def qotp_suite() -> dict:
    """Parties of the one-qubit QOTP, real and ideal.

    Every entry is a handler-level callable so the pieces can be wired to a
    distinguisher map acting on the channel register and its own memory.
    """

    def alice(ctx: Ctx, msg: str = "A.msg") -> str:
        qotp_encrypt(ctx, msg)
        ctx.rename(msg, "C.c")
        return "C.c"

    def bob(ctx: Ctx, received: str = "C.c", out: str = "B.msg") -> None:
        qotp_decrypt(ctx, received, "A.msg")
        ctx.rename(received, out)

    def insecure_channel(ctx: Ctx, wire: str) -> str:
        return wire

    def confidential_resource(ctx: Ctx, msg: str, eve_wires: Sequence[str], eve_map: Callable, out: str = "B.msg") -> None:
        eve_map(ctx, msg, list(eve_wires), out)

    def simulator_send(ctx: Ctx) -> str:
        ctx.prepare(["S.e1", "C.c"], EPR)
        return "C.c"

    def simulator_map(ctx: Ctx, msg: str, eve_wires: Sequence[str], out: str) -> None:
        # gate-teleport the message through the half kept by the simulator,
        # then undo the induced Pauli on what Eve sent back
        e1, back = eve_wires
        ctx.apply(CNOT, [msg, e1])
        ctx.apply(H, msg)
        z = ctx.measure(msg)
        x = ctx.measure(e1)
        if x:
            ctx.apply(X, back)
        if z:
            ctx.apply(Z, back)
        ctx.rename(back, out)

    return {
        "alice": alice,
        "bob": bob,
        "insecure-channel": insecure_channel,
        "confidential-resource": confidential_resource,
        "simulator": {"send": simulator_send, "map": simulator_map},
    }


def _apply_distinguisher(ctx: Ctx, channel: KrausChannel, wires: Sequence[str]) -> None:
    ctx.apply_kraus(channel.operators, list(wires))


def qotp_real(state, distinguisher: KrausChannel, eve_memory: Sequence[str] = ("E.mem",)) -> DensityOperator:
    """Message ``A.msg`` through encrypt, Eve's map on (C, memory), decrypt."""
    suite = qotp_suite()

    def fn(ctx):
        for w in eve_memory:
            if not ctx.has_wire(w):
                ctx.prepare(w)
        c = suite["insecure-channel"](ctx, suite["alice"](ctx))
        _apply_distinguisher(ctx, distinguisher, [c, *eve_memory])
        suite["bob"](ctx, c)

    return _final(evolve(state, fn))


def qotp_ideal(state, distinguisher: KrausChannel, eve_memory: Sequence[str] = ("E.mem",)) -> DensityOperator:
    """Confidential channel with the EPR simulator on Eve's interface."""
    suite = qotp_suite()
    sim = suite["simulator"]

    def fn(ctx):
        for w in eve_memory:
            if not ctx.has_wire(w):
                ctx.prepare(w)
        c = sim["send"](ctx)
        _apply_distinguisher(ctx, distinguisher, [c, *eve_memory])
        suite["confidential-resource"](ctx, "A.msg", ["S.e1", c], sim["map"])

    return _final(evolve(state, fn))


def _final(res) -> DensityOperator:
    keep = sorted(w for w in res.wire_names() if not w.startswith("~"))
    return res.state(keep).density()


# ---------------------------------------------------------------------------
# One-way protocols


def oneway_suite(bob_state, alice_map: KrausChannel) -> dict:
    """Bob sends a state tau; Alice outputs E(psi_A (x) tau).

    Returns the honest Bob program, Alice's program and the ideal system, in
    which the simulator forwards tau together with E to S^b (b = 1).
    """
    k = len(bob_state.wires)
    n_in = int(round(np.log2(alice_map.in_dim))) - k
    n_out = int(round(np.log2(alice_map.out_dim)))
    if n_in < 0 or alice_map.in_dim != 2 ** (n_in + k) or alice_map.out_dim != 2**n_out:
        raise ValueError("Alice's map must act on her input plus Bob's qubits")
    schedule = tuple(Round(B2A, "qubit") for _ in range(k))
    ins = [f"A.in{x}" for x in range(1, n_in + 1)]
    outs = tuple(f"A.out{x}" for x in range(1, n_out + 1))

    def bob_setup(ctx):
        names = [f"B.tau{j}" for j in range(k)]
        if isinstance(bob_state, QuantumState):
            ctx.prepare(names, bob_state.amplitudes)
        else:
            ctx.prepare_mixed(names, bob_state.matrix)

    bob = PartyProgram("oneway-bob", "B", schedule,
                       tuple((lambda ctx, j=j: f"B.tau{j}") for j in range(k)), setup=bob_setup)

    def recv(ctx, wire, j, hold):
        ctx.rename(wire, f"{hold}{j}")

    def alice_finish(ctx):
        ctx.apply_kraus(alice_map.operators, ins + [f"A.tau{j}" for j in range(k)], list(outs))

    alice = PartyProgram("oneway-alice", "A", schedule,
                         tuple((lambda ctx, w, j=j: recv(ctx, w, j, "A.tau")) for j in range(k)),
                         finish=alice_finish, outputs=outs)

    # the simulator only relays tau; S^b (b = 1) applies E to (input, tau)
    resource = IdealResource("S^b", np.eye(2**n_in), (n_in, k, "quantum"), None, "A")
    ideal = PartyProgram("oneway-ideal", "A", schedule,
                         tuple((lambda ctx, w, j=j: recv(ctx, w, j, "S.tau")) for j in range(k)),
                         finish=lambda ctx: resource.cheat(ctx, [f"S.tau{j}" for j in range(k)], alice_map),
                         outputs=outs)
    return {"alice": alice, "bob": bob, "ideal": ideal, "inputs": ins, "leak": resource.leak}
