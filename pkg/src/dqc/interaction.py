"""Round-based two-party interaction engine.

A run is a list of branches. Each branch holds a pure (possibly
subnormalized) vector or a positive matrix over labeled wires, plus the
classical memory of both parties. Party handlers are plain functions of a
:class:`Ctx`. Whenever a handler asks for randomness or a measurement result,
exact mode forks the branch by re-running the handler once per outcome with
that outcome preset; sample mode draws the outcome from a seeded generator.
Branches whose signature (classical memory, wire order, pending phases)
coincide are merged after every round.

Uniform secret keys that only ever enter as single-wire diagonal phases can
be declared lazily: the phase stays symbolic while diagonal gates commute
past it, and the key is enumerated only when someone reads it or applies a
non-diagonal operation to the wire. This keeps the branch count of exact
runs proportional to what is actually revealed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .qcore import (
    DensityOperator,
    QuantumState,
    apply_diagonal_to_matrix,
    apply_diagonal_to_vector,
    apply_to_matrix,
    apply_to_vector,
    is_diagonal,
    kraus_apply_matrix,
    kraus_apply_vector,
    permute_matrix,
    project_matrix,
    project_vector,
    reduce_vector,
    trace_norm,
    trace_out_matrix,
    wire_axes,
    xy_basis,
)

A2B = "A→B"
B2A = "B→A"
KIND_DIMS = {"qubit": 2, "angle8": 8, "bit": 2}

SMALL_WIRES = 7
PRUNE = 1e-13


class ScheduleError(ValueError):
    """Parties disagree on the message schedule, or a payload is malformed."""


class CapacityError(ValueError):
    """A branch would exceed the configured number of dense qubits."""


def qubit_cap() -> int:
    return int(os.environ.get("DQC_QUBIT_CAP", "12"))


class _Fork(Exception):
    def __init__(self, n: int):
        self.n = n


class _Prune(Exception):
    pass


@dataclass(frozen=True)
class Round:
    direction: str
    kind: str

    def __post_init__(self):
        if self.direction not in (A2B, B2A):
            raise ScheduleError(f"bad direction {self.direction!r}")
        if self.kind not in KIND_DIMS:
            raise ScheduleError(f"bad message kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return KIND_DIMS[self.kind]

    def sender(self) -> str:
        return self.direction[0]


@dataclass(frozen=True)
class PartyProgram:
    """One party's strategy.

    ``handlers[r]`` is called as ``h(ctx)`` when the party sends in round r
    (it returns the payload: a wire label or an integer) and as
    ``h(ctx, payload)`` when it receives. ``outputs`` lists the wires holding
    the party's final output.
    """

    name: str
    role: str
    schedule: tuple
    handlers: tuple
    setup: Callable | None = None
    finish: Callable | None = None
    outputs: tuple = ()

    def __post_init__(self):
        if self.role not in ("A", "B"):
            raise ScheduleError("role must be 'A' or 'B'")
        if len(self.schedule) != len(self.handlers):
            raise ScheduleError(f"{self.name}: {len(self.schedule)} rounds but {len(self.handlers)} handlers")


# ---------------------------------------------------------------------------
# Branch state


class Branch:
    __slots__ = ("wires", "vec", "mat", "cl", "lazy", "pending", "ngarbage")

    def __init__(self, wires=(), vec=None, mat=None):
        self.wires = list(wires)
        self.vec = vec
        self.mat = mat
        if vec is None and mat is None:
            self.vec = np.ones(1, dtype=complex)
        self.cl: dict = {}
        self.lazy: dict = {}
        self.pending: dict = {}
        self.ngarbage = 0

    @classmethod
    def from_state(cls, state) -> "Branch":
        if state is None:
            return cls()
        if isinstance(state, QuantumState):
            return cls(state.wires, vec=state.amplitudes.copy())
        if isinstance(state, DensityOperator):
            return cls(state.wires, mat=np.array(state.matrix))
        raise TypeError("input must be a QuantumState or DensityOperator")

    def copy(self) -> "Branch":
        b = Branch.__new__(Branch)
        b.wires = list(self.wires)
        b.vec = None if self.vec is None else self.vec.copy()
        b.mat = None if self.mat is None else self.mat.copy()
        b.cl = dict(self.cl)
        b.lazy = dict(self.lazy)
        b.pending = dict(self.pending)
        b.ngarbage = self.ngarbage
        return b

    @property
    def pure(self) -> bool:
        return self.vec is not None

    def weight(self) -> float:
        if self.pure:
            return float(np.vdot(self.vec, self.vec).real)
        return float(np.trace(self.mat).real)

    def scale(self, p: float) -> None:
        if self.pure:
            self.vec = self.vec * np.sqrt(p)
        else:
            self.mat = self.mat * p

    def to_mixed(self) -> None:
        if self.pure:
            self.mat = np.outer(self.vec, self.vec.conj())
            self.vec = None

    def signature(self):
        pend = tuple(sorted((w, k, t.tobytes()) for w, (k, t) in self.pending.items()))
        return (
            tuple(sorted(self.cl.items(), key=lambda kv: kv[0])),
            tuple(sorted(self.lazy.items())),
            pend,
            tuple(self.wires),
        )


# ---------------------------------------------------------------------------
# Handler context


class Ctx:
    """Operations a handler may perform on its branch."""

    def __init__(self, engine: "_Engine", branch: Branch, presets: tuple):
        self._engine = engine
        self.b = branch
        self._presets = presets
        self._i = 0

    @property
    def mode(self) -> str:
        return self._engine.mode

    # -- choices

    def _choose(self, weights: Sequence[float]) -> int:
        if self._engine.mode == "sample":
            p = np.clip(np.asarray(weights, dtype=float), 0, None)
            return int(self._engine.rng.choice(len(p), p=p / p.sum()))
        if self._i < len(self._presets):
            v = self._presets[self._i]
            self._i += 1
            return v
        raise _Fork(len(weights))

    # -- classical memory

    def get(self, key: str):
        b = self.b
        if key in b.lazy:
            n = b.lazy[key]
            v = self._choose([1.0 / n] * n)
            if self.mode == "exact":
                b.scale(1.0 / n)
            self._resolve(key, v)
        return b.cl[key]

    def peek(self, key: str, default=None):
        if key in self.b.cl or key in self.b.lazy:
            return self.get(key)
        return default

    def has(self, key: str) -> bool:
        return key in self.b.cl or key in self.b.lazy

    def set(self, key: str, value) -> None:
        self.b.lazy.pop(key, None)
        self.b.cl[key] = value

    def forget(self, *keys: str) -> None:
        b = self.b
        for key in keys:
            if key in b.lazy:
                if any(k == key for k, _ in b.pending.values()):
                    self.get(key)
                else:
                    del b.lazy[key]
                    continue
            b.cl.pop(key, None)

    def random(self, key: str | None, n: int, probs: Sequence[float] | None = None) -> int:
        p = np.full(n, 1.0 / n) if probs is None else np.asarray(probs, dtype=float)
        if len(p) != n or abs(p.sum() - 1) > 1e-12 or (p < 0).any():
            raise ValueError("probabilities must be a distribution over n values")
        v = self._choose(p)
        if self.mode == "exact":
            if p[v] <= 0:
                raise _Prune()
            self.b.scale(p[v])
        if key is not None:
            self.set(key, v)
        return v

    def lazy_random(self, key: str, n: int) -> None:
        """Declare a uniform key that is enumerated only when needed."""
        self.b.cl.pop(key, None)
        self.b.lazy[key] = n

    def _resolve(self, key: str, v: int) -> None:
        b = self.b
        del b.lazy[key]
        b.cl[key] = v
        for w, (k, table) in list(b.pending.items()):
            if k == key:
                del b.pending[w]
                self._diag(table[v], w)

    # -- quantum operations

    def has_wire(self, wire: str) -> bool:
        return wire in self.b.wires

    def wires(self, prefix: str = "") -> list[str]:
        return [w for w in self.b.wires if w.startswith(prefix)]

    def _check_new(self, labels) -> None:
        for w in labels:
            if w in self.b.wires:
                raise ScheduleError(f"wire {w!r} already exists")
        cap = self._engine.max_wires if self.b.pure else self._engine.max_mixed_wires
        if len(self.b.wires) + len(labels) > cap:
            raise CapacityError(
                f"{len(self.b.wires) + len(labels)} dense qubits exceed the cap of {cap}"
            )

    def prepare(self, wires: Sequence[str] | str, amps=None) -> None:
        """Append fresh wires in a pure state (default all-zero)."""
        wires = [wires] if isinstance(wires, str) else list(wires)
        self._check_new(wires)
        d = 2 ** len(wires)
        if amps is None:
            amps = np.zeros(d, dtype=complex)
            amps[0] = 1
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        if amps.size != d:
            raise ValueError("amplitude count does not match wires")
        b = self.b
        if b.pure:
            b.vec = np.kron(b.vec, amps)
        else:
            b.mat = np.kron(b.mat, np.outer(amps, amps.conj()))
        b.wires.extend(wires)

    def prepare_mixed(self, wires: Sequence[str], matrix) -> None:
        wires = list(wires)
        self._check_new(wires)
        self.b.to_mixed()
        self.b.mat = np.kron(self.b.mat, np.asarray(matrix, dtype=complex))
        self.b.wires.extend(wires)

    def _materialize(self, wires: Iterable[str]) -> None:
        for w in list(wires):
            if w in self.b.pending:
                self.get(self.b.pending[w][0])

    def _diag(self, diag: np.ndarray, wire: str) -> None:
        b = self.b
        (axis,) = wire_axes(b.wires, [wire])
        if b.pure:
            b.vec = apply_diagonal_to_vector(b.vec, len(b.wires), diag, axis)
        else:
            b.mat = apply_diagonal_to_matrix(b.mat, len(b.wires), diag, axis)

    def apply(self, gate, wires: Sequence[str] | str) -> None:
        wires = [wires] if isinstance(wires, str) else list(wires)
        gate = np.asarray(gate, dtype=complex)
        if not is_diagonal(gate):
            self._materialize(wires)
        b = self.b
        axes = wire_axes(b.wires, wires)
        if b.pure:
            b.vec = apply_to_vector(b.vec, len(b.wires), gate, axes)
        else:
            b.mat = apply_to_matrix(b.mat, len(b.wires), gate, axes)

    def keyed_phase(self, wire: str, key: str, table) -> None:
        """Apply ``diag(table[key])`` to ``wire``, deferring it while ``key`` is lazy."""
        table = np.asarray(table, dtype=complex)
        if key not in self.b.lazy:
            self._diag(table[self.get(key)], wire)
            return
        if wire in self.b.pending:
            self._materialize([wire])
        if wire not in self.b.wires:
            raise ScheduleError(f"unknown wire {wire!r}")
        table.setflags(write=False)
        self.b.pending[wire] = (key, table)

    def apply_kraus(self, ops: Sequence[np.ndarray], targets: Sequence[str], out_labels: Sequence[str] | None = None) -> None:
        """General CP map on ``targets``; pure branches are unravelled over Kraus indices."""
        targets = list(targets)
        out_labels = targets if out_labels is None else list(out_labels)
        self._materialize(targets)
        b = self.b
        original = list(b.wires)
        if len(ops) == 1 or not b.pure:
            if b.pure:
                b.vec, wires = kraus_apply_vector(b.vec, tuple(b.wires), ops[0], targets, out_labels)
            else:
                b.mat, wires = kraus_apply_matrix(b.mat, tuple(b.wires), ops, targets, out_labels)
        else:
            vecs = []
            for E in ops:
                v, wires = kraus_apply_vector(b.vec, tuple(b.wires), E, targets, out_labels)
                vecs.append(v)
            weights = [float(np.vdot(v, v).real) for v in vecs]
            k = self._choose(weights)
            total = sum(weights)
            if weights[k] <= PRUNE * max(total, 1e-300):
                raise _Prune()
            b.vec = vecs[k] if self.mode == "exact" else vecs[k] / np.sqrt(weights[k] / total)
        b.wires = list(wires)
        for w in set(targets) - set(out_labels):
            b.pending.pop(w, None)
        if out_labels == targets:
            self._reorder(original)

    def _reorder(self, order: Sequence[str]) -> None:
        b = self.b
        perm = wire_axes(b.wires, order)
        n = len(b.wires)
        if b.pure:
            b.vec = b.vec.reshape((2,) * n).transpose(perm).reshape(-1)
        else:
            b.mat = permute_matrix(b.mat, n, perm)
        b.wires = list(order)

    def measure(self, wire: str, basis: Sequence[np.ndarray] | None = None) -> int:
        """Projective measurement of one wire, which is then removed."""
        self._materialize([wire])
        if basis is None:
            basis = (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex))
        b = self.b
        (axis,) = wire_axes(b.wires, [wire])
        n = len(b.wires)
        if self.mode == "exact" and self._i < len(self._presets):
            s = self._presets[self._i]
            self._i += 1
            before = b.weight()
            self._project(basis[s], axis, n)
            if b.weight() <= PRUNE * max(before, 1e-300):
                raise _Prune()
            return s
        if self.mode == "exact":
            raise _Fork(len(basis))
        trials = []
        for bra in basis:
            c = b.copy()
            ctx = Ctx(self._engine, c, ())
            ctx._project(bra, axis, n)
            trials.append(c)
        weights = [t.weight() for t in trials]
        s = self._choose(weights)
        chosen = trials[s]
        chosen.scale(1.0 / weights[s])
        b.vec, b.mat, b.wires = chosen.vec, chosen.mat, chosen.wires
        return s

    def _project(self, bra, axis: int, n: int) -> None:
        b = self.b
        w = b.wires[axis]
        if b.pure:
            b.vec = project_vector(b.vec, n, bra, axis)
        else:
            b.mat = project_matrix(b.mat, n, bra, axis)
        del b.wires[axis]
        b.pending.pop(w, None)

    def measure_xy(self, wire: str, angle) -> int:
        return self.measure(wire, xy_basis(angle))

    def discard(self, *wires: str) -> None:
        b = self.b
        if not wires:
            return
        for w in wires:
            b.pending.pop(w, None)
        axes = wire_axes(b.wires, wires)
        if b.pure and len(b.wires) > SMALL_WIRES:
            for w in wires:
                b.wires[b.wires.index(w)] = f"~{b.ngarbage}"
                b.ngarbage += 1
            return
        n = len(b.wires)
        if b.pure:
            b.mat = reduce_vector(b.vec, n, axes)
            b.vec = None
        else:
            b.mat = trace_out_matrix(b.mat, n, axes)
        b.wires = [w for w in b.wires if w not in wires]

    def rename(self, old: str, new: str) -> None:
        b = self.b
        if new in b.wires and new != old:
            raise ScheduleError(f"wire {new!r} already exists")
        b.wires[wire_axes(b.wires, [old])[0]] = new
        if old in b.pending:
            b.pending[new] = b.pending.pop(old)

    def swap(self, a: str, c: str) -> None:
        b = self.b
        i, j = wire_axes(b.wires, [a, c])
        b.wires[i], b.wires[j] = c, a
        pa, pc = b.pending.pop(a, None), b.pending.pop(c, None)
        if pa is not None:
            b.pending[c] = pa
        if pc is not None:
            b.pending[a] = pc
        # swapping labels is the same as a physical SWAP followed by relabeling


# ---------------------------------------------------------------------------
# Engine


class _Engine:
    def __init__(self, mode: str, seed: int | None, max_wires: int | None = None):
        if mode not in ("exact", "sample"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.rng = np.random.default_rng(seed)
        self.max_wires = max_wires or max(20, qubit_cap() + 8)
        self.max_mixed_wires = max(10, min(self.max_wires, 12))

    def execute(self, fn: Callable, branch: Branch, *args) -> list:
        """All (branch, result) pairs of ``fn`` run on ``branch``."""
        out = []
        stack = [()]
        while stack:
            presets = stack.pop()
            b = branch.copy()
            ctx = Ctx(self, b, presets)
            try:
                res = fn(ctx, *args)
            except _Fork as f:
                stack.extend(presets + (v,) for v in reversed(range(f.n)))
                continue
            except _Prune:
                continue
            out.append((b, res))
        return out

    def run_all(self, fn: Callable, branches: list, *args) -> list:
        out = []
        for br in branches:
            out.extend(b for b, _ in self.execute(fn, br, *args))
        return out


def merge_branches(branches: list, rel_tol: float = 1e-10) -> list:
    groups: dict = {}
    for b in branches:
        groups.setdefault(b.signature(), []).append(b)
    out = []
    for group in groups.values():
        mixed = [b for b in group if not b.pure]
        pure = [b for b in group if b.pure]
        reps: list[Branch] = []
        for b in pure:
            nb = float(np.vdot(b.vec, b.vec).real)
            if nb <= 0:
                continue
            for r in reps:
                nr = float(np.vdot(r.vec, r.vec).real)
                ov = abs(np.vdot(r.vec, b.vec)) ** 2
                if ov >= (1 - rel_tol) * nr * nb:
                    r.vec = r.vec * np.sqrt((nr + nb) / nr)
                    break
            else:
                reps.append(b.copy())
        if mixed or (len(reps) > 1 and len(group[0].wires) <= SMALL_WIRES):
            acc = mixed[0].copy() if mixed else None
            rest = mixed[1:] + reps if mixed else reps
            for b in rest:
                m = b.mat if not b.pure else np.outer(b.vec, b.vec.conj())
                if acc is None:
                    acc = b.copy()
                    acc.to_mixed()
                else:
                    acc.mat = acc.mat + m
            out.append(acc)
        else:
            out.extend(reps)
    return out


# ---------------------------------------------------------------------------
# Classical-quantum results


@dataclass
class CQState:
    """Block-diagonal operator: one matrix over ``wires`` per classical value tuple."""

    keys: tuple
    wires: tuple
    blocks: dict = field(default_factory=dict)

    def trace(self) -> float:
        return float(sum(np.trace(m).real for m in self.blocks.values()))

    def add(self, value: tuple, mat: np.ndarray) -> None:
        if value in self.blocks:
            self.blocks[value] = self.blocks[value] + mat
        else:
            self.blocks[value] = mat

    def _aligned(self, other: "CQState") -> "CQState":
        if self.keys != other.keys or set(self.wires) != set(other.wires):
            raise ValueError(f"incompatible systems {self.keys, self.wires} vs {other.keys, other.wires}")
        return other.reorder(self.wires)

    def distance(self, other: "CQState", generalized: bool = True) -> float:
        other = self._aligned(other)
        total = 0.0
        zero = None
        for k in set(self.blocks) | set(other.blocks):
            a = self.blocks.get(k)
            b = other.blocks.get(k)
            if a is None or b is None:
                zero = np.zeros_like(a if a is not None else b)
            total += trace_norm((a if a is not None else zero) - (b if b is not None else zero))
        d = total / 2
        if generalized:
            d += abs(self.trace() - other.trace()) / 2
        return d

    def frobenius_gap(self, other: "CQState") -> float:
        other = self._aligned(other)
        total = 0.0
        for k in set(self.blocks) | set(other.blocks):
            a = self.blocks.get(k)
            b = other.blocks.get(k)
            if a is None:
                total += float(np.sum(np.abs(b) ** 2))
            elif b is None:
                total += float(np.sum(np.abs(a) ** 2))
            else:
                total += float(np.sum(np.abs(a - b) ** 2))
        return float(np.sqrt(total))

    def reorder(self, wires: Sequence[str]) -> "CQState":
        wires = tuple(wires)
        if wires == self.wires:
            return self
        perm = wire_axes(self.wires, wires)
        n = len(wires)
        return CQState(self.keys, wires, {k: permute_matrix(m, n, perm) for k, m in self.blocks.items()})

    def partial_trace(self, discard: Sequence[str]) -> "CQState":
        axes = wire_axes(self.wires, discard)
        keep = tuple(w for i, w in enumerate(self.wires) if i not in axes)
        n = len(self.wires)
        return CQState(self.keys, keep, {k: trace_out_matrix(m, n, axes) for k, m in self.blocks.items()})

    def forget_keys(self, drop: Sequence[str]) -> "CQState":
        idx = [i for i, k in enumerate(self.keys) if k not in drop]
        out = CQState(tuple(self.keys[i] for i in idx), self.wires)
        for k, m in self.blocks.items():
            out.add(tuple(k[i] for i in idx), m)
        return out

    def kron(self, wires: Sequence[str], mat) -> "CQState":
        mat = np.asarray(mat, dtype=complex)
        return CQState(self.keys, self.wires + tuple(wires), {k: np.kron(m, mat) for k, m in self.blocks.items()})

    def plus(self, other: "CQState") -> "CQState":
        other = self._aligned(other)
        out = CQState(self.keys, self.wires, dict(self.blocks))
        for k, m in other.blocks.items():
            out.add(k, m)
        return out

    def scaled(self, c: float) -> "CQState":
        return CQState(self.keys, self.wires, {k: c * m for k, m in self.blocks.items()})

    def density(self) -> DensityOperator:
        """Only for states without classical keys."""
        if self.keys:
            raise ValueError("state has classical registers; use blocks")
        mat = self.blocks.get((), np.zeros((2 ** len(self.wires),) * 2, dtype=complex))
        return DensityOperator(self.wires, mat, check=False)

    def dense(self, key_dims: Sequence[int]) -> np.ndarray:
        """Embed the classical keys as basis states, keys first."""
        dk = int(np.prod(key_dims)) if key_dims else 1
        dq = 2 ** len(self.wires)
        out = np.zeros((dk * dq, dk * dq), dtype=complex)
        for k, m in self.blocks.items():
            idx = int(np.ravel_multi_index(k, key_dims)) if key_dims else 0
            out[idx * dq:(idx + 1) * dq, idx * dq:(idx + 1) * dq] = m
        return out


# ---------------------------------------------------------------------------
# Runs


@dataclass
class InteractionResult:
    branches: list
    transcript: dict
    mode: str
    seed: int | None
    outputs: tuple = ()
    _engine: _Engine | None = field(default=None, repr=False)

    def map(self, fn: Callable, *args) -> "InteractionResult":
        """Apply a post-processing handler to every branch (exact forks allowed)."""
        branches = merge_branches(self._engine.run_all(fn, self.branches, *args))
        return InteractionResult(branches, self.transcript, self.mode, self.seed, self.outputs, self._engine)

    def state(self, wires: Sequence[str], keys: Sequence[str] = ()) -> CQState:
        """Joint state of ``wires`` and classical ``keys`` summed over branches."""
        wires, keys = tuple(wires), tuple(keys)

        def finalize(ctx: Ctx):
            for k in keys:
                ctx.get(k)
            ctx._materialize([w for w in wires if w in ctx.b.pending])

        out = CQState(keys, wires)
        for b in self._engine.run_all(finalize, self.branches):
            missing = [w for w in wires if w not in b.wires]
            if missing:
                raise ScheduleError(f"wires {missing} are not present at the end of the run")
            drop = wire_axes(b.wires, [w for w in b.wires if w not in wires])
            n = len(b.wires)
            if b.pure:
                mat = reduce_vector(b.vec, n, drop)
            else:
                mat = trace_out_matrix(b.mat, n, drop)
            cur = [w for w in b.wires if w in wires]
            mat = permute_matrix(mat, len(cur), wire_axes(cur, wires))
            out.add(tuple(b.cl[k] for k in keys), mat)
        return out

    def wire_names(self, prefix: str = "") -> list[str]:
        names: list[str] = []
        for b in self.branches:
            for w in b.wires:
                if w.startswith(prefix) and w not in names:
                    names.append(w)
        return names

    def key_names(self, prefix: str = "") -> list[str]:
        names: set = set()
        for b in self.branches:
            names.update(k for k in list(b.cl) + list(b.lazy) if k.startswith(prefix))
        return sorted(names)

    def output(self) -> DensityOperator:
        """Alice's declared outputs plus external reference wires."""
        refs = [w for w in self.wire_names("X.")]
        return self.state(tuple(self.outputs) + tuple(refs)).density()

    def __iter__(self):
        yield self.output()
        yield self.transcript


def check_schedules(alice: PartyProgram, bob: PartyProgram) -> None:
    if alice.role != "A" or bob.role != "B":
        raise ScheduleError("first party must play role A and second role B")
    if len(alice.schedule) != len(bob.schedule):
        raise ScheduleError(f"schedule lengths differ: {len(alice.schedule)} vs {len(bob.schedule)}")
    for r, (a, b) in enumerate(zip(alice.schedule, bob.schedule)):
        if a != b:
            raise ScheduleError(f"round {r}: {a} vs {b}")


def _checked_payload(rnd: Round, payload, branch: Branch):
    if rnd.kind == "qubit":
        if not isinstance(payload, str) or payload not in branch.wires:
            raise ScheduleError(f"qubit payload must name an existing wire, got {payload!r}")
        return payload
    if isinstance(payload, bool) or not isinstance(payload, (int, np.integer)):
        raise ScheduleError(f"{rnd.kind} payload must be an integer, got {payload!r}")
    payload = int(payload)
    if not 0 <= payload < rnd.dim:
        raise ScheduleError(f"{rnd.kind} payload {payload} out of range")
    return payload


def run_interaction(
    alice: PartyProgram,
    bob: PartyProgram,
    input_state=None,
    mode: str = "exact",
    seed: int | None = 0,
    *,
    max_wires: int | None = None,
) -> InteractionResult:
    """Run the two programs round by round.

    Exact mode returns every branch with its weight (the averaged channel);
    sample mode follows one seeded trajectory.
    """
    check_schedules(alice, bob)
    engine = _Engine(mode, seed, max_wires)
    branches = [Branch.from_state(input_state)]
    for party in (alice, bob):
        if party.setup is not None:
            branches = merge_branches(engine.run_all(party.setup, branches))
    rounds = []
    for r, rnd in enumerate(alice.schedule):
        sender, receiver = (alice, bob) if rnd.sender() == "A" else (bob, alice)
        nxt = []
        value = None
        for br in branches:
            for b, payload in engine.execute(sender.handlers[r], br):
                payload = _checked_payload(rnd, payload, b)
                if rnd.kind != "qubit":
                    value = payload
                nxt.extend(x for x, _ in engine.execute(receiver.handlers[r], b, payload))
        branches = merge_branches(nxt)
        rounds.append(
            {
                "dir": rnd.direction,
                "kind": rnd.kind,
                "value": value if mode == "sample" else None,
                "dim": rnd.dim,
            }
        )
    for party in (alice, bob):
        if party.finish is not None:
            branches = merge_branches(engine.run_all(party.finish, branches))
    transcript = {
        "mode": mode,
        "seed": seed,
        "rounds": rounds,
        "output_dim": 2 ** len(alice.outputs),
    }
    return InteractionResult(branches, transcript, mode, seed, tuple(alice.outputs), engine)


def evolve(state, fn: Callable, mode: str = "exact", seed: int | None = 0) -> InteractionResult:
    """Run a single handler on a state with the same branching machinery."""
    engine = _Engine(mode, seed)
    branches = merge_branches(engine.run_all(fn, [Branch.from_state(state)]))
    return InteractionResult(branches, {}, mode, seed, (), engine)


# ---------------------------------------------------------------------------
# Combs


@dataclass
class CombChoi:
    """Choi operator of a multi-round strategy, block-diagonal in its classical ports.

    ``keys`` are classical port names with dimensions ``key_dims``;
    ``wires`` are the quantum ports in canonical order. ``in_dim`` and
    ``out_dim`` count the input and output port dimensions.
    """

    state: CQState
    key_dims: tuple
    in_dim: int
    out_dim: int

    @property
    def keys(self) -> tuple:
        return self.state.keys

    @property
    def wires(self) -> tuple:
        return self.state.wires

    def gap(self, other: "CombChoi") -> float:
        if self.key_dims != other.key_dims:
            raise ValueError("combs have different classical ports")
        return self.state.frobenius_gap(other.state)

    def dense(self):
        from .qcore import ChoiOperator

        mat = self.state.dense(self.key_dims)
        return ChoiOperator(self.in_dim, self.out_dim, mat, check=False)


def _port_program(party: PartyProgram) -> PartyProgram:
    """Counterparty that turns every message into an open port."""
    role = "B" if party.role == "A" else "A"
    handlers = []
    for r, rnd in enumerate(party.schedule):
        port = f"P{r}"
        if rnd.sender() == party.role:
            if rnd.kind == "qubit":
                def h(ctx, payload, port=port):
                    ctx.rename(payload, port)
            else:
                def h(ctx, payload, port=port):
                    ctx.set(port, payload)
        else:
            if rnd.kind == "qubit":
                def h(ctx, port=port):
                    ctx.prepare([port + ".ref", port], np.array([1, 0, 0, 1]) / np.sqrt(2))
                    return port
            else:
                def h(ctx, port=port, d=rnd.dim):
                    return ctx.random(port, d)
        handlers.append(h)
    return PartyProgram("ports", role, party.schedule, tuple(handlers))


def comb_choi(party: PartyProgram, inputs: Sequence[str] = (), *, max_wires: int | None = None) -> CombChoi:
    """Choi operator of ``party``'s full strategy.

    ``inputs`` are the party's input wires; each is fed half of a maximally
    entangled pair whose other half becomes port ``Rin{j}``. Outputs are
    renamed ``Out{j}``. Quantum ports from messages are ``P{r}`` (sent) or
    ``P{r}.ref`` (received); classical ports ``P{r}`` are block keys.
    """
    inputs = list(inputs)
    k = len(inputs)
    amps = np.eye(2**k, dtype=complex).reshape(-1) / np.sqrt(2**k)
    probe = QuantumState([f"Rin{j}" for j in range(k)] + inputs, amps)
    ports = _port_program(party)
    pair = (party, ports) if party.role == "A" else (ports, party)
    res = run_interaction(*pair, probe, mode="exact", max_wires=max_wires)

    wires = [f"Rin{j}" for j in range(k)]
    keys, key_dims = [], []
    in_dim, out_dim = 2**k, 1
    for r, rnd in enumerate(party.schedule):
        sent = rnd.sender() == party.role
        if rnd.kind == "qubit":
            wires.append(f"P{r}" if sent else f"P{r}.ref")
        else:
            keys.append(f"P{r}")
            key_dims.append(rnd.dim)
        if sent:
            out_dim *= rnd.dim
        else:
            in_dim *= rnd.dim
    outs = list(party.outputs)
    out_dim *= 2 ** len(outs)

    def rename_outputs(ctx: Ctx):
        for j, w in enumerate(outs):
            ctx.rename(w, f"Out{j}")

    res = res.map(rename_outputs)
    wires += [f"Out{j}" for j in range(len(outs))]
    return CombChoi(res.state(wires, keys), tuple(key_dims), in_dim, out_dim)


def comb_equal(a: CombChoi, b: CombChoi, tol: float = 1e-9) -> tuple[bool, float]:
    gap = a.gap(b)
    return gap <= tol, gap
