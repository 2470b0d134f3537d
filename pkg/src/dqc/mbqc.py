"""Brickwork graphs, flow dependencies, angle adaptation and a reference MBQC executor."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .qcore import (
    CZ,
    X,
    Z,
    Angle8,
    DensityOperator,
    QuantumState,
    apply_to_matrix,
    apply_to_vector,
    maximally_entangled,
    plus_state,
    project_matrix,
    project_vector,
    reduce_vector,
    trace_out_matrix,
    wire_axes,
    xy_basis,
)

Vertex = tuple[int, int]


class PatternError(ValueError):
    """Malformed graph, flow or measurement pattern."""


@dataclass(frozen=True)
class BrickworkGraph:
    """Rows 1..n, columns 0..m, undirected edges as sorted vertex pairs."""

    n: int
    m: int
    edges: frozenset

    def vertices(self) -> list[Vertex]:
        return [(x, y) for y in range(self.m + 1) for x in range(1, self.n + 1)]

    def neighbors(self, v: Vertex) -> set[Vertex]:
        out = set()
        for a, b in self.edges:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        return out

    def __contains__(self, v) -> bool:
        x, y = v
        return 1 <= x <= self.n and 0 <= y <= self.m


def _edge(a: Vertex, b: Vertex) -> tuple[Vertex, Vertex]:
    return (a, b) if a <= b else (b, a)


def build_brickwork(n: int, m: int) -> BrickworkGraph:
    if n < 1 or m < 1:
        raise PatternError(f"brickwork needs n, m >= 1, got n={n}, m={m}")
    edges = set()
    for x in range(1, n + 1):
        for y in range(m):
            edges.add(_edge((x, y), (x, y + 1)))

    def join(i: int, j: int) -> None:
        for col in (j, j + 2):
            if i + 1 <= n and col <= m:
                edges.add(_edge((i, col), (i + 1, col)))

    for j in range(m + 1):
        for i in range(1, n + 1):
            if j % 8 == 3 and i % 2 == 1:
                join(i, j)
            elif j % 8 == 7 and i % 2 == 0:
                join(i, j)
    return BrickworkGraph(n, m, frozenset(edges))


def default_flow(v: Vertex) -> Vertex:
    return (v[0], v[1] + 1)


def derive_dependencies(
    graph: BrickworkGraph, flow: Callable[[Vertex], Vertex] = default_flow
) -> tuple[dict, dict]:
    """X and Z dependency sets for every vertex, output column included.

    ``j`` gets an X-dependency on ``i`` iff ``j = f(i)`` and a Z-dependency
    iff ``j`` neighbors ``f(i)`` with ``j != i``. Only non-output vertices
    have a flow image.
    """
    xd = {v: set() for v in graph.vertices()}
    zd = {v: set() for v in graph.vertices()}
    for i in graph.vertices():
        if i[1] == graph.m:
            continue
        fi = flow(i)
        if fi not in graph:
            raise PatternError(f"flow maps {i} outside the graph to {fi}")
        if _edge(i, fi) not in graph.edges:
            raise PatternError(f"flow image {fi} is not a neighbor of {i}")
        xd[fi].add(i)
        for j in graph.neighbors(fi):
            if j != i:
                zd[j].add(i)
    return (
        {v: frozenset(s) for v, s in xd.items()},
        {v: frozenset(s) for v, s in zd.items()},
    )


def adapt_angle(phi, sx: int, sz: int) -> Angle8:
    k = int(Angle8(phi))
    return Angle8((-k if sx & 1 else k) + 4 * (sz & 1))


def otp_compensate(phi0, phi1, i: int) -> tuple[Angle8, Angle8]:
    phi0, phi1 = Angle8(phi0), Angle8(phi1)
    if i & 1:
        return -phi0, phi1.add_pi()
    return phi0, phi1


@dataclass(frozen=True)
class MeasurementPattern:
    """Angles for columns 0..m-1 plus dependency sets for columns 0..m.

    ``angles[x-1][y]`` is the angle of vertex (x, y).
    """

    n: int
    m: int
    angles: tuple
    x_deps: Mapping = field(repr=False)
    z_deps: Mapping = field(repr=False)

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise PatternError("pattern needs n, m >= 1")
        rows = tuple(tuple(Angle8(k) for k in row) for row in self.angles)
        if len(rows) != self.n or any(len(r) != self.m for r in rows):
            raise PatternError(f"angles must be {self.n} rows of {self.m} entries")
        object.__setattr__(self, "angles", rows)
        for name in ("x_deps", "z_deps"):
            deps = getattr(self, name)
            fixed = {}
            for x in range(1, self.n + 1):
                for y in range(self.m + 1):
                    s = frozenset(tuple(v) for v in deps.get((x, y), ()))
                    for (a, b) in s:
                        if not (1 <= a <= self.n and 0 <= b < y):
                            raise PatternError(
                                f"{name} of {(x, y)} contains {(a, b)}, not in an earlier column"
                            )
                    fixed[(x, y)] = s
            object.__setattr__(self, name, fixed)

    def angle(self, x: int, y: int) -> Angle8:
        return self.angles[x - 1][y]

    @property
    def output_x_deps(self) -> dict:
        return {x: self.x_deps[(x, self.m)] for x in range(1, self.n + 1)}

    @property
    def output_z_deps(self) -> dict:
        return {x: self.z_deps[(x, self.m)] for x in range(1, self.n + 1)}

    def order(self) -> list[Vertex]:
        """Measured vertices, column-major, rows top to bottom."""
        return [(x, y) for y in range(self.m) for x in range(1, self.n + 1)]

    def signals(self, v: Vertex, outcomes: Mapping) -> tuple[int, int]:
        sx = sum(outcomes[u] for u in self.x_deps[v]) & 1
        sz = sum(outcomes[u] for u in self.z_deps[v]) & 1
        return sx, sz

    def uses_flow(self) -> bool:
        xd, zd = derive_dependencies(build_brickwork(self.n, self.m))
        return dict(self.x_deps) == xd and dict(self.z_deps) == zd

    # -- serialization

    def to_json(self) -> dict:
        def deps(d):
            return [
                [sorted([a, b] for a, b in d[(x, y)]) for y in range(self.m + 1)]
                for x in range(1, self.n + 1)
            ]

        flow = self.uses_flow()
        return {
            "n": self.n,
            "m": self.m,
            "angles": [[int(a) for a in row] for row in self.angles],
            "x_deps": "flow" if flow else deps(self.x_deps),
            "z_deps": "flow" if flow else deps(self.z_deps),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, obj: Mapping) -> "MeasurementPattern":
        try:
            n, m, angles = int(obj["n"]), int(obj["m"]), obj["angles"]
        except (KeyError, TypeError, ValueError) as exc:
            raise PatternError(f"pattern JSON missing or bad field: {exc}") from None
        for row in angles:
            for k in row:
                if not isinstance(k, int) or isinstance(k, bool) or not 0 <= k <= 7:
                    raise PatternError(f"angles must be integers 0..7, got {k!r}")
        flow = derive_dependencies(build_brickwork(n, m)) if n >= 1 and m >= 1 else ({}, {})

        def parse(spec, default):
            if spec == "flow":
                return default
            if not isinstance(spec, list) or len(spec) != n:
                raise PatternError("explicit deps must be n rows of m+1 lists")
            out = {}
            for x, row in enumerate(spec, start=1):
                if len(row) != m + 1:
                    raise PatternError("explicit deps must be n rows of m+1 lists")
                for y, items in enumerate(row):
                    out[(x, y)] = frozenset((int(a), int(b)) for a, b in items)
            return out

        return cls(n, m, angles, parse(obj.get("x_deps", "flow"), flow[0]), parse(obj.get("z_deps", "flow"), flow[1]))

    @classmethod
    def loads(cls, text: str) -> "MeasurementPattern":
        return cls.from_json(json.loads(text))


def flow_pattern(angles: Sequence[Sequence[int]]) -> MeasurementPattern:
    n, m = len(angles), len(angles[0])
    xd, zd = derive_dependencies(build_brickwork(n, m))
    return MeasurementPattern(n, m, tuple(tuple(r) for r in angles), xd, zd)


def zero_pattern(n: int, m: int) -> MeasurementPattern:
    return flow_pattern([[0] * m for _ in range(n)])


def random_pattern(n: int, m: int, seed: int) -> MeasurementPattern:
    rng = np.random.default_rng(seed)
    return flow_pattern(rng.integers(0, 8, size=(n, m)).tolist())


# ---------------------------------------------------------------------------
# Reference executor


class _Register:
    """Mutable pure-or-mixed state used only inside the executor."""

    def __init__(self, state):
        self.wires = list(state.wires)
        if isinstance(state, QuantumState):
            self.vec, self.mat = state.amplitudes.copy(), None
        else:
            self.vec, self.mat = None, np.array(state.matrix)

    def copy(self) -> "_Register":
        r = _Register.__new__(_Register)
        r.wires = list(self.wires)
        r.vec = None if self.vec is None else self.vec.copy()
        r.mat = None if self.mat is None else self.mat.copy()
        return r

    def add_plus(self, label: str) -> None:
        p = plus_state(0)
        if self.vec is not None:
            self.vec = np.kron(self.vec, p)
        else:
            self.mat = np.kron(self.mat, np.outer(p, p.conj()))
        self.wires.append(label)

    def apply(self, gate, labels) -> None:
        axes = wire_axes(self.wires, labels)
        n = len(self.wires)
        if self.vec is not None:
            self.vec = apply_to_vector(self.vec, n, gate, axes)
        else:
            self.mat = apply_to_matrix(self.mat, n, gate, axes)

    def project(self, label: str, bra) -> float:
        (axis,) = wire_axes(self.wires, [label])
        n = len(self.wires)
        if self.vec is not None:
            self.vec = project_vector(self.vec, n, bra, axis)
            p = float(np.vdot(self.vec, self.vec).real)
        else:
            self.mat = project_matrix(self.mat, n, bra, axis)
            p = float(np.trace(self.mat).real)
        del self.wires[axis]
        return p

    def density(self, drop: Sequence[str] = ()) -> np.ndarray:
        axes = wire_axes(self.wires, drop)
        n = len(self.wires)
        if self.vec is not None:
            return reduce_vector(self.vec, n, axes)
        return trace_out_matrix(self.mat, n, axes) if axes else self.mat


def _resource(pattern: MeasurementPattern, state, inputs, graph):
    if len(inputs) != pattern.n:
        raise PatternError(f"pattern has {pattern.n} rows but {len(inputs)} input wires were given")
    graph = graph or build_brickwork(pattern.n, pattern.m)
    label = {}
    for x in range(1, pattern.n + 1):
        label[(x, 0)] = inputs[x - 1]
        for y in range(1, pattern.m + 1):
            label[(x, y)] = f"__mbqc_{x}_{y}"
    reg = _Register(state)
    for y in range(1, pattern.m + 1):
        for x in range(1, pattern.n + 1):
            reg.add_plus(label[(x, y)])
    for a, b in sorted(graph.edges):
        reg.apply(CZ, [label[a], label[b]])
    return reg, label, graph


def honest_mbqc_execute(
    pattern: MeasurementPattern,
    rho_in,
    mode: str = "exact",
    seed: int | None = None,
    *,
    inputs: Sequence[str] | None = None,
    graph: BrickworkGraph | None = None,
    strategy: str = "adaptive",
) -> DensityOperator:
    """Run the pattern honestly and return the output over the input's wires.

    ``inputs`` names the n wires fed to column 0 (default: the first n); any
    other wire of ``rho_in`` is a passive reference. ``strategy="adaptive"``
    adapts angles and applies final Pauli corrections, averaging branches at
    the end. ``strategy="column"`` instead pushes Pauli byproducts forward
    after every measurement and averages branches after every column.
    """
    if not isinstance(rho_in, (QuantumState, DensityOperator)):
        raise TypeError("rho_in must be a QuantumState or DensityOperator")
    inputs = list(inputs) if inputs is not None else list(rho_in.wires[: pattern.n])
    if len(rho_in.wires) < pattern.n:
        raise PatternError(f"input has {len(rho_in.wires)} wires, pattern needs {pattern.n}")
    reg, label, graph = _resource(pattern, rho_in, inputs, graph)
    order = pattern.order()

    def finish(r: _Register) -> np.ndarray:
        # output column takes over the input labels, references keep theirs
        rho = r.density()
        cur = [label_to_out.get(w, w) for w in r.wires]
        target = list(rho_in.wires)
        perm = [cur.index(w) for w in target]
        k = len(cur)
        t = rho.reshape((2,) * (2 * k)).transpose(perm + [k + p for p in perm])
        return t.reshape(rho.shape)

    label_to_out = {label[(x, pattern.m)]: inputs[x - 1] for x in range(1, pattern.n + 1)}

    if strategy == "column":
        if mode != "exact":
            raise ValueError("column strategy is exact-only")
        if reg.mat is None:
            a = reg.vec
            reg.mat, reg.vec = np.outer(a, a.conj()), None
        for y in range(pattern.m):
            for x in range(1, pattern.n + 1):
                v = (x, y)
                acc = None
                for s, bra in enumerate(xy_basis(pattern.angle(x, y))):
                    r = reg.copy()
                    r.project(label[v], bra)
                    if s:
                        fv = default_flow(v)
                        r.apply(X, [label[fv]])
                        for u in graph.neighbors(fv):
                            if u != v:
                                r.apply(Z, [label[u]])
                    acc = r if acc is None else _add(acc, r)
                reg = acc
        return DensityOperator(rho_in.wires, finish(reg), check=False)
    if strategy != "adaptive":
        raise ValueError(f"unknown strategy {strategy!r}")

    def correct(r: _Register, outcomes: dict) -> None:
        for x in range(1, pattern.n + 1):
            sx, sz = pattern.signals((x, pattern.m), outcomes)
            if sx:
                r.apply(X, [label[(x, pattern.m)]])
            if sz:
                r.apply(Z, [label[(x, pattern.m)]])

    if mode == "sample":
        rng = np.random.default_rng(seed)
        outcomes = {}
        r = reg
        for v in order:
            sx, sz = pattern.signals(v, outcomes)
            basis = xy_basis(adapt_angle(pattern.angle(*v), sx, sz))
            trial = [r.copy() for _ in basis]
            probs = np.array([t.project(label[v], b) for t, b in zip(trial, basis)])
            s = int(rng.choice(2, p=probs / probs.sum()))
            r = trial[s]
            norm = probs[s]
            if r.vec is not None:
                r.vec = r.vec / np.sqrt(norm)
            else:
                r.mat = r.mat / norm
            outcomes[v] = s
        correct(r, outcomes)
        return DensityOperator(rho_in.wires, finish(r), check=False)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")

    total = [None]

    def dfs(r: _Register, idx: int, outcomes: dict) -> None:
        if idx == len(order):
            correct(r, outcomes)
            rho = finish(r)
            total[0] = rho if total[0] is None else total[0] + rho
            return
        v = order[idx]
        sx, sz = pattern.signals(v, outcomes)
        for s, bra in enumerate(xy_basis(adapt_angle(pattern.angle(*v), sx, sz))):
            child = r.copy()
            if child.project(label[v], bra) <= 1e-15:
                continue
            outcomes[v] = s
            dfs(child, idx + 1, outcomes)
            del outcomes[v]

    dfs(reg, 0, {})
    return DensityOperator(rho_in.wires, total[0], check=False)


def _add(a: _Register, b: _Register) -> _Register:
    if a.wires != b.wires:
        raise PatternError("branch registers disagree on wire order")
    a.mat = a.mat + b.mat
    return a


def pattern_unitary(pattern: MeasurementPattern, tol: float = 1e-8) -> np.ndarray:
    """The n-qubit unitary implemented by a deterministic pattern.

    Read off the rank-one Choi state; raises if the pattern is not unitary.
    The global phase is fixed so that the first nonzero entry is real.
    """
    n = pattern.n
    ins = [f"in{j}" for j in range(n)]
    refs = [f"ref{j}" for j in range(n)]
    probe = maximally_entangled(ins, refs)
    rho = honest_mbqc_execute(pattern, probe, inputs=ins).matrix
    w, v = np.linalg.eigh(rho)
    if abs(w[-1] - 1) > tol:
        raise PatternError(f"pattern output is not a unitary channel (top eigenvalue {w[-1]:.6g})")
    d = 2**n
    U = v[:, -1].reshape(d, d) * np.sqrt(d)
    flat = U.reshape(-1)
    lead = flat[np.argmax(np.abs(flat) > 1e-9)]
    return U * (abs(lead) / lead)
