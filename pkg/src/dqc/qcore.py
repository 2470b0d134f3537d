"""Dense quantum states, channels and distance measures on labeled qubit wires.

Everything here is a pure function of its inputs (plus an explicit seed where
randomness is involved). States carry an ordered tuple of wire labels; the
first label is the most significant qubit of the computational basis index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import unitary_group

TOL = 1e-9
ALG_TOL = 1e-12
EIG_CLIP = 1e-10


class WireError(ValueError):
    """Unknown, duplicated or misplaced wire label."""


class DimensionError(ValueError):
    """Operator or state dimensions do not line up."""


# ---------------------------------------------------------------------------
# Angles


def _k(value) -> int:
    if isinstance(value, Angle8):
        return value.k
    return int(value)


@dataclass(frozen=True, order=True)
class Angle8:
    """An angle k*pi/4 with k reduced mod 8."""

    k: int = 0

    def __post_init__(self):
        object.__setattr__(self, "k", int(self.k) % 8)

    @property
    def radians(self) -> float:
        return self.k * np.pi / 4

    def __add__(self, other) -> "Angle8":
        return Angle8(self.k + _k(other))

    __radd__ = __add__

    def __sub__(self, other) -> "Angle8":
        return Angle8(self.k - _k(other))

    def __rsub__(self, other) -> "Angle8":
        return Angle8(_k(other) - self.k)

    def __neg__(self) -> "Angle8":
        return Angle8(-self.k)

    def __int__(self) -> int:
        return self.k

    def __index__(self) -> int:
        return self.k

    def negate(self) -> "Angle8":
        return Angle8(8 - self.k)

    def add_pi(self) -> "Angle8":
        return Angle8(self.k + 4)


def _radians(angle) -> float:
    if isinstance(angle, Angle8):
        return angle.radians
    if isinstance(angle, (int, np.integer)):
        return Angle8(angle).radians
    return float(angle)


# ---------------------------------------------------------------------------
# Gates

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def z_rotation(angle) -> np.ndarray:
    """Z_theta = |0><0| + e^{i theta}|1><1|. Integers are read as Angle8."""
    return np.diag([1.0, np.exp(1j * _radians(angle))]).astype(complex)


def plus_state(angle=0) -> np.ndarray:
    """|+_theta> = (|0> + e^{i theta}|1>)/sqrt(2)."""
    return np.array([1.0, np.exp(1j * _radians(angle))], dtype=complex) / np.sqrt(2)


def xy_basis(angle) -> tuple[np.ndarray, np.ndarray]:
    """The pair (|+_delta>, |-_delta>); outcome 0 is |+_delta>."""
    phase = np.exp(1j * _radians(angle))
    s = 1 / np.sqrt(2)
    return (
        np.array([s, s * phase], dtype=complex),
        np.array([s, -s * phase], dtype=complex),
    )


def is_diagonal(op: np.ndarray, tol: float = ALG_TOL) -> bool:
    off = op - np.diag(np.diag(op))
    return bool(np.max(np.abs(off), initial=0.0) <= tol)


# ---------------------------------------------------------------------------
# Tensor plumbing shared with the interaction engine


def _check_wires(wires: Sequence[str]) -> tuple[str, ...]:
    wires = tuple(wires)
    if len(set(wires)) != len(wires):
        raise WireError(f"duplicate wire labels in {wires}")
    return wires


def wire_axes(wires: Sequence[str], targets: Sequence[str]) -> list[int]:
    axes = []
    for t in targets:
        try:
            axes.append(wires.index(t))
        except ValueError:
            raise WireError(f"unknown wire {t!r}") from None
    if len(set(axes)) != len(axes):
        raise WireError(f"repeated target in {tuple(targets)}")
    return axes


def _op_tensor(op: np.ndarray, k: int) -> np.ndarray:
    if op.shape != (2**k, 2**k):
        raise DimensionError(f"gate of shape {op.shape} does not act on {k} qubits")
    return op.reshape((2,) * (2 * k))


def apply_to_vector(vec: np.ndarray, n: int, op: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    t = np.tensordot(_op_tensor(op, k), vec.reshape((2,) * n), axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(t, list(range(k)), axes).reshape(-1)


def apply_to_matrix(mat: np.ndarray, n: int, op: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    opt = _op_tensor(op, k)
    t = mat.reshape((2,) * (2 * n))
    t = np.tensordot(opt, t, axes=(list(range(k, 2 * k)), axes))
    t = np.moveaxis(t, list(range(k)), axes)
    cols = [n + a for a in axes]
    t = np.tensordot(opt.conj(), t, axes=(list(range(k, 2 * k)), cols))
    t = np.moveaxis(t, list(range(k)), cols)
    d = 2**n
    return t.reshape(d, d)


def apply_diagonal_to_vector(vec: np.ndarray, n: int, diag: np.ndarray, axis: int) -> np.ndarray:
    shape = [1] * n
    shape[axis] = 2
    return (vec.reshape((2,) * n) * diag.reshape(shape)).reshape(-1)


def apply_diagonal_to_matrix(mat: np.ndarray, n: int, diag: np.ndarray, axis: int) -> np.ndarray:
    shape = [1] * (2 * n)
    shape[axis] = 2
    t = mat.reshape((2,) * (2 * n)) * diag.reshape(shape)
    shape[axis], shape[n + axis] = 1, 2
    t = t * diag.conj().reshape(shape)
    return t.reshape(mat.shape)


def trace_out_matrix(mat: np.ndarray, n: int, axes: list[int]) -> np.ndarray:
    keep = [a for a in range(n) if a not in axes]
    t = mat.reshape((2,) * (2 * n))
    perm = keep + axes + [n + a for a in keep] + [n + a for a in axes]
    dk, dd = 2 ** len(keep), 2 ** len(axes)
    t = t.transpose(perm).reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def reduce_vector(vec: np.ndarray, n: int, axes: list[int]) -> np.ndarray:
    """Density matrix of the wires not in ``axes`` for a pure vector."""
    keep = [a for a in range(n) if a not in axes]
    t = vec.reshape((2,) * n).transpose(keep + axes).reshape(2 ** len(keep), 2 ** len(axes))
    return t @ t.conj().T


def permute_matrix(mat: np.ndarray, n: int, perm: list[int]) -> np.ndarray:
    t = mat.reshape((2,) * (2 * n)).transpose(perm + [n + p for p in perm])
    return t.reshape(mat.shape)


def permute_vector(vec: np.ndarray, n: int, perm: list[int]) -> np.ndarray:
    return vec.reshape((2,) * n).transpose(perm).reshape(-1)


def project_vector(vec: np.ndarray, n: int, bra: np.ndarray, axis: int) -> np.ndarray:
    """Contract ``<bra|`` into ``axis`` and drop that wire."""
    return np.tensordot(bra.conj(), vec.reshape((2,) * n), axes=([0], [axis])).reshape(-1)


def project_matrix(mat: np.ndarray, n: int, bra: np.ndarray, axis: int) -> np.ndarray:
    t = mat.reshape((2,) * (2 * n))
    t = np.tensordot(bra.conj(), t, axes=([0], [axis]))
    t = np.tensordot(bra, t, axes=([0], [n - 1 + axis]))
    d = 2 ** (n - 1)
    return t.reshape(d, d)


# ---------------------------------------------------------------------------
# States


class QuantumState:
    """Pure state over labeled wires.

    ``normalized=False`` admits subnormalized vectors, which show up as
    branches of an exact measurement.
    """

    __slots__ = ("wires", "amplitudes")

    def __init__(self, wires: Iterable[str], amplitudes, *, normalized: bool = True):
        wires = _check_wires(wires)
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 ** len(wires):
            raise DimensionError(f"{amps.size} amplitudes for {len(wires)} wires")
        if normalized and abs(np.vdot(amps, amps).real - 1) > EIG_CLIP:
            raise ValueError("amplitudes are not unit norm")
        amps.setflags(write=False)
        self.wires = wires
        self.amplitudes = amps

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def density(self) -> "DensityOperator":
        a = self.amplitudes
        return DensityOperator(self.wires, np.outer(a, a.conj()), check=False)

    def reorder(self, wires: Sequence[str]) -> "QuantumState":
        perm = wire_axes(self.wires, wires)
        if len(perm) != len(self.wires):
            raise WireError("reorder needs every wire exactly once")
        amps = permute_vector(self.amplitudes, len(self.wires), perm)
        return QuantumState(wires, amps, normalized=False)

    def __repr__(self):
        return f"QuantumState(wires={self.wires})"


class DensityOperator:
    """Positive, possibly subnormalized operator over labeled wires."""

    __slots__ = ("wires", "matrix")

    def __init__(self, wires: Iterable[str], matrix, *, check: bool = True):
        wires = _check_wires(wires)
        mat = np.array(matrix, dtype=complex)
        d = 2 ** len(wires)
        if mat.shape != (d, d):
            raise DimensionError(f"matrix of shape {mat.shape} for {len(wires)} wires")
        if check:
            if np.max(np.abs(mat - mat.conj().T), initial=0.0) > EIG_CLIP:
                raise ValueError("operator is not Hermitian")
            if d and np.linalg.eigvalsh((mat + mat.conj().T) / 2)[0] < -EIG_CLIP:
                raise ValueError("operator has a negative eigenvalue")
            if np.trace(mat).real > 1 + EIG_CLIP:
                raise ValueError("trace exceeds one")
        mat.setflags(write=False)
        self.wires = wires
        self.matrix = mat

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def reorder(self, wires: Sequence[str]) -> "DensityOperator":
        perm = wire_axes(self.wires, wires)
        if len(perm) != len(self.wires):
            raise WireError("reorder needs every wire exactly once")
        return DensityOperator(wires, permute_matrix(self.matrix, len(self.wires), perm), check=False)

    def __repr__(self):
        return f"DensityOperator(wires={self.wires}, trace={self.trace():.6g})"


State = QuantumState | DensityOperator


def as_density(state) -> DensityOperator:
    if isinstance(state, DensityOperator):
        return state
    if isinstance(state, QuantumState):
        return state.density()
    raise TypeError(f"not a state: {type(state).__name__}")


def tensor(*states):
    """Tensor product; the result is pure only if every factor is pure."""
    if all(isinstance(s, QuantumState) for s in states):
        amps = np.ones(1, dtype=complex)
        wires: list[str] = []
        for s in states:
            amps = np.kron(amps, s.amplitudes)
            wires.extend(s.wires)
        return QuantumState(wires, amps, normalized=False)
    mat = np.ones((1, 1), dtype=complex)
    wires = []
    for s in states:
        mat = np.kron(mat, as_density(s).matrix)
        wires.extend(s.wires)
    return DensityOperator(wires, mat, check=False)


def basis_state(wires: Sequence[str], bits: Sequence[int]) -> QuantumState:
    amps = np.zeros(2 ** len(wires), dtype=complex)
    amps[int("".join(str(b) for b in bits) or "0", 2)] = 1
    return QuantumState(wires, amps)


def bell_state(a: str, b: str) -> QuantumState:
    """|Phi+> = (|00> + |11>)/sqrt(2) on wires (a, b)."""
    return QuantumState((a, b), np.array([1, 0, 0, 1]) / np.sqrt(2))


def maximally_entangled(left: Sequence[str], right: Sequence[str]) -> QuantumState:
    """Pairwise |Phi+> between ``left[j]`` and ``right[j]``, ordered left then right."""
    k = len(left)
    d = 2**k
    amps = np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)
    return QuantumState(tuple(left) + tuple(right), amps)


# ---------------------------------------------------------------------------
# Channels


class KrausChannel:
    """A completely positive map given by Kraus operators of shape (out, in)."""

    __slots__ = ("operators", "trace_preserving", "in_wires", "out_wires")

    def __init__(
        self,
        operators: Iterable,
        *,
        trace_preserving: bool = True,
        in_wires: Sequence[str] | None = None,
        out_wires: Sequence[str] | None = None,
        tol: float = TOL,
    ):
        ops = tuple(np.array(E, dtype=complex) for E in operators)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(E.shape != shape for E in ops) or len(shape) != 2:
            raise DimensionError("Kraus operators must share one 2-d shape")
        gram = sum(E.conj().T @ E for E in ops)
        eye = np.eye(shape[1])
        if trace_preserving:
            if np.max(np.abs(gram - eye)) > tol:
                raise ValueError("Kraus completeness violated")
        elif np.linalg.eigvalsh(eye - gram)[0] < -tol:
            raise ValueError("Kraus operators are not trace non-increasing")
        for E in ops:
            E.setflags(write=False)
        self.operators = ops
        self.trace_preserving = trace_preserving
        self.in_wires = None if in_wires is None else tuple(in_wires)
        self.out_wires = None if out_wires is None else tuple(out_wires)

    @property
    def in_dim(self) -> int:
        return self.operators[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.operators[0].shape[0]

    def __repr__(self):
        return f"KrausChannel({len(self.operators)} ops, {self.in_dim}->{self.out_dim})"


def unitary_channel(U) -> KrausChannel:
    return KrausChannel([U])


def identity_channel(dim: int = 2) -> KrausChannel:
    return KrausChannel([np.eye(dim)])


def fully_depolarizing(dim: int = 2) -> KrausChannel:
    ops = []
    for i in range(dim):
        for j in range(dim):
            E = np.zeros((dim, dim), dtype=complex)
            E[i, j] = 1 / np.sqrt(dim)
            ops.append(E)
    return KrausChannel(ops)


def compose(second: KrausChannel, first: KrausChannel) -> KrausChannel:
    """The channel ``second o first``."""
    ops = [B @ A for B in second.operators for A in first.operators]
    return KrausChannel(ops, trace_preserving=first.trace_preserving and second.trace_preserving)


def kraus_apply_matrix(
    mat: np.ndarray,
    wires: tuple[str, ...],
    ops: Sequence[np.ndarray],
    targets: Sequence[str],
    out_labels: Sequence[str],
) -> tuple[np.ndarray, tuple[str, ...]]:
    n = len(wires)
    axes = wire_axes(wires, targets)
    rest = [a for a in range(n) if a not in axes]
    din, drest = 2 ** len(axes), 2 ** len(rest)
    dout = ops[0].shape[0]
    if ops[0].shape[1] != din or dout != 2 ** len(out_labels):
        raise DimensionError("Kraus operators do not match the target wires")
    t = permute_matrix(mat, n, axes + rest).reshape(din, drest, din, drest)
    out = np.zeros((dout, drest, dout, drest), dtype=complex)
    for E in ops:
        out += np.einsum("ai,ibjc,dj->abdc", E, t, E.conj(), optimize=True)
    new_wires = tuple(out_labels) + tuple(wires[a] for a in rest)
    d = dout * drest
    return out.reshape(d, d), new_wires


def kraus_apply_vector(
    vec: np.ndarray,
    wires: tuple[str, ...],
    op: np.ndarray,
    targets: Sequence[str],
    out_labels: Sequence[str],
) -> tuple[np.ndarray, tuple[str, ...]]:
    n = len(wires)
    axes = wire_axes(wires, targets)
    rest = [a for a in range(n) if a not in axes]
    din = 2 ** len(axes)
    if op.shape[1] != din or op.shape[0] != 2 ** len(out_labels):
        raise DimensionError("Kraus operator does not match the target wires")
    t = permute_vector(vec, n, axes + rest).reshape(din, -1)
    out = op @ t
    return out.reshape(-1), tuple(out_labels) + tuple(wires[a] for a in rest)


def apply_unitary(state, gate, targets: Sequence[str]):
    """Apply ``gate`` to ``targets``; returns the same kind of state."""
    gate = np.asarray(gate, dtype=complex)
    axes = wire_axes(state.wires, targets)
    if gate.shape != (2 ** len(axes), 2 ** len(axes)):
        raise DimensionError(f"gate of shape {gate.shape} on {len(axes)} wires")
    n = len(state.wires)
    if isinstance(state, QuantumState):
        return QuantumState(state.wires, apply_to_vector(state.amplitudes, n, gate, axes), normalized=False)
    return DensityOperator(state.wires, apply_to_matrix(state.matrix, n, gate, axes), check=False)


def apply_channel(rho, ch: KrausChannel, targets: Sequence[str]) -> DensityOperator:
    """sum_k E_k rho E_k^dagger on ``targets``, identity elsewhere."""
    rho = as_density(rho)
    targets = tuple(targets)
    if ch.out_dim == ch.in_dim and ch.out_wires is None:
        out_labels = targets
    elif ch.out_wires is not None:
        out_labels = ch.out_wires
    else:
        raise DimensionError("channel changes dimension; give it out_wires")
    mat, wires = kraus_apply_matrix(rho.matrix, rho.wires, ch.operators, targets, out_labels)
    out = DensityOperator(wires, mat, check=False)
    if out_labels == targets:
        out = out.reorder(rho.wires)
    return out


def partial_trace(rho, discard: Sequence[str]) -> DensityOperator:
    """Trace out ``discard``; remaining wires keep their order."""
    axes = wire_axes(rho.wires, discard)
    keep = tuple(w for i, w in enumerate(rho.wires) if i not in axes)
    n = len(rho.wires)
    if isinstance(rho, QuantumState):
        return DensityOperator(keep, reduce_vector(rho.amplitudes, n, axes), check=False)
    return DensityOperator(keep, trace_out_matrix(rho.matrix, n, axes), check=False)


@dataclass(frozen=True)
class MeasurementResult:
    """Outcome of an (X,Y)-plane measurement.

    Exact mode leaves ``outcome`` as None and carries both subnormalized
    branches. Sample mode carries the drawn bit and its renormalized state.
    """

    probabilities: tuple[float, float]
    states: tuple
    outcome: int | None = None


def measure_xy(state, wire: str, delta, mode: str = "exact", seed: int | None = None) -> MeasurementResult:
    """Measure ``wire`` in {|+_delta>, |-_delta>} and remove it."""
    (axis,) = wire_axes(state.wires, [wire])
    rest = tuple(w for w in state.wires if w != wire)
    n = len(state.wires)
    branches = []
    for bra in xy_basis(delta):
        if isinstance(state, QuantumState):
            v = project_vector(state.amplitudes, n, bra, axis)
            branches.append(QuantumState(rest, v, normalized=False))
        else:
            m = project_matrix(state.matrix, n, bra, axis)
            branches.append(DensityOperator(rest, m, check=False))
    probs = tuple(
        float(b.norm2()) if isinstance(b, QuantumState) else b.trace() for b in branches
    )
    if mode == "exact":
        return MeasurementResult(probs, tuple(branches))
    if mode != "sample":
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    p = np.clip(np.array(probs), 0, None)
    s = int(rng.choice(2, p=p / p.sum()))
    b = branches[s]
    if isinstance(b, QuantumState):
        b = QuantumState(rest, b.amplitudes / np.sqrt(probs[s]))
    else:
        b = DensityOperator(rest, b.matrix / probs[s], check=False)
    return MeasurementResult(probs, (b,), outcome=s)


# ---------------------------------------------------------------------------
# Distances


def _matrix(x) -> np.ndarray:
    if isinstance(x, DensityOperator):
        return x.matrix
    if isinstance(x, QuantumState):
        return np.outer(x.amplitudes, x.amplitudes.conj())
    return np.asarray(x, dtype=complex)


def _pair(rho, sigma) -> tuple[np.ndarray, np.ndarray]:
    a, b = _matrix(rho), _matrix(sigma)
    if a.shape != b.shape:
        raise DimensionError(f"cannot compare shapes {a.shape} and {b.shape}")
    return a, b


def trace_norm(mat: np.ndarray) -> float:
    herm = (mat + mat.conj().T) / 2
    return float(np.sum(np.abs(np.linalg.eigvalsh(herm))))


def trace_distance(rho, sigma, generalized: bool = False) -> float:
    """D = ||rho - sigma||_1 / 2, plus |tr rho - tr sigma|/2 when generalized."""
    a, b = _pair(rho, sigma)
    gap = abs(np.trace(a).real - np.trace(b).real)
    if not generalized and gap > TOL:
        raise ValueError("traces differ; use generalized=True")
    d = trace_norm(a - b) / 2
    return d + gap / 2 if generalized else d


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((mat + mat.conj().T) / 2)
    if w.size and w[0] < -EIG_CLIP:
        raise ValueError(f"negative eigenvalue {w[0]:.3g} beyond tolerance")
    w = np.clip(w, 0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho, sigma, generalized: bool = False) -> float:
    """F = tr sqrt(sqrt(rho) sigma sqrt(rho)) (not squared)."""
    a, b = _pair(rho, sigma)
    f = float(np.sum(np.linalg.svd(_psd_sqrt(a) @ _psd_sqrt(b), compute_uv=False)))
    if generalized:
        ta = max(0.0, 1 - np.trace(a).real)
        tb = max(0.0, 1 - np.trace(b).real)
        f += float(np.sqrt(ta * tb))
    return min(1.0, max(0.0, f))


def purified_distance(rho, sigma) -> float:
    return float(np.sqrt(max(0.0, 1 - fidelity(rho, sigma, generalized=True) ** 2)))


# ---------------------------------------------------------------------------
# Choi operators and random objects


class ChoiOperator:
    """(ch x id)(Phi+) with the normalized maximally entangled input.

    The output factor comes first, the input reference second.
    """

    __slots__ = ("in_dim", "out_dim", "matrix")

    def __init__(self, in_dim: int, out_dim: int, matrix, *, check: bool = True):
        mat = np.array(matrix, dtype=complex)
        if mat.shape != (in_dim * out_dim, in_dim * out_dim):
            raise DimensionError("Choi matrix has the wrong shape")
        if check and np.linalg.eigvalsh((mat + mat.conj().T) / 2)[0] < -TOL:
            raise ValueError("Choi matrix is not positive semidefinite")
        mat.setflags(write=False)
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.matrix = mat

    def input_marginal(self) -> np.ndarray:
        t = self.matrix.reshape(self.out_dim, self.in_dim, self.out_dim, self.in_dim)
        return np.einsum("aiaj->ij", t)


def choi(ch: KrausChannel) -> ChoiOperator:
    d = ch.in_dim
    vecs = [E.reshape(-1) / np.sqrt(d) for E in ch.operators]
    mat = sum(np.outer(v, v.conj()) for v in vecs)
    return ChoiOperator(d, ch.out_dim, mat)


def random_channel(in_dim: int, out_dim: int, env_dim: int, seed: int) -> KrausChannel:
    """Trace-preserving channel from a seeded Gaussian isometry (QR)."""
    if min(in_dim, out_dim, env_dim) < 1:
        raise DimensionError("dimensions must be positive")
    if out_dim * env_dim < in_dim:
        raise DimensionError("output and environment too small for an isometry")
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(out_dim * env_dim, in_dim)) + 1j * rng.normal(size=(out_dim * env_dim, in_dim))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    v = q.reshape(out_dim, env_dim, in_dim)
    return KrausChannel([v[:, e, :] for e in range(env_dim)])


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


def random_pure(wires: Sequence[str], rng: np.random.Generator) -> QuantumState:
    d = 2 ** len(wires)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return QuantumState(wires, v / np.linalg.norm(v))


def random_density(dim: int, rng: np.random.Generator, *, rank: int | None = None, trace: float = 1.0) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return trace * rho / np.trace(rho).real
