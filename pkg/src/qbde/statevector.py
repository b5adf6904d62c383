"""Dense statevector simulation for small parameterized circuits.

Amplitudes are little-endian: qubit ``q`` is bit ``q`` of the basis index,
so ``|q1 q0>`` = ``|01>`` is index 1.  Only five gate kinds exist (H, RY, RZ,
RZZ, CNOT); RZZ is applied natively as a diagonal phase.

Besides the single-state API (:func:`apply_gate`, :func:`apply_circuit`) the
module exposes :func:`apply_gates_batch`, which pushes a stack of states
through the same gate list at once.  The quantum regressors use it to build
circuit unitaries column-by-column.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import BindingError, CapacityError, QubitIndexError, ShapeError

MAX_QUBITS = 12

GATE_KINDS = ("H", "RY", "RZ", "RZZ", "CNOT")
_ANGLE_KINDS = ("RY", "RZ", "RZZ")
_TWO_QUBIT = ("RZZ", "CNOT")

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        arity = 2 if self.kind in _TWO_QUBIT else 1
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind} acts on {arity} qubit(s), got {self.qubits}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise QubitIndexError(f"{self.kind} needs distinct qubits, got {self.qubits}")
        if self.kind in _ANGLE_KINDS and self.angle is None:
            raise BindingError(f"{self.kind} gate requires an angle")

    def inverse(self) -> "Gate":
        if self.kind in _ANGLE_KINDS:
            return Gate(self.kind, self.qubits, -float(self.angle))
        return self

    def matrix(self) -> np.ndarray:
        """Local unitary; for two-qubit gates the first listed qubit is the
        less significant bit of the 4x4 index (little-endian, like states)."""
        if self.kind == "H":
            return _H.copy()
        if self.kind == "RY":
            c, s = np.cos(self.angle / 2), np.sin(self.angle / 2)
            return np.array([[c, -s], [s, c]], dtype=np.complex128)
        if self.kind == "RZ":
            p = np.exp(-0.5j * self.angle)
            return np.diag([p, np.conj(p)])
        if self.kind == "RZZ":
            p = np.exp(-0.5j * self.angle)
            return np.diag([p, np.conj(p), np.conj(p), p])
        # CNOT, control = qubits[0] (bit 0 of the local index)
        m = np.zeros((4, 4), dtype=np.complex128)
        for idx in range(4):
            out = idx ^ 0b10 if idx & 0b01 else idx
            m[out, idx] = 1.0
        return m


@dataclass(frozen=True)
class Observable:
    """Weighted sum of Z/I Pauli strings; character ``k`` labels qubit ``k``."""

    terms: tuple[tuple[float, str], ...]

    def __post_init__(self):
        terms = tuple((float(c), str(p).upper()) for c, p in self.terms)
        if not terms:
            raise ShapeError("observable needs at least one term")
        widths = {len(p) for _, p in terms}
        if len(widths) != 1:
            raise ShapeError(f"pauli strings have inconsistent lengths {sorted(widths)}")
        for _, p in terms:
            if set(p) - {"I", "Z"}:
                raise ValueError(f"only I/Z labels are supported, got {p!r}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def z(cls, qubit: int, n_qubits: int, coeff: float = 1.0) -> "Observable":
        if not 0 <= qubit < n_qubits:
            raise QubitIndexError(f"qubit {qubit} out of range for {n_qubits} qubits")
        label = ["I"] * n_qubits
        label[qubit] = "Z"
        return cls(((coeff, "".join(label)),))

    @property
    def n_qubits(self) -> int:
        return len(self.terms[0][1])

    @property
    def norm_bound(self) -> float:
        return float(sum(abs(c) for c, _ in self.terms))

    def diagonal(self) -> np.ndarray:
        return _observable_diagonal(self.terms)

    def to_dict(self) -> dict:
        return {"terms": [[c, p] for c, p in self.terms]}

    @classmethod
    def from_dict(cls, d: dict) -> "Observable":
        return cls(tuple((c, p) for c, p in d["terms"]))


@lru_cache(maxsize=256)
def _observable_diagonal(terms: tuple[tuple[float, str], ...]) -> np.ndarray:
    n = len(terms[0][1])
    idx = np.arange(2**n)
    diag = np.zeros(2**n)
    for coeff, label in terms:
        sign = np.ones(2**n)
        for q, ch in enumerate(label):
            if ch == "Z":
                sign *= 1 - 2 * ((idx >> q) & 1)
        diag += coeff * sign
    diag.setflags(write=False)
    return diag


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise ShapeError(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {self.amplitudes.shape}"
            )

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


def _check_capacity(n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise CapacityError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")


def zero_state(n_qubits: int) -> StateVector:
    _check_capacity(n_qubits)
    amps = np.zeros(2**n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def basis_state(n_qubits: int, index: int) -> StateVector:
    _check_capacity(n_qubits)
    amps = np.zeros(2**n_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


# -- batched kernels ---------------------------------------------------------
# States are rows of a (batch, 2**n) complex array.


@lru_cache(maxsize=1024)
def _cnot_permutation(n: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(2**n)
    perm = np.where((idx >> control) & 1, idx ^ (1 << target), idx)
    perm.setflags(write=False)
    return perm


@lru_cache(maxsize=1024)
def _parity_sign(n: int, qa: int, qb: int) -> np.ndarray:
    idx = np.arange(2**n)
    sign = 1 - 2 * (((idx >> qa) ^ (idx >> qb)) & 1)
    sign.setflags(write=False)
    return sign


@lru_cache(maxsize=1024)
def _bit_sign(n: int, q: int) -> np.ndarray:
    idx = np.arange(2**n)
    sign = 1 - 2 * ((idx >> q) & 1)
    sign.setflags(write=False)
    return sign


def _check_qubits(gate: Gate, n: int) -> None:
    for q in gate.qubits:
        if not 0 <= q < n:
            raise QubitIndexError(f"{gate.kind} qubit {q} out of range for {n} qubits")


def _apply_1q(psi: np.ndarray, m: np.ndarray, q: int, n: int) -> np.ndarray:
    b = psi.shape[0]
    view = psi.reshape(b, 2 ** (n - 1 - q), 2, 2**q)
    a0 = view[:, :, 0, :]
    a1 = view[:, :, 1, :]
    out = np.empty_like(view)
    out[:, :, 0, :] = m[0, 0] * a0 + m[0, 1] * a1
    out[:, :, 1, :] = m[1, 0] * a0 + m[1, 1] * a1
    return out.reshape(b, 2**n)


def _apply_one(psi: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    kind = gate.kind
    if kind == "RZ":
        half = 0.5 * gate.angle
        phase = np.exp(-1j * half * _bit_sign(n, gate.qubits[0]))
        return psi * phase
    if kind == "RZZ":
        half = 0.5 * gate.angle
        phase = np.exp(-1j * half * _parity_sign(n, *gate.qubits))
        return psi * phase
    if kind == "CNOT":
        return psi[:, _cnot_permutation(n, *gate.qubits)]
    return _apply_1q(psi, gate.matrix(), gate.qubits[0], n)


def _as_numeric(gate) -> Gate:
    if not isinstance(gate, Gate):
        raise BindingError(f"circuit contains an unbound gate: {gate!r}")
    return gate


def apply_gates_batch(psi: np.ndarray, gates: Iterable[Gate], n_qubits: int) -> np.ndarray:
    """Apply ``gates`` in order to every row of ``psi`` (shape ``(B, 2**n)``)."""
    _check_capacity(n_qubits)
    psi = np.array(psi, dtype=np.complex128, copy=True)
    if psi.ndim != 2 or psi.shape[1] != 2**n_qubits:
        raise ShapeError(f"expected (batch, {2**n_qubits}) array, got {psi.shape}")
    for gate in gates:
        gate = _as_numeric(gate)
        _check_qubits(gate, n_qubits)
        psi = _apply_one(psi, gate, n_qubits)
    return psi


def apply_gate_rows(psi: np.ndarray, kind: str, qubits: tuple[int, ...],
                    angles: np.ndarray, n_qubits: int) -> np.ndarray:
    """Apply one rotation with a different angle on every row of ``psi``."""
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (psi.shape[0],):
        raise ShapeError(f"need one angle per row, got {angles.shape} for {psi.shape[0]} rows")
    for q in qubits:
        if not 0 <= q < n_qubits:
            raise QubitIndexError(f"{kind} qubit {q} out of range for {n_qubits} qubits")
    if kind == "RZ":
        return psi * np.exp(-0.5j * angles[:, None] * _bit_sign(n_qubits, qubits[0])[None, :])
    if kind == "RZZ":
        return psi * np.exp(-0.5j * angles[:, None] * _parity_sign(n_qubits, *qubits)[None, :])
    if kind != "RY":
        raise ValueError(f"{kind} takes no angle")
    q = qubits[0]
    b = psi.shape[0]
    view = psi.reshape(b, 2 ** (n_qubits - 1 - q), 2, 2**q)
    c = np.cos(angles / 2)[:, None, None]
    s = np.sin(angles / 2)[:, None, None]
    a0 = view[:, :, 0, :]
    a1 = view[:, :, 1, :]
    out = np.empty_like(view)
    out[:, :, 0, :] = c * a0 - s * a1
    out[:, :, 1, :] = s * a0 + c * a1
    return out.reshape(b, 2**n_qubits)


def circuit_unitary(gates: Sequence[Gate], n_qubits: int) -> np.ndarray:
    """Dense ``2**n x 2**n`` unitary of a numeric gate list."""
    cols = apply_gates_batch(np.eye(2**n_qubits, dtype=np.complex128), gates, n_qubits)
    # row j of ``cols`` is U|j>, i.e. column j of U
    return cols.T


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    _check_qubits(gate, state.n_qubits)
    out = _apply_one(state.amplitudes[None, :], gate, state.n_qubits)
    return StateVector(state.n_qubits, out[0])


def apply_circuit(state: StateVector, circuit) -> StateVector:
    """Apply a bound circuit (anything with ``n_qubits`` and numeric ``gates``)."""
    if getattr(circuit, "free_parameters", 0):
        raise BindingError("circuit has unbound parameters; call bind() first")
    if circuit.n_qubits != state.n_qubits:
        raise ShapeError(
            f"circuit acts on {circuit.n_qubits} qubits, state has {state.n_qubits}"
        )
    out = apply_gates_batch(state.amplitudes[None, :], circuit.gates, state.n_qubits)
    return StateVector(state.n_qubits, out[0])


def expectation(state: StateVector, obs: Observable) -> float:
    if obs.n_qubits != state.n_qubits:
        raise ShapeError(
            f"observable acts on {obs.n_qubits} qubits, state has {state.n_qubits}"
        )
    probs = np.abs(state.amplitudes) ** 2
    return float(probs @ obs.diagonal())


def expectation_batch(psi: np.ndarray, obs: Observable) -> np.ndarray:
    """Row-wise expectations for a ``(B, 2**n)`` stack of states."""
    if psi.shape[-1] != 2**obs.n_qubits:
        raise ShapeError(f"observable acts on {obs.n_qubits} qubits, states have {psi.shape}")
    probs = psi.real**2 + psi.imag**2
    return probs @ obs.diagonal()


def overlap(a: StateVector, b: StateVector) -> float:
    """Fidelity ``|<a|b>|**2``."""
    if a.n_qubits != b.n_qubits:
        raise ShapeError(f"cannot overlap {a.n_qubits}- and {b.n_qubits}-qubit states")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
