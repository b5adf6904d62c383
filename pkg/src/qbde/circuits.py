"""Symbolic parameterized circuits: ZZ feature map, RealAmplitudes ansatz.

A :class:`ParamCircuit` holds gates whose angles are small expressions over two
parameter tables: ``data`` (the feature vector) and ``train`` (the trainable
vector).  :func:`bind` turns it into a numeric :class:`BoundCircuit` the
simulator can run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BindingError, QubitIndexError, ShapeError
from .statevector import GATE_KINDS, Gate

FEATURE_MAP_CONVENTIONS = ("standard", "literal")
ANSATZ_CONVENTIONS = ("standard", "literal")


# -- angle expressions --------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float

    def evaluate(self, data, train) -> float:
        return self.value

    def shifted(self, data_offset: int, train_offset: int) -> "Const":
        return self

    def refs(self):
        return ()

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Param:
    """``scale * table[index] + offset``."""

    table: str
    index: int
    scale: float = 1.0
    offset: float = 0.0

    def evaluate(self, data, train) -> float:
        vec = data if self.table == "data" else train
        return self.scale * float(vec[self.index]) + self.offset

    def shifted(self, data_offset: int, train_offset: int) -> "Param":
        step = data_offset if self.table == "data" else train_offset
        return Param(self.table, self.index + step, self.scale, self.offset)

    def refs(self):
        return ((self.table, self.index),)

    def __str__(self):
        sym = "x" if self.table == "data" else "t"
        s = f"{sym}[{self.index}]"
        if self.scale != 1.0:
            s = f"{self.scale!r}*{s}"
        if self.offset:
            s = f"{s}+{self.offset!r}"
        return s


@dataclass(frozen=True)
class DataProduct:
    """Pairwise data angle for the ZZ interaction.

    ``standard``: ``2 (pi - x_i)(pi - x_j)``; ``literal``: ``x_i * x_j``.
    """

    i: int
    j: int
    convention: str = "standard"

    def evaluate(self, data, train) -> float:
        xi, xj = float(data[self.i]), float(data[self.j])
        if self.convention == "standard":
            return 2.0 * (math.pi - xi) * (math.pi - xj)
        return xi * xj

    def shifted(self, data_offset: int, train_offset: int) -> "DataProduct":
        return DataProduct(self.i + data_offset, self.j + data_offset, self.convention)

    def refs(self):
        return (("data", self.i), ("data", self.j))

    def __str__(self):
        if self.convention == "standard":
            return f"2*(pi-x[{self.i}])*(pi-x[{self.j}])"
        return f"x[{self.i}]*x[{self.j}]"


@dataclass(frozen=True)
class SymGate:
    kind: str
    qubits: tuple[int, ...]
    angle: Const | Param | DataProduct | None = None

    def bind(self, data, train) -> Gate:
        value = None if self.angle is None else self.angle.evaluate(data, train)
        return Gate(self.kind, self.qubits, value)

    def shifted(self, data_offset: int, train_offset: int) -> "SymGate":
        if self.angle is None:
            return self
        return SymGate(self.kind, self.qubits, self.angle.shifted(data_offset, train_offset))


# -- circuits ----------------------------------------------------------------


@dataclass(frozen=True)
class ParamCircuit:
    n_qubits: int
    gates: tuple[SymGate, ...] = ()
    n_data_params: int = 0
    n_train_params: int = 0
    entanglement: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ShapeError("a circuit needs at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        sizes = {"data": self.n_data_params, "train": self.n_train_params}
        for g in self.gates:
            if g.kind not in GATE_KINDS:
                raise ValueError(f"unknown gate kind {g.kind!r}")
            if len(set(g.qubits)) != len(g.qubits) or any(
                not 0 <= q < self.n_qubits for q in g.qubits
            ):
                raise QubitIndexError(f"bad qubits {g.qubits} for {self.n_qubits}-qubit circuit")
            if g.angle is not None:
                for table, idx in g.angle.refs():
                    if not 0 <= idx < sizes[table]:
                        raise BindingError(f"{table} reference {idx} outside table of {sizes[table]}")

    @classmethod
    def empty(cls, n_qubits: int) -> "ParamCircuit":
        return cls(n_qubits)

    @property
    def free_parameters(self) -> int:
        return self.n_data_params + self.n_train_params

    def __len__(self):
        return len(self.gates)

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)


@dataclass(frozen=True)
class BoundCircuit:
    n_qubits: int
    gates: tuple[Gate, ...] = field(default=())
    free_parameters: int = 0

    def __len__(self):
        return len(self.gates)


def linear_pairs(n_qubits: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, i + 1) for i in range(n_qubits - 1))


def zz_feature_map(n_qubits: int, reps: int, convention: str = "standard") -> ParamCircuit:
    """ZZ feature map with linear entanglement.

    Each repetition places H on every qubit, RZ(2 x_i) on qubit i and
    RZZ(2 (pi - x_i)(pi - x_j)) on every neighbouring pair.  With
    ``convention="literal"`` the H layer is dropped and the angles become
    x_i and x_i x_j.
    """
    if n_qubits < 1 or reps < 1:
        raise ValueError("n_qubits and reps must be >= 1")
    if convention not in FEATURE_MAP_CONVENTIONS:
        raise ValueError(f"unknown feature map convention {convention!r}")
    pairs = linear_pairs(n_qubits)
    rz_scale = 2.0 if convention == "standard" else 1.0
    gates: list[SymGate] = []
    for _ in range(reps):
        if convention == "standard":
            gates.extend(SymGate("H", (q,)) for q in range(n_qubits))
        gates.extend(SymGate("RZ", (q,), Param("data", q, rz_scale)) for q in range(n_qubits))
        gates.extend(SymGate("RZZ", (i, j), DataProduct(i, j, convention)) for i, j in pairs)
    return ParamCircuit(n_qubits, tuple(gates), n_data_params=n_qubits, entanglement=pairs)


def real_amplitudes(n_qubits: int, layers: int, convention: str = "standard") -> ParamCircuit:
    """RealAmplitudes ansatz with linear CNOT entanglement.

    Standard form: an RY column, then per layer a CNOT chain followed by another
    RY column, ``n * (layers + 1)`` parameters.  ``convention="literal"``
    follows the per-layer product of an RY column and trainable RZZ pair
    rotations, ``layers * (n + n - 1)`` parameters.
    """
    if n_qubits < 1 or layers < 1:
        raise ValueError("n_qubits and layers must be >= 1")
    if convention not in ANSATZ_CONVENTIONS:
        raise ValueError(f"unknown ansatz convention {convention!r}")
    pairs = linear_pairs(n_qubits)
    gates: list[SymGate] = []
    k = 0

    def ry_column():
        nonlocal k
        for q in range(n_qubits):
            gates.append(SymGate("RY", (q,), Param("train", k)))
            k += 1

    if convention == "standard":
        ry_column()
        for _ in range(layers):
            gates.extend(SymGate("CNOT", p) for p in pairs)
            ry_column()
    else:
        for _ in range(layers):
            ry_column()
            for p in pairs:
                gates.append(SymGate("RZZ", p, Param("train", k)))
                k += 1
    return ParamCircuit(n_qubits, tuple(gates), n_train_params=k, entanglement=pairs)


def compose(front: ParamCircuit, back: ParamCircuit) -> ParamCircuit:
    """``back`` after ``front``; back's parameter slots follow front's."""
    if front.n_qubits != back.n_qubits:
        raise ShapeError(f"cannot compose {front.n_qubits}- and {back.n_qubits}-qubit circuits")
    shifted = tuple(g.shifted(front.n_data_params, front.n_train_params) for g in back.gates)
    ent = tuple(dict.fromkeys(front.entanglement + back.entanglement))
    return ParamCircuit(
        front.n_qubits,
        front.gates + shifted,
        front.n_data_params + back.n_data_params,
        front.n_train_params + back.n_train_params,
        ent,
    )


def _as_vector(values, expected: int, name: str) -> np.ndarray:
    if values is None:
        values = ()
    vec = np.asarray(values, dtype=float).reshape(-1)
    if vec.shape[0] != expected:
        raise BindingError(f"{name} vector has length {vec.shape[0]}, circuit expects {expected}")
    return vec


def bind(circuit: ParamCircuit, data=None, train=None) -> BoundCircuit:
    x = _as_vector(data, circuit.n_data_params, "data")
    t = _as_vector(train, circuit.n_train_params, "train")
    return BoundCircuit(circuit.n_qubits, tuple(g.bind(x, t) for g in circuit.gates))


def dump(circuit: ParamCircuit | BoundCircuit) -> str:
    """One gate per line: ``GATE q[,q] angle`` (angle omitted for H / CNOT)."""
    lines = []
    for g in circuit.gates:
        qs = ",".join(str(q) for q in g.qubits)
        if g.angle is None:
            lines.append(f"{g.kind} {qs}")
        elif isinstance(g, Gate):
            lines.append(f"{g.kind} {qs} {g.angle!r}")
        else:
            lines.append(f"{g.kind} {qs} {g.angle}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_dump(text: str, n_qubits: int) -> BoundCircuit:
    """Inverse of :func:`dump` for bound circuits."""
    gates = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        try:
            qubits = tuple(int(q) for q in parts[1].split(","))
            angle = float(parts[2]) if len(parts) > 2 else None
            gates.append(Gate(parts[0], qubits, angle))
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: cannot parse {line!r}") from exc
    return BoundCircuit(n_qubits, tuple(gates))


class CircuitBuilder:
    """Incremental construction of a trainable-only :class:`ParamCircuit`."""

    def __init__(self, n_qubits: int):
        self.n_qubits = n_qubits
        self.gates: list[SymGate] = []
        self.n_train = 0

    def new_param(self) -> int:
        self.n_train += 1
        return self.n_train - 1

    def ry(self, q: int, index: int, scale: float = 1.0):
        self.gates.append(SymGate("RY", (q,), Param("train", index, scale)))

    def cnot(self, control: int, target: int):
        self.gates.append(SymGate("CNOT", (control, target)))

    def cry(self, control: int, target: int, index: int):
        """Controlled-RY built from RY and CNOT only."""
        self.ry(target, index, 0.5)
        self.cnot(control, target)
        self.ry(target, index, -0.5)
        self.cnot(control, target)

    def build(self, entanglement: Sequence[tuple[int, int]] = ()) -> ParamCircuit:
        return ParamCircuit(
            self.n_qubits, tuple(self.gates), n_train_params=self.n_train,
            entanglement=tuple(entanglement),
        )
