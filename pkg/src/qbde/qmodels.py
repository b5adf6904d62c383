"""Quantum regressors: VQR, QNN, QCNN, QRF and QSVR.

Every variational model is a stack of circuit blocks applied to ``|0...0>``:
data blocks (the ZZ feature map, bound per sample) and trainable blocks
(bound to a slice of theta, shared by all samples).  Training evaluates the
stack without rebuilding per-sample circuits: the first feature-map block is
simulated once per dataset, later data blocks run row-wise on the whole
batch, and each trainable block is turned into one ``2**n x 2**n`` unitary
per objective call.  :meth:`CircuitStack.reference_state` runs the same
model through the plain ``compose``/``bind``/``apply_circuit`` path and is
what the tests compare against.

All models train on targets mapped onto [-1, 1] (min/max of the training
targets) and predict in the original units.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache

import numpy as np

from .circuits import (
    CircuitBuilder, DataProduct, Param, ParamCircuit, bind, compose, linear_pairs,
    real_amplitudes, zz_feature_map,
)
from .cmodels.svr import KernelMatrix, SVRModel, fingerprint, svr_fit
from .errors import ShapeError
from .optimize import minimize
from .scaling import Scaler, fit_scaler
from .seeding import derive_seed
from .statevector import (
    Gate, Observable, apply_circuit, apply_gate_rows, apply_gates_batch, circuit_unitary,
    expectation, expectation_batch, zero_state,
)

VARIATIONAL_KINDS = ("vqr", "qnn", "qcnn")
QUANTUM_KINDS = ("vqr", "qsvr", "qnn", "qrf", "qcnn")


@dataclass(frozen=True)
class QuantumRegressorConfig:
    n_qubits: int = 6
    feature_map_reps: int = 10
    ansatz_layers: int = 10
    observable: Observable | None = None
    optimizer_budget: int = 1000
    seed: int = 0
    optimizer: str = "cobyla"
    rho_begin: float = 1.0
    rho_end: float = 1e-4
    feature_map_convention: str = "standard"
    ansatz_convention: str = "standard"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["observable"] = None if self.observable is None else self.observable.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "QuantumRegressorConfig":
        d = dict(d)
        if d.get("observable") is not None:
            d["observable"] = Observable.from_dict(d["observable"])
        return cls(**d)


# -- circuit stacks -----------------------------------------------------------


@dataclass(frozen=True)
class CircuitStack:
    n_qubits: int
    blocks: tuple[tuple[str, ParamCircuit], ...]
    observable: Observable

    @property
    def n_train(self) -> int:
        return sum(c.n_train_params for kind, c in self.blocks if kind == "train")

    @property
    def n_data_blocks(self) -> int:
        return sum(1 for kind, _ in self.blocks if kind == "data")

    def full_circuit(self) -> ParamCircuit:
        circ = ParamCircuit.empty(self.n_qubits)
        for _, block in self.blocks:
            circ = compose(circ, block)
        return circ

    def _theta_slices(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_train,):
            raise ShapeError(f"theta has shape {theta.shape}, model needs ({self.n_train},)")
        out, k = [], 0
        for kind, block in self.blocks:
            if kind == "train":
                out.append(theta[k:k + block.n_train_params])
                k += block.n_train_params
            else:
                out.append(None)
        return out

    def _check_X(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1 and X.size == 0:
            X = X.reshape(0, self.n_qubits)
        if X.ndim != 2 or X.shape[1] != self.n_qubits:
            raise ShapeError(f"expected (n, {self.n_qubits}) features, got {X.shape}")
        return X

    def initial_states(self, X) -> np.ndarray:
        """States after the leading data block (or ``|0>`` rows if none)."""
        X = self._check_X(X)
        psi = np.zeros((X.shape[0], 2**self.n_qubits), dtype=np.complex128)
        psi[:, 0] = 1.0
        if self.blocks and self.blocks[0][0] == "data":
            psi = run_data_block(self.blocks[0][1], X, psi)
        return psi

    def states(self, theta, X, psi0=None) -> np.ndarray:
        X = self._check_X(X)
        slices = self._theta_slices(theta)
        psi = self.initial_states(X) if psi0 is None else psi0
        start = 1 if self.blocks and self.blocks[0][0] == "data" else 0
        for (kind, block), t in zip(self.blocks[start:], slices[start:]):
            if kind == "data":
                psi = run_data_block(block, X, psi)
            else:
                U = circuit_unitary(bind(block, None, t).gates, self.n_qubits)
                psi = psi @ U.T
        return psi

    def raw(self, theta, X, psi0=None) -> np.ndarray:
        return expectation_batch(self.states(theta, X, psi0), self.observable)

    def reference_state(self, theta, x):
        """Single-sample state through compose/bind/apply_circuit."""
        circ = self.full_circuit()
        data = np.tile(np.asarray(x, dtype=float), self.n_data_blocks)
        return apply_circuit(zero_state(self.n_qubits), bind(circ, data, theta))

    def reference_raw(self, theta, x) -> float:
        return expectation(self.reference_state(theta, x), self.observable)


def _row_angles(angle, X):
    if isinstance(angle, Param):
        return angle.scale * X[:, angle.index] + angle.offset
    if isinstance(angle, DataProduct):
        xi, xj = X[:, angle.i], X[:, angle.j]
        if angle.convention == "standard":
            return 2.0 * (math.pi - xi) * (math.pi - xj)
        return xi * xj
    return None


def run_data_block(block: ParamCircuit, X, psi) -> np.ndarray:
    """Apply a data-only block with each row bound to its own feature vector."""
    n = block.n_qubits
    for g in block.gates:
        angles = None if g.angle is None else _row_angles(g.angle, X)
        if angles is None:
            value = None if g.angle is None else g.angle.evaluate((), ())
            psi = apply_gates_batch(psi, [Gate(g.kind, g.qubits, value)], n)
        else:
            psi = apply_gate_rows(psi, g.kind, g.qubits, angles, n)
    return psi


def feature_map(config: QuantumRegressorConfig) -> ParamCircuit:
    return zz_feature_map(config.n_qubits, config.feature_map_reps, config.feature_map_convention)


def default_observable(config: QuantumRegressorConfig) -> Observable:
    return config.observable or Observable.z(0, config.n_qubits)


# -- QCNN architecture --------------------------------------------------------


@dataclass(frozen=True)
class QCNNArchitecture:
    circuit: ParamCircuit
    active_trace: tuple[int, ...]
    active_qubits: tuple[int, ...]
    readout_qubit: int
    conv_layers: tuple[tuple[int, ...], ...]
    pool_layers: tuple[tuple[tuple[int, int], ...], ...]
    dense_layers: int

    @property
    def n_params(self) -> int:
        return self.circuit.n_train_params


CONV_PARAMS = 4
POOL_PARAMS = 2


def qcnn_param_count(n_qubits: int, dense_layers: int) -> int:
    """Closed form: 4 per conv layer, 2 per pool layer, m*(L+1) for the dense block."""
    m, stages = n_qubits, 0
    while m > 2:
        stages += 1
        m = (m + 1) // 2
    return stages * (CONV_PARAMS + POOL_PARAMS) + m * (dense_layers + 1)


def qcnn_architecture(n_qubits: int, dense_layers: int) -> QCNNArchitecture:
    """Convolution + pooling stages until two qubits remain, then a dense block.

    Convolution: for each adjacent active pair (a, b) apply RY(t0) a, RY(t1) b,
    CNOT a->b, RY(t2) a, RY(t3) b, with t0..t3 shared across the layer.
    Pooling: active qubits pair up as (discard, keep); a controlled-RY(p0)
    from discard onto keep and RY(p1) on keep, p0/p1 shared across the layer.
    An unpaired last qubit stays active.  Discarded qubits are never touched
    again and the readout is Z on the last active qubit.
    """
    if n_qubits < 1 or dense_layers < 1:
        raise ValueError("n_qubits and dense_layers must be >= 1")
    b = CircuitBuilder(n_qubits)
    active = list(range(n_qubits))
    trace = [len(active)]
    convs, pools = [], []
    while len(active) > 2:
        t = [b.new_param() for _ in range(CONV_PARAMS)]
        for qa, qb in zip(active[:-1], active[1:]):
            b.ry(qa, t[0])
            b.ry(qb, t[1])
            b.cnot(qa, qb)
            b.ry(qa, t[2])
            b.ry(qb, t[3])
        convs.append(tuple(active))
        p = [b.new_param() for _ in range(POOL_PARAMS)]
        pairs, kept = [], []
        for k in range(0, len(active) - 1, 2):
            drop, keep = active[k], active[k + 1]
            b.cry(drop, keep, p[0])
            b.ry(keep, p[1])
            pairs.append((drop, keep))
            kept.append(keep)
        if len(active) % 2:
            kept.append(active[-1])
        pools.append(tuple(pairs))
        active = kept
        trace.append(len(active))
    # dense RealAmplitudes block on the surviving qubits
    t = [b.new_param() for _ in active]
    for q, k in zip(active, t):
        b.ry(q, k)
    for _ in range(dense_layers):
        for qa, qb in zip(active[:-1], active[1:]):
            b.cnot(qa, qb)
        t = [b.new_param() for _ in active]
        for q, k in zip(active, t):
            b.ry(q, k)
    circuit = b.build(entanglement=linear_pairs(n_qubits))
    return QCNNArchitecture(circuit, tuple(trace), tuple(active), active[-1],
                            tuple(convs), tuple(pools), dense_layers)


@lru_cache(maxsize=64)
def build_stack(kind: str, config: QuantumRegressorConfig) -> CircuitStack:
    n = config.n_qubits
    fm = feature_map(config)
    if kind == "vqr":
        ansatz = real_amplitudes(n, config.ansatz_layers, config.ansatz_convention)
        return CircuitStack(n, (("data", fm), ("train", ansatz)), default_observable(config))
    if kind == "qnn":
        half = max(1, math.ceil(config.ansatz_layers / 2))
        a1 = real_amplitudes(n, half, config.ansatz_convention)
        a2 = real_amplitudes(n, half, config.ansatz_convention)
        return CircuitStack(n, (("data", fm), ("train", a1), ("data", fm), ("train", a2)),
                            default_observable(config))
    if kind == "qcnn":
        arch = qcnn_architecture(n, config.ansatz_layers)
        obs = config.observable or Observable.z(arch.readout_qubit, n)
        dead = set(range(n)) - set(arch.active_qubits)
        for _, label in obs.terms:
            if any(label[q] == "Z" for q in dead):
                raise ValueError("QCNN observable must act on active qubits only")
        return CircuitStack(n, (("data", fm), ("train", arch.circuit)), obs)
    raise ValueError(f"unknown variational model kind {kind!r}")


# -- variational models -------------------------------------------------------


@dataclass
class FittedVariational:
    kind: str
    config: QuantumRegressorConfig
    theta_star: np.ndarray
    target_scaler: Scaler
    theta0: np.ndarray
    loss0: float = float("nan")
    loss_star: float = float("nan")
    n_evals: int = 0
    converged: bool = False
    loss_trace: list[float] = field(default_factory=list)

    @property
    def stack(self) -> CircuitStack:
        return build_stack(self.kind, self.config)

    def raw(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.size == 0:
            return np.zeros(0)
        return self.stack.raw(self.theta_star, X)

    def predict(self, X) -> np.ndarray:
        return self.target_scaler.invert(self.raw(X))

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(), "theta_star": self.theta_star.tolist(),
            "theta0": self.theta0.tolist(), "target_scaler": self.target_scaler.to_dict(),
            "loss0": self.loss0, "loss_star": self.loss_star, "n_evals": self.n_evals,
            "converged": self.converged, "loss_trace": list(self.loss_trace),
        }

    @classmethod
    def from_dict(cls, d: dict, kind: str) -> "FittedVariational":
        return cls(
            kind=kind, config=QuantumRegressorConfig.from_dict(d["config"]),
            theta_star=np.asarray(d["theta_star"], dtype=float),
            target_scaler=Scaler.from_dict(d["target_scaler"]),
            theta0=np.asarray(d["theta0"], dtype=float),
            loss0=float(d["loss0"]), loss_star=float(d["loss_star"]),
            n_evals=int(d["n_evals"]), converged=bool(d["converged"]),
            loss_trace=[float(v) for v in d["loss_trace"]],
        )


FittedVQR = FittedVariational


def _fit_variational(kind, X, y, config, target_scaler=None) -> FittedVariational:
    stack = build_stack(kind, config)
    X = stack._check_X(X)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] != y.shape[0]:
        raise ShapeError(f"{X.shape[0]} samples but {y.shape[0]} targets")
    scaler = target_scaler or fit_scaler(y, "minmax", (-1.0, 1.0))
    ys = scaler.apply(y)
    psi0 = stack.initial_states(X)
    rng = np.random.default_rng(config.seed)
    theta0 = rng.uniform(-math.pi, math.pi, size=stack.n_train)

    def loss(theta):
        r = ys - stack.raw(theta, X, psi0)
        return float(r @ r) / r.size

    res = minimize(loss, theta0, budget=config.optimizer_budget, rho_begin=config.rho_begin,
                   rho_end=config.rho_end, method=config.optimizer)
    return FittedVariational(
        kind, config, res.best_params, scaler, theta0,
        loss0=res.trace[0], loss_star=res.best_value, n_evals=res.n_evals,
        converged=res.converged, loss_trace=res.trace,
    )


def vqr_fit(X, y, config=QuantumRegressorConfig(), target_scaler=None) -> FittedVariational:
    """Variational regressor: feature map, one RealAmplitudes block, Z readout."""
    return _fit_variational("vqr", X, y, config, target_scaler)


def vqr_predict(model: FittedVariational, X) -> np.ndarray:
    return model.predict(X)


def qnn_fit(X, y, config=QuantumRegressorConfig(), target_scaler=None) -> FittedVariational:
    """Two ansatz blocks with the feature map re-uploaded between them."""
    return _fit_variational("qnn", X, y, config, target_scaler)


def qnn_predict(model: FittedVariational, X) -> np.ndarray:
    return model.predict(X)


def qcnn_fit(X, y, config=QuantumRegressorConfig(), target_scaler=None) -> FittedVariational:
    return _fit_variational("qcnn", X, y, config, target_scaler)


def qcnn_predict(model: FittedVariational, X) -> np.ndarray:
    return model.predict(X)


# -- quantum random forest ----------------------------------------------------


def qrf_tree_seed(seed: int, t: int) -> int:
    return derive_seed(seed, "qrf-tree", t)


@dataclass
class FittedQRF:
    trees: list[FittedVariational]
    config: QuantumRegressorConfig
    bootstrap_indices: list[list[int]] = field(default_factory=list)
    kind: str = "qrf"

    @property
    def T(self) -> int:
        return len(self.trees)

    def member_predictions(self, X) -> np.ndarray:
        return np.vstack([t.predict(X) for t in self.trees])

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.size == 0:
            return np.zeros(0)
        return self.member_predictions(X).mean(axis=0)

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "trees": [t.to_dict() for t in self.trees],
                "bootstrap_indices": self.bootstrap_indices}

    @classmethod
    def from_dict(cls, d: dict) -> "FittedQRF":
        return cls([FittedVariational.from_dict(t, "vqr") for t in d["trees"]],
                   QuantumRegressorConfig.from_dict(d["config"]),
                   [list(map(int, b)) for b in d["bootstrap_indices"]])


def qrf_fit(X, y, config=QuantumRegressorConfig(), n_trees: int = 10,
            bootstrap: bool = True) -> FittedQRF:
    """Bag of VQRs, each on a size-N bootstrap resample with its own seed."""
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    n = y.shape[0]
    trees, picks = [], []
    for t in range(n_trees):
        tseed = qrf_tree_seed(config.seed, t)
        if bootstrap:
            idx = np.random.default_rng(derive_seed(tseed, "bootstrap")).integers(0, n, size=n)
        else:
            idx = np.arange(n)
        trees.append(vqr_fit(X[idx], y[idx], replace(config, seed=tseed)))
        picks.append(idx.tolist())
    return FittedQRF(trees, config, picks)


def qrf_predict(model: FittedQRF, X) -> np.ndarray:
    return model.predict(X)


# -- quantum kernel SVR -------------------------------------------------------


def feature_states(X, config: QuantumRegressorConfig) -> np.ndarray:
    fm = feature_map(config)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != config.n_qubits:
        raise ShapeError(f"expected (n, {config.n_qubits}) features, got {X.shape}")
    psi = np.zeros((X.shape[0], 2**config.n_qubits), dtype=np.complex128)
    psi[:, 0] = 1.0
    return run_data_block(fm, X, psi)


def quantum_kernel(Xa, Xb, config=QuantumRegressorConfig()) -> KernelMatrix:
    """Fidelity kernel ``|<phi(a)|phi(b)>|**2`` between feature-map states."""
    A = feature_states(Xa, config)
    B = A if Xb is Xa else feature_states(Xb, config)
    amp = A.conj() @ B.T
    K = amp.real**2 + amp.imag**2
    return KernelMatrix(K, fingerprint(Xa), fingerprint(Xb))


@dataclass
class FittedQSVR:
    config: QuantumRegressorConfig
    svr: SVRModel
    train_X: np.ndarray
    target_scaler: Scaler
    kind: str = "qsvr"

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.size == 0:
            return np.zeros(0)
        K = quantum_kernel(X, self.train_X, self.config).entries
        return self.target_scaler.invert(self.svr.predict(K))

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "svr": self.svr.to_dict(),
                "train_X": self.train_X.tolist(), "target_scaler": self.target_scaler.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "FittedQSVR":
        return cls(QuantumRegressorConfig.from_dict(d["config"]), SVRModel.from_dict(d["svr"]),
                   np.asarray(d["train_X"], dtype=float), Scaler.from_dict(d["target_scaler"]))


def condition_gram(K: np.ndarray, threshold: float = -1e-6, jitter: float = 1e-8) -> np.ndarray:
    lam = float(np.linalg.eigvalsh(0.5 * (K + K.T)).min())
    if lam < threshold:
        warnings.warn(f"Gram matrix not PSD (min eigenvalue {lam:.3g}); adding {jitter} to diagonal",
                      RuntimeWarning, stacklevel=2)
        K = K + jitter * np.eye(K.shape[0])
    return K


def qsvr_fit(X, y, config=QuantumRegressorConfig(), C: float = 10.0,
             epsilon: float = 0.1) -> FittedQSVR:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] != y.shape[0]:
        raise ShapeError(f"{X.shape[0]} samples but {y.shape[0]} targets")
    scaler = fit_scaler(y, "minmax", (-1.0, 1.0))
    K = condition_gram(quantum_kernel(X, X, config).entries)
    svr = svr_fit(K, scaler.apply(y), C=C, epsilon=epsilon, kernel="precomputed")
    return FittedQSVR(config, svr, X.copy(), scaler)


def qsvr_predict(model: FittedQSVR, X) -> np.ndarray:
    return model.predict(X)
