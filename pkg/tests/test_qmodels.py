import math
import warnings
from dataclasses import replace

import numpy as np
import pytest
from oracles import zz_feature_state

from qbde.cmodels import kkt_residual, svr_fit
from qbde.errors import ShapeError
from qbde.qmodels import (
    FittedQRF, FittedVariational, QuantumRegressorConfig, build_stack, condition_gram,
    feature_states, qcnn_architecture, qcnn_fit, qcnn_param_count, qcnn_predict, qnn_fit,
    qnn_predict, qrf_fit, qrf_predict, qrf_tree_seed, qsvr_fit, qsvr_predict, quantum_kernel,
    vqr_fit, vqr_predict,
)
from qbde.scaling import Scaler
from qbde.statevector import Observable

SMALL = QuantumRegressorConfig(n_qubits=3, feature_map_reps=2, ansatz_layers=2,
                               optimizer_budget=60, seed=5)
DEFAULT = QuantumRegressorConfig()
FITS = {"vqr": (vqr_fit, vqr_predict), "qnn": (qnn_fit, qnn_predict),
        "qcnn": (qcnn_fit, qcnn_predict)}


def toy(n, d, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, math.pi, size=(n, d))
    return X, 80 + 20 * np.sin(X).mean(1) + rng.normal(size=n)


@pytest.mark.parametrize("kind", ["vqr", "qnn", "qcnn"])
@pytest.mark.parametrize("config", [SMALL, DEFAULT, replace(SMALL, n_qubits=6)], ids=["small", "default", "6q"])
def test_fast_path_matches_reference(kind, config, rng):
    stack = build_stack(kind, config)
    X = rng.uniform(0, math.pi, size=(4, config.n_qubits))
    theta = rng.uniform(-math.pi, math.pi, stack.n_train)
    fast = stack.states(theta, X)
    for i in range(len(X)):
        ref = stack.reference_state(theta, X[i]).amplitudes
        assert np.max(np.abs(fast[i] - ref)) < 1e-10
    raw = stack.raw(theta, X)
    assert np.all(np.abs(raw) <= 1 + 1e-12)


def test_feature_states_match_dense_oracle(rng):
    cfg = replace(SMALL, n_qubits=3, feature_map_reps=2)
    X = rng.uniform(0, math.pi, size=(3, 3))
    psi = feature_states(X, cfg)
    for i in range(3):
        assert np.max(np.abs(psi[i] - zz_feature_state(X[i], 2))) < 1e-10


def test_parameter_counts():
    assert build_stack("vqr", DEFAULT).n_train == 66
    assert build_stack("qnn", DEFAULT).n_train == 2 * 6 * 6
    assert build_stack("qcnn", DEFAULT).n_train == qcnn_param_count(6, 10) == 34


def test_qcnn_architecture():
    arch = qcnn_architecture(6, 10)
    assert arch.active_trace == (6, 3, 2)
    assert arch.readout_qubit == arch.active_qubits[-1]
    assert arch.n_params == qcnn_param_count(6, 10)
    stack = build_stack("qcnn", DEFAULT)
    label = stack.observable.terms[0][1]
    assert label.index("Z") == arch.readout_qubit
    for n in range(1, 9):
        for layers in (1, 3):
            a = qcnn_architecture(n, layers)
            assert a.n_params == qcnn_param_count(n, layers)
            trace = list(a.active_trace)
            for before, after in zip(trace, trace[1:]):
                assert after == (before + 1) // 2
    # a QCNN readout on a discarded qubit is refused
    with pytest.raises(ValueError):
        build_stack("qcnn", replace(DEFAULT, observable=Observable.z(0, 6)))


def test_qcnn_conv_parameters_shared():
    arch = qcnn_architecture(6, 1)
    conv_gates = [g for g in arch.circuit.gates[:5 * 5]]
    refs = {g.angle.index for g in conv_gates if g.kind == "RY"}
    assert refs == {0, 1, 2, 3}


def test_qcnn_raw_bounded(rng):
    stack = build_stack("qcnn", DEFAULT)
    X = rng.uniform(0, math.pi, size=(20, 6))
    for _ in range(3):
        raw = stack.raw(rng.uniform(-math.pi, math.pi, stack.n_train), X)
        assert np.all(np.abs(raw) <= 1 + 1e-12)


@pytest.mark.parametrize("kind", ["vqr", "qnn", "qcnn"])
def test_single_sample_fit(kind):
    fit, predict = FITS[kind]
    x = np.array([[0.4, 1.3, 2.2, 0.9, 2.8, 1.7]])
    cfg = replace(DEFAULT, optimizer_budget=500, seed=1)
    # identity target scaling keeps the target strictly inside (-1, 1)
    m = fit(x, [0.37], cfg, target_scaler=Scaler.identity())
    assert m.loss_star < 1e-2
    assert abs(predict(m, x)[0] - 0.37) < 0.1
    # original units: an affine target scaler placing 95 kcal/mol at -0.6
    scaler = Scaler("minmax", np.asarray(95.0), np.asarray(0.05), -0.6, 1.0)
    m = fit(x, [95.0], cfg, target_scaler=scaler)
    assert m.loss_star < 1e-2
    assert abs(predict(m, x)[0] - 95.0) < 0.1


@pytest.mark.parametrize("kind", ["vqr", "qnn", "qcnn"])
def test_budget_one_and_determinism(kind):
    fit, predict = FITS[kind]
    X, y = toy(12, 3)
    stack = build_stack(kind, SMALL)
    m1 = fit(X, y, replace(SMALL, optimizer_budget=1))
    theta0 = np.random.default_rng(SMALL.seed).uniform(-math.pi, math.pi, stack.n_train)
    assert np.array_equal(m1.theta_star, theta0)
    a, b = fit(X, y, SMALL), fit(X, y, SMALL)
    assert np.array_equal(a.theta_star, b.theta_star)
    assert np.array_equal(predict(a, X), predict(b, X))
    assert a.loss_star <= a.loss0
    assert len(a.theta_star) == stack.n_train


def test_identity_scaler_keeps_predictions_in_range():
    X, _ = toy(10, 3)
    y = np.random.default_rng(1).uniform(-1, 1, 10)
    m = vqr_fit(X, y, SMALL, target_scaler=Scaler.identity())
    p = vqr_predict(m, toy(30, 3, 2)[0])
    assert np.all(np.abs(p) <= 1 + 1e-12)


def test_target_scaling_and_unclipped_extrapolation():
    X, y = toy(10, 3)
    m = vqr_fit(X, y, SMALL)
    s = m.target_scaler
    assert s.apply(y.min()) == pytest.approx(-1) and s.apply(y.max()) == pytest.approx(1)
    far = y.max() + (y.max() - y.min())
    assert s.apply(far) == pytest.approx(3.0)


def test_shape_errors():
    X, y = toy(5, 4)
    with pytest.raises(ShapeError):
        vqr_fit(X, y, SMALL)
    m = vqr_fit(toy(5, 3)[0], y, SMALL)
    with pytest.raises(ShapeError):
        vqr_predict(m, X)
    with pytest.raises(ShapeError):
        quantum_kernel(X, X, SMALL)


def test_variational_round_trip():
    X, y = toy(8, 3)
    m = qnn_fit(X, y, SMALL)
    back = FittedVariational.from_dict(m.to_dict(), "qnn")
    assert np.array_equal(qnn_predict(back, X), qnn_predict(m, X))


# -- QRF ----------------------------------------------------------------------


@pytest.mark.parametrize("T", [1, 2, 3, 5])
def test_qrf_mean_identity(T):
    X, y = toy(10, 3)
    m = qrf_fit(X, y, replace(SMALL, optimizer_budget=15), n_trees=T)
    Xt = toy(7, 3, 9)[0]
    members = [t.predict(Xt) for t in m.trees]
    assert m.T == T
    assert np.array_equal(qrf_predict(m, Xt), np.vstack(members).mean(axis=0))
    assert np.max(np.abs(qrf_predict(m, Xt) - sum(members) / T)) < 1e-12


def test_qrf_degenerate_equals_vqr():
    X, y = toy(10, 3)
    q = qrf_fit(X, y, SMALL, n_trees=1, bootstrap=False)
    v = vqr_fit(X, y, replace(SMALL, seed=qrf_tree_seed(SMALL.seed, 0)))
    assert np.array_equal(qrf_predict(q, X), vqr_predict(v, X))


def test_qrf_bootstrap_deterministic_and_distinct():
    X, y = toy(10, 3)
    a = qrf_fit(X, y, replace(SMALL, optimizer_budget=10), n_trees=3)
    b = qrf_fit(X, y, replace(SMALL, optimizer_budget=10), n_trees=3)
    assert a.bootstrap_indices == b.bootstrap_indices
    assert np.array_equal(qrf_predict(a, X), qrf_predict(b, X))
    assert len({tuple(i) for i in a.bootstrap_indices}) == 3
    assert all(len(i) == 10 for i in a.bootstrap_indices)


def test_qrf_constant_members_and_empty():
    X, y = toy(10, 3)
    m = qrf_fit(X, y, replace(SMALL, optimizer_budget=5), n_trees=2)
    clone = FittedQRF([m.trees[0], m.trees[0]], m.config)
    assert np.array_equal(qrf_predict(clone, X), m.trees[0].predict(X))
    assert qrf_predict(m, np.zeros((0, 3))).shape == (0,)
    back = FittedQRF.from_dict(m.to_dict())
    assert np.array_equal(qrf_predict(back, X), qrf_predict(m, X))


# -- kernel and QSVR ----------------------------------------------------------


def test_kernel_invariants_full_scale(rng):
    for _ in range(5):
        X = rng.uniform(0, math.pi, size=(20, 6))
        K = quantum_kernel(X, X, DEFAULT).entries
        assert np.max(np.abs(K - K.T)) < 1e-10
        assert np.max(np.abs(np.diag(K) - 1)) < 1e-10
        assert np.linalg.eigvalsh(K).min() >= -1e-8
        assert K.min() >= 0 and K.max() <= 1 + 1e-10


def test_kernel_two_qubit_brute_force():
    cfg = replace(SMALL, n_qubits=2, feature_map_reps=1)
    a, b = np.array([0.3, 1.9]), np.array([2.5, 0.7])
    K = quantum_kernel(np.array([a, b]), np.array([a, b]), cfg).entries
    sa, sb = zz_feature_state(a, 1), zz_feature_state(b, 1)
    dot = sum(np.conj(u) * v for u, v in zip(sa, sb))
    assert K[0, 1] == pytest.approx(abs(dot) ** 2, abs=1e-12)
    assert K[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_kernel_cross_block_matches_gram(rng):
    X = rng.uniform(0, math.pi, size=(6, 3))
    full = quantum_kernel(X, X, SMALL).entries
    cross = quantum_kernel(X[:2], X[2:], SMALL)
    assert np.allclose(cross.entries, full[:2, 2:], atol=1e-12)
    assert not cross.is_square_gram


def test_qsvr_equals_precomputed_svr():
    X, y = toy(15, 3)
    m = qsvr_fit(X, y, SMALL, C=10, epsilon=0.1)
    K = quantum_kernel(X, X, SMALL).entries
    ref = svr_fit(K, m.target_scaler.apply(y), C=10, epsilon=0.1, kernel="precomputed")
    assert np.array_equal(m.svr.beta, ref.beta) and m.svr.bias == ref.bias
    Xt = toy(5, 3, 4)[0]
    Kt = quantum_kernel(Xt, X, SMALL).entries
    assert np.array_equal(qsvr_predict(m, Xt), m.target_scaler.invert(ref.predict(Kt)))
    assert kkt_residual(K, m.target_scaler.apply(y), m.svr.beta, m.svr.bias, 10, 0.1) < 1e-3


def test_qsvr_constant_targets():
    X, _ = toy(8, 3)
    m = qsvr_fit(X, np.full(8, 91.0), SMALL)
    assert np.allclose(qsvr_predict(m, toy(4, 3, 1)[0]), 91.0, atol=0.1)


def test_condition_gram():
    K = np.eye(3)
    assert condition_gram(K) is K
    bad = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.warns(RuntimeWarning):
        fixed = condition_gram(bad)
    assert np.allclose(fixed - bad, 1e-8 * np.eye(2))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        condition_gram(np.array([[1.0, 1.0], [1.0, 1.0 - 1e-9]]))


def test_config_round_trip():
    cfg = replace(SMALL, observable=Observable.z(1, 3))
    assert QuantumRegressorConfig.from_dict(cfg.to_dict()) == cfg
