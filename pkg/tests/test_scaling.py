import numpy as np
import pytest

from qbde.scaling import Scaler, fit_scaler


def test_minmax_endpoints_and_extension():
    s = fit_scaler(np.array([60.0, 100.0]), "minmax", (-1, 1))
    assert s.apply([60.0, 100.0]).tolist() == [-1.0, 1.0]
    assert s.apply(110.0) == pytest.approx(1.5)


def test_round_trip(rng):
    X = rng.normal(size=(50, 4)) * [1, 10, 100, 0.1]
    for kind in ("standardize", "minmax", "identity"):
        s = fit_scaler(X, kind)
        assert np.max(np.abs(s.invert(s.apply(X)) - X)) < 1e-10
        back = Scaler.from_dict(s.to_dict())
        assert np.array_equal(back.apply(X), s.apply(X))


def test_standardize_moments(rng):
    X = rng.normal(3, 2, size=(100, 3))
    Z = fit_scaler(X).apply(X)
    assert np.allclose(Z.mean(0), 0, atol=1e-12) and np.allclose(Z.std(0), 1)


def test_quantum_feature_range(rng):
    X = rng.normal(size=(20, 6))
    Z = fit_scaler(X, "minmax", (0.0, np.pi)).apply(X)
    assert np.allclose(Z.min(0), 0) and np.allclose(Z.max(0), np.pi)


def test_zero_variance_column_passes_through(caplog):
    X = np.column_stack([np.ones(5), np.arange(5.0)])
    s = fit_scaler(X)
    assert np.array_equal(s.apply(X)[:, 0], X[:, 0])
    assert "zero-variance" in caplog.text


def test_constants_frozen(rng):
    X = rng.normal(size=(10, 2))
    s = fit_scaler(X)
    before = s.to_dict()
    s.apply(rng.normal(size=(5, 2)) * 1e6)
    assert s.to_dict() == before


def test_bad_arguments():
    with pytest.raises(ValueError):
        fit_scaler(np.zeros(0))
    with pytest.raises(ValueError):
        fit_scaler(np.ones(3), "minmax", (1, 0))
    with pytest.raises(ValueError):
        fit_scaler(np.ones(3), "robust")
