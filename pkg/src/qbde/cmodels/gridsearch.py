"""Exhaustive grid search with k-fold cross-validation.

Folds are stratified by target quantile: samples are sorted by target (ties
broken by a seeded shuffle), cut into consecutive blocks of ``k``, and each
block deals one sample to every fold in a seeded random order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ConfigurationError
from ..seeding import rng_for


def quantile_folds(y, k_folds: int, seed: int) -> np.ndarray:
    """Fold label (0..k-1) for every sample."""
    y = np.asarray(y, dtype=float).reshape(-1)
    n = y.shape[0]
    if k_folds < 2:
        raise ConfigurationError("k_folds must be >= 2")
    if k_folds > n:
        raise ConfigurationError(f"k_folds={k_folds} exceeds the {n} available samples")
    if n - int(np.ceil(n / k_folds)) < 2:
        raise ConfigurationError("every training fold needs at least 2 samples")
    rng = rng_for(seed, "folds")
    shuffled = rng.permutation(n)
    order = shuffled[np.argsort(y[shuffled], kind="stable")]
    folds = np.empty(n, dtype=int)
    for start in range(0, n, k_folds):
        block = order[start:start + k_folds]
        folds[block] = rng.permutation(k_folds)[: block.size]
    return folds


def expand_grid(param_grid: dict) -> list[dict]:
    keys = list(param_grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(param_grid[k] for k in keys))]


@dataclass
class GridSearchResult:
    best_params: dict
    best_score: float
    table: list[dict]


def grid_search(fit_predict: Callable, param_grid: dict, X, y, k_folds: int = 5,
                seed: int = 0) -> GridSearchResult:
    """Cross-validated search; lowest mean validation MSE wins, first in grid on ties.

    ``fit_predict(params, X_train, y_train, X_valid)`` returns predictions for
    ``X_valid``; :func:`model_fitter` builds one for the standard model kinds.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    folds = quantile_folds(y, k_folds, seed)
    grid = expand_grid(param_grid)
    if not grid:
        raise ConfigurationError("empty parameter grid")
    table = []
    best = None
    for params in grid:
        scores = []
        for f in range(k_folds):
            va = folds == f
            pred = fit_predict(params, X[~va], y[~va], X[va])
            scores.append(float(np.mean((pred - y[va]) ** 2)))
        mean = float(np.mean(scores))
        table.append({"params": params, "mean_mse": mean, "fold_mse": scores})
        if best is None or mean < best[1]:
            best = (params, mean)
    return GridSearchResult(best[0], best[1], table)


def model_fitter(model_kind: str, fixed: dict | None = None) -> Callable:
    """``fit_predict`` callable for ``svr``, ``rf`` or ``mlp``."""
    from .forest import rf_fit
    from .mlp import mlp_fit
    from .svr import svr_fit

    fixed = dict(fixed or {})

    def run(params, Xtr, ytr, Xva):
        kw = {**fixed, **params}
        if model_kind == "svr":
            model = svr_fit(Xtr, ytr, **kw)
        elif model_kind == "rf":
            model = rf_fit(Xtr, ytr, **kw)
        elif model_kind == "mlp":
            model = mlp_fit(Xtr, ytr, **kw)
        else:
            raise ConfigurationError(f"no grid search for model kind {model_kind!r}")
        return model.predict(Xva)

    return run
