"""End-to-end benchmark pipeline behind the CLI.

Configuration is a flat JSON object with dotted keys (``"svr.C"``,
``"quantum.optimizer_budget"``); :data:`DEFAULTS` lists every key and its
default, and unknown keys are rejected.  All randomness flows from the
top-level ``seed``:

* sampling    ``derive_seed(seed, "sample")``
* split       ``derive_seed(seed, "split")``
* grid folds  ``derive_seed(seed, "grid", kind)``
* model fit   ``derive_seed(seed, "model", kind)``
"""

from __future__ import annotations

import copy
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cmodels import grid_search, mlp_fit, model_fitter, rf_fit, svr_fit
from .data import Dataset, FilterResult, IngestResult, filter_outliers, ingest_csv, split, stratified_sample
from .errors import ConfigurationError
from .metrics import BinStats, MetricsReport, binned_profile, boxplot_stats, compute_metrics
from .qmodels import QuantumRegressorConfig, qcnn_fit, qnn_fit, qrf_fit, qsvr_fit, vqr_fit
from .scaling import fit_scaler
from .seeding import derive_seed
from .serialize import CLASSICAL_KINDS, MODEL_KINDS, Pipeline

log = logging.getLogger(__name__)

DEFAULTS: dict = {
    "seed": 0,
    "models": list(MODEL_KINDS),
    "data.path": None,
    "data.column_map": {"smiles": "molecule", "bond_index": "bond_index",
                        "bond_type": "bond_type", "bde": "bde"},
    "data.dedupe": False,
    "filter.method": "iqr",
    "filter.k": 3.0,
    "filter.t": 3.0,
    "sample.n_total": 400,
    "sample.min_per_class": 20,
    "split.test_fraction": 0.2,
    "grid.k_folds": 5,
    "svr.C": 10.0,
    "svr.epsilon": 0.1,
    "svr.gamma": None,
    "svr.grid": {"C": [1.0, 10.0, 100.0], "epsilon": [0.1, 1.0], "gamma": [0.05, 0.2, 1.0]},
    "rf.n_trees": 100,
    "rf.max_depth": None,
    "rf.min_samples_split": 2,
    "rf.max_features": None,
    "rf.grid": {"max_depth": [3, 5, 8], "min_samples_split": [2, 10]},
    "mlp.hidden": [64],
    "mlp.activation": "relu",
    "mlp.l2": 1e-4,
    "mlp.learning_rate": 1e-3,
    "mlp.epochs": 200,
    "mlp.batch_size": 32,
    "mlp.grid": {"l2": [1e-4, 1e-1], "learning_rate": [1e-3, 3e-3]},
    "quantum.n_qubits": 6,
    "quantum.feature_map_reps": 10,
    "quantum.ansatz_layers": 10,
    "quantum.optimizer_budget": 1000,
    "quantum.optimizer": "cobyla",
    "quantum.rho_begin": 1.0,
    "quantum.rho_end": 1e-4,
    "quantum.feature_map_convention": "standard",
    "quantum.ansatz_convention": "standard",
    "qsvr.C": 10.0,
    "qsvr.epsilon": 0.1,
    "qrf.n_trees": 10,
    "qrf.bootstrap": True,
    "report.abs_thresholds": [5.0, 10.0],
    "report.rel_thresholds": [5.0, 10.0],
    "report.bin_edges": [float(e) for e in range(40, 131, 10)],
}

QUANTUM_FEATURE_RANGE = (0.0, math.pi)


def resolve_config(user: dict | None = None, **overrides) -> dict:
    """Defaults overlaid with ``user`` then ``overrides``; unknown keys rejected."""
    cfg = copy.deepcopy(DEFAULTS)
    for source in (user or {}, overrides):
        for key, value in source.items():
            if key not in DEFAULTS:
                raise ConfigurationError(f"unknown config key {key!r}")
            if value is None and key != "data.path":
                continue
            cfg[key] = value
    unknown = [m for m in cfg["models"] if m not in MODEL_KINDS]
    if unknown:
        raise ConfigurationError(f"unknown model kind(s) {unknown}; choose from {list(MODEL_KINDS)}")
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise ConfigurationError("seed must be a non-negative integer")
    return cfg


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            user = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(user, dict):
        raise ConfigurationError("config must be a JSON object")
    return user


def quantum_config(cfg: dict, seed: int) -> QuantumRegressorConfig:
    return QuantumRegressorConfig(
        n_qubits=cfg["quantum.n_qubits"], feature_map_reps=cfg["quantum.feature_map_reps"],
        ansatz_layers=cfg["quantum.ansatz_layers"], optimizer_budget=cfg["quantum.optimizer_budget"],
        seed=seed, optimizer=cfg["quantum.optimizer"], rho_begin=cfg["quantum.rho_begin"],
        rho_end=cfg["quantum.rho_end"], feature_map_convention=cfg["quantum.feature_map_convention"],
        ansatz_convention=cfg["quantum.ansatz_convention"],
    )


# -- data preparation ---------------------------------------------------------


@dataclass
class Prepared:
    train: Dataset
    test: Dataset
    ingest: IngestResult
    filtered: FilterResult
    manifest: dict = field(default_factory=dict)


def prepare(cfg: dict) -> Prepared:
    if not cfg["data.path"]:
        raise ConfigurationError("data.path is not set")
    seed = cfg["seed"]
    ing = ingest_csv(cfg["data.path"], cfg["data.column_map"], dedupe=cfg["data.dedupe"])
    filt = filter_outliers(ing.records, cfg["filter.method"], k=cfg["filter.k"], t=cfg["filter.t"])
    n_total = cfg["sample.n_total"]
    if n_total is None or n_total >= len(filt.kept):
        sample = list(filt.kept)
    else:
        sample = stratified_sample(filt.kept, n_total, cfg["sample.min_per_class"],
                                   derive_seed(seed, "sample"))
    ds = Dataset.from_records(sample, {"source": ing.source})
    train, test = split(ds, cfg["split.test_fraction"], derive_seed(seed, "split"))
    allocation: dict[str, int] = {}
    for c in ds.classes:
        allocation[c] = allocation.get(c, 0) + 1
    manifest = {
        "source": ing.source, "seed": seed, "rows": ing.n_rows, "kept": len(ing.records),
        "rejected": len(ing.rejections), "rejection_reasons": ing.reason_counts(),
        "rejections": [{"row": r.row, "id": r.record_id, "reason": r.reason, "message": r.message}
                       for r in ing.rejections],
        "filter": filt.log, "sample_size": len(sample),
        "class_allocation": dict(sorted(allocation.items())),
        "n_train": len(train), "n_test": len(test),
        "scaling": {"quantum_features": "minmax to [0, pi]", "classical_features": "standardize",
                    "targets": "minmax to [-1, 1] inside each quantum model"},
    }
    return Prepared(train, test, ing, filt, manifest)


# -- model fitting ------------------------------------------------------------


def _grid(cfg: dict, kind: str, fixed: dict, Xs, y, seed: int) -> dict:
    grid = cfg[f"{kind}.grid"]
    if not grid:
        return {}
    res = grid_search(model_fitter(kind, fixed), grid, Xs, y, cfg["grid.k_folds"],
                      derive_seed(seed, "grid", kind))
    log.info("%s grid search picked %s (cv mse %.4g)", kind, res.best_params, res.best_score)
    return res.best_params


def fit_model(kind: str, train: Dataset, cfg: dict) -> Pipeline:
    if kind not in MODEL_KINDS:
        raise ConfigurationError(f"unknown model kind {kind!r}")
    seed = derive_seed(cfg["seed"], "model", kind)
    X, y = train.features, train.targets
    if kind in CLASSICAL_KINDS:
        scaler = fit_scaler(X, "standardize")
        Xs = scaler.apply(X)
        if kind == "svr":
            fixed = {"C": cfg["svr.C"], "epsilon": cfg["svr.epsilon"], "gamma": cfg["svr.gamma"]}
        elif kind == "rf":
            fixed = {"n_trees": cfg["rf.n_trees"], "max_depth": cfg["rf.max_depth"],
                     "min_samples_split": cfg["rf.min_samples_split"],
                     "max_features": cfg["rf.max_features"], "seed": seed}
        else:
            fixed = {"hidden": tuple(cfg["mlp.hidden"]), "activation": cfg["mlp.activation"],
                     "l2": cfg["mlp.l2"], "learning_rate": cfg["mlp.learning_rate"],
                     "epochs": cfg["mlp.epochs"], "batch_size": cfg["mlp.batch_size"], "seed": seed}
        best = _grid(cfg, kind, fixed, Xs, y, cfg["seed"])
        params = {**fixed, **best}
        fit = {"svr": svr_fit, "rf": rf_fit, "mlp": mlp_fit}[kind]
        model = fit(Xs, y, **params)
        meta = {"params": _jsonable(params), "grid_best": _jsonable(best)}
    else:
        scaler = fit_scaler(X, "minmax", QUANTUM_FEATURE_RANGE)
        Xs = scaler.apply(X)
        qcfg = quantum_config(cfg, seed)
        if kind == "vqr":
            model = vqr_fit(Xs, y, qcfg)
        elif kind == "qnn":
            model = qnn_fit(Xs, y, qcfg)
        elif kind == "qcnn":
            model = qcnn_fit(Xs, y, qcfg)
        elif kind == "qrf":
            model = qrf_fit(Xs, y, qcfg, n_trees=cfg["qrf.n_trees"], bootstrap=cfg["qrf.bootstrap"])
        else:
            model = qsvr_fit(Xs, y, qcfg, C=cfg["qsvr.C"], epsilon=cfg["qsvr.epsilon"])
        meta = {"quantum_config": qcfg.to_dict()}
        if hasattr(model, "loss_star"):
            meta.update(loss0=model.loss0, loss_star=model.loss_star, n_evals=model.n_evals,
                        converged=model.converged)
    meta["n_train"] = len(train)
    return Pipeline(kind, model, scaler, meta)


def _jsonable(d: dict) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}


# -- evaluation ---------------------------------------------------------------


@dataclass
class Evaluation:
    kind: str
    report: MetricsReport
    profile: list[BinStats]
    predictions: np.ndarray
    actual: np.ndarray
    boxplot: dict


def evaluate(pipeline: Pipeline, test: Dataset, cfg: dict) -> Evaluation:
    y = test.targets
    p = pipeline.predict(test.features)
    if not np.isfinite(p).all():
        raise FloatingPointError(f"{pipeline.kind} produced non-finite predictions")
    report = compute_metrics(y, p, cfg["report.abs_thresholds"], cfg["report.rel_thresholds"])
    profile = binned_profile(y, p, cfg["report.bin_edges"])
    box = boxplot_stats(np.abs(p - y))
    return Evaluation(pipeline.kind, report, profile, p, y,
                      {"q1": box.q1, "median": box.median, "q3": box.q3, "iqr": box.iqr,
                       "whisker_low": box.whisker_low, "whisker_high": box.whisker_high,
                       "n_outliers": box.n_outliers, "outliers": box.outliers})


def _fit_and_evaluate(args):
    kind, train, test, cfg = args
    pipe = fit_model(kind, train, cfg)
    return pipe, evaluate(pipe, test, cfg)


def compare(cfg: dict, prepared: Prepared | None = None, jobs: int = 1):
    """Fit and evaluate every model in ``cfg["models"]`` on the same split."""
    prepared = prepared or prepare(cfg)
    tasks = [(kind, prepared.train, prepared.test, cfg) for kind in cfg["models"]]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_fit_and_evaluate, tasks))
    else:
        results = [_fit_and_evaluate(t) for t in tasks]
    return prepared, results


TABLE_COLUMNS = ("model", "n_test", "mse", "rmse", "mae", "r2")


def table_header(cfg: dict) -> list[str]:
    abs_cols = [f"within_abs_{t:g}" for t in cfg["report.abs_thresholds"]]
    rel_cols = [f"within_rel_{t:g}pct" for t in cfg["report.rel_thresholds"]]
    return list(TABLE_COLUMNS) + abs_cols + rel_cols


def table_row(ev: Evaluation) -> list[str]:
    r = ev.report
    cells = [ev.kind, str(r.n)] + [f"{v:.6f}" for v in (r.mse, r.rmse, r.mae, r.r2)]
    cells += [f"{v:.2f}" for v in r.pct_within_abs.values()]
    cells += [f"{v:.2f}" for v in r.pct_within_rel.values()]
    return cells
