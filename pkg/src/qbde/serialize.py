"""Versioned JSON model files.

A file holds ``{"format": "qbde-model", "version": 1, "kind": ..., "model":
..., "feature_scaler": ..., "meta": ...}``.  Floats are written with
``repr`` precision, so a loaded model reproduces predictions bit for bit.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .cmodels import MLPModel, RandomForestModel, SVRModel
from .errors import ConfigurationError
from .qmodels import FittedQRF, FittedQSVR, FittedVariational
from .scaling import Scaler

FORMAT = "qbde-model"
VERSION = 1
CLASSICAL_KINDS = ("svr", "rf", "mlp")
QUANTUM_KINDS = ("vqr", "qsvr", "qnn", "qrf", "qcnn")
MODEL_KINDS = CLASSICAL_KINDS + QUANTUM_KINDS


def model_to_dict(model) -> dict:
    return model.to_dict()


def model_from_dict(kind: str, d: dict):
    if kind == "svr":
        return SVRModel.from_dict(d)
    if kind == "rf":
        return RandomForestModel.from_dict(d)
    if kind == "mlp":
        return MLPModel.from_dict(d)
    if kind in ("vqr", "qnn", "qcnn"):
        return FittedVariational.from_dict(d, kind)
    if kind == "qrf":
        return FittedQRF.from_dict(d)
    if kind == "qsvr":
        return FittedQSVR.from_dict(d)
    raise ConfigurationError(f"unknown model kind {kind!r}")


@dataclass
class Pipeline:
    """A fitted model plus the feature scaler it was trained behind."""

    kind: str
    model: object
    feature_scaler: Scaler
    meta: dict = field(default_factory=dict)

    def predict(self, X_raw) -> np.ndarray:
        X_raw = np.asarray(X_raw, dtype=float)
        if X_raw.size == 0:
            return np.zeros(0)
        return np.asarray(self.model.predict(self.feature_scaler.apply(X_raw)), dtype=float)

    def to_dict(self) -> dict:
        return {"format": FORMAT, "version": VERSION, "kind": self.kind,
                "model": model_to_dict(self.model),
                "feature_scaler": self.feature_scaler.to_dict(), "meta": self.meta}

    @classmethod
    def from_dict(cls, d: dict) -> "Pipeline":
        if d.get("format") != FORMAT:
            raise ConfigurationError("not a qbde model file")
        if d.get("version") != VERSION:
            raise ConfigurationError(f"unsupported model file version {d.get('version')!r}")
        kind = d["kind"]
        return cls(kind, model_from_dict(kind, d["model"]), Scaler.from_dict(d["feature_scaler"]),
                   d.get("meta", {}))


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the same directory and ``os.replace``."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def save_pipeline(path, pipeline: Pipeline) -> None:
    atomic_write_text(path, dumps(pipeline.to_dict()))


def load_pipeline(path) -> Pipeline:
    with open(path, encoding="utf-8") as fh:
        return Pipeline.from_dict(json.load(fh))
