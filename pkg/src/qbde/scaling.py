"""Per-column affine scalers with exact inverses.

Constants are frozen at fit time, so applying a scaler to test data never
changes it.  Test values outside the training range are extrapolated, not
clipped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

KINDS = ("standardize", "minmax", "identity")


@dataclass(frozen=True)
class Scaler:
    """``forward(v) = (v - shift) * factor + lo`` column-wise."""

    kind: str
    shift: np.ndarray
    factor: np.ndarray
    lo: float = 0.0
    hi: float = 1.0

    @property
    def vector(self) -> bool:
        return self.shift.ndim == 1

    def apply(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        return (v - self.shift) * self.factor + self.lo

    def invert(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        return (v - self.lo) / self.factor + self.shift

    def to_dict(self) -> dict:
        return {"kind": self.kind, "shift": np.asarray(self.shift).tolist(),
                "factor": np.asarray(self.factor).tolist(), "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_dict(cls, d: dict) -> "Scaler":
        return cls(d["kind"], np.asarray(d["shift"], dtype=float),
                   np.asarray(d["factor"], dtype=float), float(d["lo"]), float(d["hi"]))

    @classmethod
    def identity(cls, width: int | None = None) -> "Scaler":
        if width is None:
            return cls("identity", np.asarray(0.0), np.asarray(1.0), 0.0, 0.0)
        return cls("identity", np.zeros(width), np.ones(width), 0.0, 0.0)


def fit_scaler(values, kind: str = "standardize", feature_range=(-1.0, 1.0)) -> Scaler:
    """Fit on training data.  1-D input gives a scalar scaler (targets)."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("cannot fit a scaler on empty data")
    if kind == "identity":
        return Scaler.identity(None if v.ndim == 1 else v.shape[1])
    if kind == "standardize":
        mean = v.mean(axis=0)
        sd = v.std(axis=0)
        zero = np.atleast_1d(sd == 0)
        if zero.any():
            log.warning("zero-variance column(s) %s passed through unscaled",
                        np.nonzero(zero)[0].tolist())
        mean = np.where(sd == 0, 0.0, mean)
        factor = np.where(sd == 0, 1.0, 1.0 / np.where(sd == 0, 1.0, sd))
        return Scaler("standardize", np.asarray(mean), np.asarray(factor), 0.0, 0.0)
    if kind == "minmax":
        lo, hi = (float(b) for b in feature_range)
        if not hi > lo:
            raise ValueError("feature_range must be increasing")
        vmin = v.min(axis=0)
        span = v.max(axis=0) - vmin
        zero = np.atleast_1d(span == 0)
        if zero.any():
            log.warning("constant column(s) %s mapped by offset only",
                        np.nonzero(zero)[0].tolist())
        factor = np.where(span == 0, 1.0, (hi - lo) / np.where(span == 0, 1.0, span))
        return Scaler("minmax", np.asarray(vmin), np.asarray(factor), lo, hi)
    raise ValueError(f"unknown scaler kind {kind!r}; choose from {KINDS}")
