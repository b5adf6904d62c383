"""Evaluation metrics: error summaries, threshold accuracies, binned profiles.

Threshold percentages count ``|e| <= t`` (inclusive).  Relative errors use
``|actual|`` as denominator; samples with ``actual == 0`` are left out of
the relative percentages and counted in ``n_zero_actual``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ShapeError, UndefinedMetricError

DEFAULT_ABS = (5.0, 10.0)
DEFAULT_REL = (5.0, 10.0)
DEFAULT_EDGES = tuple(float(e) for e in range(40, 131, 10))
SQ_ERROR_CAP = 1000.0


@dataclass
class MetricsReport:
    n: int
    mse: float
    rmse: float
    mae: float
    r2: float | None
    pct_within_abs: dict[float, float] = field(default_factory=dict)
    pct_within_rel: dict[float, float] = field(default_factory=dict)
    n_zero_actual: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pct_within_abs"] = {_key(t): v for t, v in self.pct_within_abs.items()}
        d["pct_within_rel"] = {_key(t): v for t, v in self.pct_within_rel.items()}
        return d


def _key(t: float) -> str:
    return f"{t:g}"


def _pair(y, p):
    y = np.asarray(y, dtype=float).reshape(-1)
    p = np.asarray(p, dtype=float).reshape(-1)
    if y.shape != p.shape:
        raise ShapeError(f"{y.size} actual values but {p.size} predictions")
    if y.size == 0:
        raise ShapeError("metrics need at least one sample")
    return y, p


def r2_score(y, p) -> float:
    y, p = _pair(y, p)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise UndefinedMetricError("R^2 is undefined when all actual values are identical")
    return 1.0 - float(((y - p) ** 2).sum()) / ss_tot


def compute_metrics(y, p, abs_thresholds=DEFAULT_ABS, rel_thresholds=DEFAULT_REL,
                    with_r2: bool = True) -> MetricsReport:
    y, p = _pair(y, p)
    e = np.abs(p - y)
    n = y.size
    mse = float(np.mean(e**2))
    pct_abs = {float(t): 100.0 * np.count_nonzero(e <= t) / n for t in abs_thresholds}
    nz = y != 0
    n_zero = int(n - np.count_nonzero(nz))
    pct_rel = {}
    if rel_thresholds:
        m = int(np.count_nonzero(nz))
        rel = e[nz] / np.abs(y[nz])
        for t in rel_thresholds:
            pct_rel[float(t)] = 100.0 * np.count_nonzero(rel <= t / 100.0) / m if m else float("nan")
    return MetricsReport(
        n=n, mse=mse, rmse=math.sqrt(mse), mae=float(e.mean()),
        r2=r2_score(y, p) if with_r2 else None,
        pct_within_abs=pct_abs, pct_within_rel=pct_rel, n_zero_actual=n_zero,
    )


# -- binned profile -----------------------------------------------------------


@dataclass
class BinStats:
    label: str
    lower: float
    upper: float
    n: int
    mae: float | None
    mse: float | None
    mse_capped: float | None
    mean_rel_error: float | None
    median_rel_error: float | None


def bin_labels(edges) -> list[str]:
    edges = list(edges)
    labels = [f"<{edges[0]:g}"]
    labels += [f"{a:g}-{b:g}" for a, b in zip(edges[:-1], edges[1:])]
    labels.append(f">={edges[-1]:g}")
    return labels


def assign_bins(y, edges=DEFAULT_EDGES) -> np.ndarray:
    """Bin index for each actual value; bin 0 is below the first edge, the last bin open above."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 1 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be strictly increasing")
    return np.searchsorted(edges, np.asarray(y, dtype=float), side="right")


def binned_profile(y, p, edges=DEFAULT_EDGES) -> list[BinStats]:
    """Per-bin error summaries over actual value, with open-ended extreme bins.

    Empty bins are reported with ``None`` statistics.
    """
    y, p = _pair(y, p)
    edges = [float(e) for e in edges]
    which = assign_bins(y, edges)
    bounds = [-math.inf] + edges + [math.inf]
    out = []
    for b, label in enumerate(bin_labels(edges)):
        mask = which == b
        k = int(mask.sum())
        if k == 0:
            out.append(BinStats(label, bounds[b], bounds[b + 1], 0, None, None, None, None, None))
            continue
        e = np.abs(p[mask] - y[mask])
        sq = e**2
        nz = y[mask] != 0
        rel = e[nz] / np.abs(y[mask][nz])
        out.append(BinStats(
            label, bounds[b], bounds[b + 1], k, float(e.mean()), float(sq.mean()),
            float(np.minimum(sq, SQ_ERROR_CAP).mean()),
            float(rel.mean()) if rel.size else None, float(np.median(rel)) if rel.size else None,
        ))
    return out


# -- distribution summary -----------------------------------------------------


@dataclass
class BoxplotStats:
    q1: float
    median: float
    q3: float
    iqr: float
    whisker_low: float
    whisker_high: float
    outliers: list[float]

    @property
    def n_outliers(self) -> int:
        return len(self.outliers)


def boxplot_stats(errors) -> BoxplotStats:
    """Quartiles (linear interpolation), whiskers at the furthest data within 1.5 IQR."""
    v = np.sort(np.asarray(errors, dtype=float).reshape(-1))
    if v.size == 0:
        raise ShapeError("boxplot of an empty sample")
    q1, med, q3 = (float(q) for q in np.percentile(v, [25, 50, 75]))
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    outliers = [float(x) for x in v if x < lo_fence or x > hi_fence]
    return BoxplotStats(q1, med, q3, iqr, float(inside.min()), float(inside.max()), outliers)


def write_per_sample_csv(path, y, p, edges=DEFAULT_EDGES) -> None:
    y, p = _pair(y, p)
    labels = bin_labels(edges)
    which = assign_bins(y, edges)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["actual", "predicted", "abs_err", "sq_err", "rel_err", "bin"])
        for yi, pi, b in zip(y, p, which):
            e = abs(pi - yi)
            rel = repr(float(e / abs(yi))) if yi != 0 else ""
            w.writerow([repr(float(yi)), repr(float(pi)), repr(float(e)), repr(float(e * e)), rel,
                        labels[b]])
