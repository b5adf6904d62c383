"""CART regression trees and a bagged random forest.

Splits maximize the weighted variance reduction
``SSE(parent) - SSE(left) - SSE(right)`` over candidate thresholds placed at
midpoints between consecutive distinct values.  Ties go to the lowest
feature index, then the lowest threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError
from ..seeding import rng_for


@dataclass
class RegressionTree:
    # flat node arrays; leaves have feature == -1
    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)
    n_samples: list[int] = field(default_factory=list)
    max_depth: int | None = None
    min_samples_split: int = 2
    n_features: int = 0

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return sum(1 for f in self.feature if f < 0)

    def _add(self, value, n) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(value))
        self.n_samples.append(int(n))
        return len(self.feature) - 1

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.size == 0:
            return np.zeros(0)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ShapeError(f"expected (n, {self.n_features}) features, got {X.shape}")
        node = np.zeros(X.shape[0], dtype=int)
        feat = np.asarray(self.feature)
        thr = np.asarray(self.threshold)
        lft = np.asarray(self.left)
        rgt = np.asarray(self.right)
        active = feat[node] >= 0
        while active.any():
            idx = np.nonzero(active)[0]
            f = feat[node[idx]]
            go_left = X[idx, f] <= thr[node[idx]]
            node[idx] = np.where(go_left, lft[node[idx]], rgt[node[idx]])
            active = feat[node] >= 0
        return np.asarray(self.value)[node]

    def to_dict(self) -> dict:
        return {
            "feature": list(self.feature), "threshold": list(self.threshold),
            "left": list(self.left), "right": list(self.right),
            "value": list(self.value), "n_samples": list(self.n_samples),
            "max_depth": self.max_depth, "min_samples_split": self.min_samples_split,
            "n_features": self.n_features,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionTree":
        return cls(
            feature=[int(v) for v in d["feature"]],
            threshold=[float(v) for v in d["threshold"]],
            left=[int(v) for v in d["left"]], right=[int(v) for v in d["right"]],
            value=[float(v) for v in d["value"]],
            n_samples=[int(v) for v in d["n_samples"]],
            max_depth=d["max_depth"], min_samples_split=int(d["min_samples_split"]),
            n_features=int(d["n_features"]),
        )


def best_split(X, y, features):
    """Best ``(gain, feature, threshold)`` over ``features``; ``None`` if no split."""
    n = y.shape[0]
    total = y.sum()
    sse_parent = float(((y - total / n) ** 2).sum())
    best = None
    for f in sorted(features):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        # split after position k (left = first k+1 samples) where values change
        cut = np.nonzero(xs[1:] > xs[:-1])[0]
        if cut.size == 0:
            continue
        csum = np.cumsum(ys)
        csq = np.cumsum(ys**2)
        nl = cut + 1.0
        nr = n - nl
        sl, sr = csum[cut], total - csum[cut]
        ql, qr = csq[cut], csq[-1] - csq[cut]
        sse = (ql - sl**2 / nl) + (qr - sr**2 / nr)
        gain = sse_parent - sse
        k = int(np.argmax(gain))  # first max -> lowest threshold
        g = float(gain[k])
        if best is None or g > best[0]:
            thr = 0.5 * (xs[cut[k]] + xs[cut[k] + 1])
            best = (g, f, float(thr))
    return best


def fit_tree(X, y, max_depth=None, min_samples_split: int = 2, max_features=None,
             rng: np.random.Generator | None = None) -> RegressionTree:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeError(f"X {X.shape} and y {y.shape} disagree")
    d = X.shape[1]
    m = d if max_features is None else int(max_features)
    if not 1 <= m <= d:
        raise ValueError(f"max_features must be in [1, {d}], got {m}")
    rng = rng or np.random.default_rng(0)
    tree = RegressionTree(max_depth=max_depth, min_samples_split=min_samples_split, n_features=d)

    def grow(idx, depth) -> int:
        ys = y[idx]
        node = tree._add(ys.mean(), idx.size)
        if idx.size < min_samples_split or (max_depth is not None and depth >= max_depth):
            return node
        if np.ptp(ys) == 0.0:
            return node
        feats = np.arange(d) if m == d else rng.choice(d, size=m, replace=False)
        split = best_split(X[idx], ys, feats)
        if (split is None or split[0] <= 0.0) and m < d:
            # like CART implementations, keep looking past the sampled subset
            rest = np.setdiff1d(np.arange(d), feats)
            split = best_split(X[idx], ys, rest)
        if split is None or split[0] <= 0.0:
            return node
        _, f, thr = split
        go_left = X[idx, f] <= thr
        tree.feature[node] = int(f)
        tree.threshold[node] = thr
        tree.left[node] = grow(idx[go_left], depth + 1)
        tree.right[node] = grow(idx[~go_left], depth + 1)
        return node

    grow(np.arange(y.shape[0]), 0)
    return tree


@dataclass
class RandomForestModel:
    trees: list[RegressionTree]
    feature_subsample: int
    kind: str = "rf"

    def member_predictions(self, X) -> np.ndarray:
        return np.vstack([t.predict(X) for t in self.trees])

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.size == 0:
            return np.zeros(0)
        return self.member_predictions(X).mean(axis=0)

    def to_dict(self) -> dict:
        return {"feature_subsample": self.feature_subsample,
                "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "RandomForestModel":
        return cls([RegressionTree.from_dict(t) for t in d["trees"]], int(d["feature_subsample"]))


def rf_fit(X, y, n_trees: int = 100, max_depth=None, min_samples_split: int = 2,
           max_features=None, seed: int = 0, bootstrap: bool = True) -> RandomForestModel:
    """Bagged CART forest.  ``bootstrap=False`` trains every tree on the full set."""
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    d = X.shape[1]
    m = max(1, round(d / 3)) if max_features is None else int(max_features)
    if m > d:
        raise ValueError(f"feature subsample {m} exceeds {d} features")
    n = y.shape[0]
    trees = []
    for t in range(n_trees):
        rng = rng_for(seed, "rf-tree", t)
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(fit_tree(X[idx], y[idx], max_depth, min_samples_split, m, rng))
    return RandomForestModel(trees, m)


def rf_predict(model: RandomForestModel, X) -> np.ndarray:
    return model.predict(X)
