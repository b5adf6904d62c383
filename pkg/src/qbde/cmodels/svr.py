"""Epsilon-SVR trained by sequential minimal optimization.

The dual is solved in the 2N-variable form used by LIBSVM::

    min_a  1/2 a'Qa + p'a   s.t.  s'a = 0,  0 <= a <= C

with ``a = [alpha; alpha*]``, ``s = [+1; -1]``, ``p = [eps - y; eps + y]`` and
``Q_tu = s_t s_u K(t mod N, u mod N)``.  Each step updates the maximal
violating pair.  The regressor is ``f(x) = sum_i beta_i K(x_i, x) + b`` with
``beta = alpha - alpha*``.

The solver only ever sees a Gram matrix, so the quantum kernel regressor
reuses it unchanged.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError

TAU = 1e-12


@dataclass
class KernelMatrix:
    entries: np.ndarray
    row_inputs: str = ""
    col_inputs: str = ""

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    @property
    def shape(self):
        return self.entries.shape

    @property
    def is_square_gram(self) -> bool:
        return bool(self.row_inputs) and self.row_inputs == self.col_inputs


def fingerprint(X) -> str:
    """Short content hash used to tag which inputs a kernel was built from."""
    arr = np.ascontiguousarray(np.asarray(X, dtype=float))
    return hashlib.sha1(arr.tobytes() + str(arr.shape).encode()).hexdigest()[:16]


def _as_2d(X, name="X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :] if X.size else X.reshape(0, 0)
    if X.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {X.shape}")
    return X


def rbf_kernel(Xa, Xb, gamma: float) -> KernelMatrix:
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    A, B = _as_2d(Xa, "Xa"), _as_2d(Xb, "Xb")
    if A.shape[0] and B.shape[0] and A.shape[1] != B.shape[1]:
        raise ShapeError(f"feature counts differ: {A.shape[1]} vs {B.shape[1]}")
    if A.shape[0] == 0 or B.shape[0] == 0:
        return KernelMatrix(np.zeros((A.shape[0], B.shape[0])), fingerprint(A), fingerprint(B))
    sq = (A**2).sum(1)[:, None] + (B**2).sum(1)[None, :] - 2.0 * A @ B.T
    np.maximum(sq, 0.0, out=sq)
    return KernelMatrix(np.exp(-gamma * sq), fingerprint(A), fingerprint(B))


@dataclass
class SMOResult:
    beta: np.ndarray
    bias: float
    n_iter: int
    kkt_residual: float
    converged: bool
    objective: float
    objective_trace: list[float] = field(default_factory=list)


def dual_objective(K: np.ndarray, y: np.ndarray, beta: np.ndarray, epsilon: float) -> float:
    """Dual value ``-1/2 b'Kb - eps |b|_1 + y'b`` (to be maximized)."""
    return float(-0.5 * beta @ K @ beta - epsilon * np.abs(beta).sum() + y @ beta)


def smo_solve(K, y, C: float, epsilon: float, tol: float = 1e-3,
              max_iter: int | None = None, track_objective: bool = False) -> SMOResult:
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    n = y.shape[0]
    if K.shape != (n, n):
        raise ShapeError(f"Gram matrix must be {n}x{n}, got {K.shape}")
    if not C > 0:
        raise ValueError("C must be positive")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if n < 2:
        raise ValueError("SVR needs at least two training points")
    m = 2 * n
    if max_iter is None:
        # 10^4 passes over the variable set
        max_iter = 10_000 * m
    s = np.concatenate([np.ones(n), -np.ones(n)])
    p = np.concatenate([epsilon - y, epsilon + y])
    base = np.concatenate([np.arange(n), np.arange(n)])
    qd = np.diag(K)[base]
    a = np.zeros(m)
    G = p.copy()
    trace: list[float] = []

    def q_col(t):
        return s * s[t] * K[base, base[t]]

    it = 0
    residual = np.inf
    while True:
        sg = -s * G
        up = ((s > 0) & (a < C)) | ((s < 0) & (a > 0))
        low = ((s < 0) & (a < C)) | ((s > 0) & (a > 0))
        if not up.any() or not low.any():
            residual = 0.0
            break
        i = int(np.argmax(np.where(up, sg, -np.inf)))
        j = int(np.argmin(np.where(low, sg, np.inf)))
        residual = sg[i] - sg[j]
        if residual < tol or it >= max_iter:
            break
        it += 1
        Qi, Qj = q_col(i), q_col(j)
        ai_old, aj_old = a[i], a[j]
        if s[i] != s[j]:
            quad = qd[i] + qd[j] + 2.0 * Qi[j]
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = a[i] - a[j]
            a[i] += delta
            a[j] += delta
            if diff > 0:
                if a[j] < 0:
                    a[j], a[i] = 0.0, diff
            elif a[i] < 0:
                a[i], a[j] = 0.0, -diff
            if diff > 0:
                if a[i] > C:
                    a[i], a[j] = C, C - diff
            elif a[j] > C:
                a[j], a[i] = C, C + diff
        else:
            quad = qd[i] + qd[j] - 2.0 * Qi[j]
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            total = a[i] + a[j]
            a[i] -= delta
            a[j] += delta
            if total > C:
                if a[i] > C:
                    a[i], a[j] = C, total - C
            elif a[j] < 0:
                a[j], a[i] = 0.0, total
            if total > C:
                if a[j] > C:
                    a[j], a[i] = C, total - C
            elif a[i] < 0:
                a[i], a[j] = 0.0, total
        G += Qi * (a[i] - ai_old) + Qj * (a[j] - aj_old)
        if track_objective:
            trace.append(0.5 * float((G + p) @ a))

    # bias from free variables, else the midpoint of the feasible interval
    yg = s * G
    at_upper = a >= C
    at_lower = a <= 0
    free = ~(at_upper | at_lower)
    if free.any():
        rho = float(yg[free].mean())
    else:
        ub_mask = (at_upper & (s < 0)) | (at_lower & (s > 0))
        lb_mask = (at_upper & (s > 0)) | (at_lower & (s < 0))
        ub = yg[ub_mask].min() if ub_mask.any() else np.inf
        lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
        if np.isfinite(ub) and np.isfinite(lb):
            rho = float(0.5 * (ub + lb))
        else:
            rho = float(ub if np.isfinite(ub) else lb)
    beta = a[:n] - a[n:]
    return SMOResult(
        beta=beta,
        bias=-rho,
        n_iter=it,
        kkt_residual=float(residual),
        converged=bool(residual < tol),
        objective=0.5 * float((G + p) @ a),
        objective_trace=trace,
    )


@dataclass
class SVRModel:
    beta: np.ndarray
    bias: float
    kernel: dict
    C: float
    epsilon: float
    support: np.ndarray | None
    kkt_residual: float = 0.0
    n_iter: int = 0
    kind: str = "svr"

    def gram(self, X) -> np.ndarray:
        if self.kernel["type"] == "precomputed":
            K = np.asarray(X, dtype=float)
            if K.ndim != 2 or (K.shape[0] and K.shape[1] != self.beta.shape[0]):
                raise ShapeError(
                    f"precomputed kernel must have {self.beta.shape[0]} columns, got {K.shape}"
                )
            return K
        X = _as_2d(X)
        if X.shape[0] and X.shape[1] != self.support.shape[1]:
            raise ShapeError(f"expected {self.support.shape[1]} features, got {X.shape[1]}")
        return rbf_kernel(X, self.support, self.kernel["gamma"]).entries

    def predict(self, X) -> np.ndarray:
        K = self.gram(X)
        if K.shape[0] == 0:
            return np.zeros(0)
        return K @ self.beta + self.bias

    def to_dict(self) -> dict:
        return {
            "beta": self.beta.tolist(), "bias": self.bias, "kernel": dict(self.kernel),
            "C": self.C, "epsilon": self.epsilon,
            "support": None if self.support is None else self.support.tolist(),
            "kkt_residual": self.kkt_residual, "n_iter": self.n_iter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SVRModel":
        sup = d["support"]
        return cls(
            beta=np.asarray(d["beta"], dtype=float), bias=float(d["bias"]),
            kernel=dict(d["kernel"]), C=float(d["C"]), epsilon=float(d["epsilon"]),
            support=None if sup is None else np.asarray(sup, dtype=float),
            kkt_residual=float(d["kkt_residual"]), n_iter=int(d["n_iter"]),
        )


def svr_fit(X, y, C: float = 10.0, epsilon: float = 0.1, kernel="rbf", gamma: float | None = None,
            tol: float = 1e-3, max_iter: int | None = None) -> SVRModel:
    """Fit an epsilon-SVR.

    With ``kernel="rbf"`` ``X`` holds feature rows and ``gamma`` defaults to
    ``1 / d``.  With ``kernel="precomputed"`` ``X`` is the training Gram
    matrix and predictions need the test-vs-train kernel.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if kernel == "precomputed":
        K = np.asarray(X, dtype=float)
        spec = {"type": "precomputed"}
        support = None
    elif kernel == "rbf":
        Xa = _as_2d(X)
        if Xa.shape[0] != y.shape[0]:
            raise ShapeError(f"{Xa.shape[0]} rows but {y.shape[0]} targets")
        g = 1.0 / Xa.shape[1] if gamma is None else float(gamma)
        K = rbf_kernel(Xa, Xa, g).entries
        spec = {"type": "rbf", "gamma": g}
        support = Xa.copy()
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    res = smo_solve(K, y, C, epsilon, tol=tol, max_iter=max_iter)
    return SVRModel(res.beta, res.bias, spec, float(C), float(epsilon), support,
                    res.kkt_residual, res.n_iter)


def svr_predict(model: SVRModel, X) -> np.ndarray:
    return model.predict(X)


def kkt_residual(K, y, beta, bias, C, epsilon, tol_bound: float = 1e-9) -> float:
    """Largest violation of the epsilon-SVR optimality conditions.

    Independent of the solver internals: for residual ``r_i = y_i - f(x_i)``,
    ``beta_i = 0`` needs ``|r_i| <= eps``; ``0 < beta_i < C`` needs
    ``r_i = eps``; ``beta_i = C`` needs ``r_i >= eps`` (mirrored for negative
    ``beta``).  Also reports the equality-constraint error.
    """
    K = np.asarray(K, dtype=float)
    f = K @ beta + bias
    r = np.asarray(y, dtype=float) - f
    viol = np.zeros_like(r)
    for i, (bi, ri) in enumerate(zip(beta, r)):
        if abs(bi) <= tol_bound:
            viol[i] = max(0.0, abs(ri) - epsilon)
        elif bi >= C - tol_bound:
            viol[i] = max(0.0, epsilon - ri)
        elif bi <= -C + tol_bound:
            viol[i] = max(0.0, ri + epsilon)
        elif bi > 0:
            viol[i] = abs(ri - epsilon)
        else:
            viol[i] = abs(ri + epsilon)
    return float(max(viol.max(initial=0.0), abs(beta.sum())))
