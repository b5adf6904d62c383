"""Independent reference implementations used only by the tests.

Nothing here imports the code under test's numerics: circuits are rebuilt as
dense Kronecker products, the SVR dual is solved by projected gradient
ascent, tree splits are found by brute force, and gradients by central
differences.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)


def _ry(t):
    return np.array([[math.cos(t / 2), -math.sin(t / 2)], [math.sin(t / 2), math.cos(t / 2)]], dtype=complex)


def _rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def embed(ops: dict[int, np.ndarray], n: int) -> np.ndarray:
    """Kronecker product with qubit n-1 leftmost (little-endian indexing)."""
    out = np.eye(1, dtype=complex)
    for q in range(n - 1, -1, -1):
        out = np.kron(out, ops.get(q, I2))
    return out


def dense_gate(kind: str, qubits, angle, n: int) -> np.ndarray:
    if kind == "H":
        return embed({qubits[0]: H}, n)
    if kind == "RY":
        return embed({qubits[0]: _ry(angle)}, n)
    if kind == "RZ":
        return embed({qubits[0]: _rz(angle)}, n)
    if kind == "RZZ":
        zz = embed({qubits[0]: Z, qubits[1]: Z}, n)
        return np.cos(angle / 2) * np.eye(2**n) - 1j * np.sin(angle / 2) * zz
    if kind == "CNOT":
        c, t = qubits
        return embed({c: P0}, n) + embed({c: P1, t: X}, n)
    raise ValueError(kind)


def dense_circuit_state(gates, n: int) -> np.ndarray:
    """``gates`` as (kind, qubits, angle) triples applied to |0...0>."""
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    for kind, qubits, angle in gates:
        psi = dense_gate(kind, qubits, angle, n) @ psi
    return psi


def z_expectation(psi: np.ndarray, qubit: int, n: int) -> float:
    return float(np.real(np.conj(psi) @ embed({qubit: Z}, n) @ psi))


def zz_feature_state(x, reps: int) -> np.ndarray:
    """Standard ZZ feature map state written out gate by gate."""
    n = len(x)
    gates = []
    for _ in range(reps):
        gates += [("H", (q,), None) for q in range(n)]
        gates += [("RZ", (q,), 2 * x[q]) for q in range(n)]
        gates += [("RZZ", (i, i + 1), 2 * (math.pi - x[i]) * (math.pi - x[i + 1])) for i in range(n - 1)]
    return dense_circuit_state(gates, n)


# -- SVR dual -----------------------------------------------------------------


def svr_dual_value(K, y, beta, eps) -> float:
    """Dual objective (to maximize) in beta = alpha - alpha*."""
    return float(-0.5 * beta @ K @ beta - eps * np.abs(beta).sum() + y @ beta)


def _project(beta, C):
    """Euclidean projection onto {sum beta = 0, |beta_i| <= C} by bisection on the shift."""
    lo, hi = beta.min() - C, beta.max() + C
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        if np.clip(beta - mu, -C, C).sum() > 0:
            lo = mu
        else:
            hi = mu
    return np.clip(beta - 0.5 * (lo + hi), -C, C)


def svr_dual_projected_gradient(K, y, C, eps, iters=50000, tol=1e-11):
    """Solve the epsilon-SVR dual by accelerated projected gradient ascent.

    Works in the split form (a, s) with beta = a - s so the objective
    -1/2 beta'K beta - eps sum(a + s) + y'beta is smooth, over the box
    [0, C]^2n intersected with sum(a) = sum(s).
    """
    K = np.asarray(K, float)
    y = np.asarray(y, float)
    n = len(y)
    step = 1.0 / (2 * np.linalg.eigvalsh(K).max() + 1e-12)
    a = np.zeros(n)
    s = np.zeros(n)
    za, zs, t = a.copy(), s.copy(), 1.0
    for _ in range(iters):
        g = y - K @ (za - zs)
        a_new, s_new = _project_pair(za + step * (g - eps), zs + step * (-g - eps), C)
        t_new = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        mom = (t - 1) / t_new
        za = a_new + mom * (a_new - a)
        zs = s_new + mom * (s_new - s)
        moved = max(np.abs(a_new - a).max(), np.abs(s_new - s).max())
        a, s, t = a_new, s_new, t_new
        if moved < tol:
            break
    return a - s, svr_dual_value(K, y, a - s, eps)


def _project_pair(a, s, C):
    """Exact projection of (a, s) onto the box [0, C]^2n with sum(a) = sum(s).

    The projection is (clip(a - mu), clip(s + mu)) for the root mu of a
    piecewise-linear decreasing function; its breakpoints bracket the root.
    """
    mus = np.sort(np.concatenate([a - C, a, -s, C - s]))
    f = (np.clip(a[None, :] - mus[:, None], 0, C).sum(1)
         - np.clip(s[None, :] + mus[:, None], 0, C).sum(1))
    k = int(np.argmax(f <= 0))
    if k == 0 or f[k] == 0:
        mu = mus[k]
    else:
        mu = mus[k - 1] + (mus[k] - mus[k - 1]) * f[k - 1] / (f[k - 1] - f[k])
    return np.clip(a - mu, 0, C), np.clip(s + mu, 0, C)


def svr_kkt_violation(K, y, beta, bias, C, eps, tol=1e-9) -> float:
    """Worst optimality violation of an epsilon-SVR solution, vectorized.

    Writes beta = a - s and checks each half against its own bound:
    a_i = 0 needs r_i <= eps, a_i = C needs r_i >= eps, otherwise r_i = eps;
    mirrored for s with -r.  Includes |sum beta|.
    """
    r = np.asarray(y, float) - (np.asarray(K, float) @ beta + bias)
    parts = [np.zeros(1), np.array([abs(beta.sum())])]
    for half, res in ((np.clip(beta, 0, None), r), (np.clip(-beta, 0, None), -r)):
        lower = half <= tol
        upper = half >= C - tol
        inner = ~lower & ~upper
        parts += [np.maximum(res[lower] - eps, 0), np.maximum(eps - res[upper], 0),
                  np.abs(res[inner] - eps)]
    return float(max(p.max(initial=0.0) for p in parts))


def random_feasible_betas(n, C, count, rng):
    """Random points with |beta_i| <= C and sum(beta) = 0."""
    out = []
    while len(out) < count:
        b = _project(rng.uniform(-C, C, size=n), C)
        if abs(b.sum()) < 1e-9 and np.abs(b).max() <= C + 1e-12:
            out.append(b)
    return out


# -- trees --------------------------------------------------------------------


def exhaustive_best_split(x, y):
    """Best single threshold on 1-D data by trying every midpoint; returns (thr, left_mean, right_mean)."""
    xs = np.unique(x)
    best = None
    for a, b in zip(xs[:-1], xs[1:]):
        thr = 0.5 * (a + b)
        left, right = y[x <= thr], y[x > thr]
        sse = ((left - left.mean()) ** 2).sum() + ((right - right.mean()) ** 2).sum()
        if best is None or sse < best[0] - 1e-15:
            best = (sse, thr, left.mean(), right.mean())
    return best[1:]


# -- gradients and statistics -------------------------------------------------


def central_difference(f, params: list[np.ndarray], h=1e-5) -> list[np.ndarray]:
    grads = []
    for p in params:
        g = np.zeros_like(p)
        for idx in itertools.product(*(range(s) for s in p.shape)):
            old = p[idx]
            p[idx] = old + h
            fp = f()
            p[idx] = old - h
            fm = f()
            p[idx] = old
            g[idx] = (fp - fm) / (2 * h)
        grads.append(g)
    return grads


def linear_quantile(sorted_values, q):
    """Inclusive linear-interpolation quantile by hand: position (n-1) q."""
    v = list(sorted_values)
    pos = (len(v) - 1) * q
    lo = math.floor(pos)
    hi = min(lo + 1, len(v) - 1)
    return v[lo] + (pos - lo) * (v[hi] - v[lo])
