"""Derivative-free minimization for the variational trainers.

The heavy lifting is done by scipy's COBYLA (unconstrained) or Nelder-Mead;
this wrapper adds what the trainers rely on:

* a hard evaluation budget, including the first evaluation at ``x0``;
* best-so-far tracking (the returned point is the best one ever evaluated,
  not the solver's last iterate);
* non-finite objective values are replaced by a penalty worse than anything
  seen so far; more than ``MAX_NONFINITE`` in a row abort the run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize as _sp

from .errors import OptimizationError

log = logging.getLogger(__name__)

METHODS = ("cobyla", "nelder_mead")
MAX_NONFINITE = 10


@dataclass
class OptimResult:
    best_params: np.ndarray
    best_value: float
    n_evals: int
    converged: bool
    trace: list[float] = field(default_factory=list)
    method: str = "cobyla"


class _BudgetExhausted(Exception):
    pass


class _Tracker:
    def __init__(self, objective, budget):
        self.objective = objective
        self.budget = budget
        self.n_evals = 0
        self.best_x = None
        self.best_f = np.inf
        self.worst_finite = 0.0
        self.nonfinite_run = 0
        self.trace: list[float] = []

    def __call__(self, x):
        if self.n_evals >= self.budget:
            raise _BudgetExhausted
        x = np.array(x, dtype=float, copy=True)
        f = float(self.objective(x))
        self.n_evals += 1
        if not np.isfinite(f):
            self.nonfinite_run += 1
            if self.nonfinite_run > MAX_NONFINITE:
                raise OptimizationError(
                    f"objective returned non-finite values {self.nonfinite_run} times in a row"
                )
            f = 1e10 * (1.0 + abs(self.worst_finite))
        else:
            self.nonfinite_run = 0
            self.worst_finite = max(self.worst_finite, abs(f))
            if f < self.best_f:
                self.best_f, self.best_x = f, x
        self.trace.append(self.best_f)
        return f


def minimize(
    objective: Callable[[np.ndarray], float],
    x0,
    budget: int = 1000,
    rho_begin: float = 1.0,
    rho_end: float = 1e-4,
    method: str = "cobyla",
) -> OptimResult:
    """Minimize ``objective`` starting from ``x0`` within ``budget`` evaluations.

    ``converged`` is true only when the solver reached its final radius
    ``rho_end`` before running out of evaluations.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if not rho_begin > rho_end > 0:
        raise ValueError("need rho_begin > rho_end > 0")
    if method not in METHODS:
        raise ValueError(f"unknown optimizer {method!r}; choose from {METHODS}")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    tracker = _Tracker(objective, budget)
    tracker(x0)
    if tracker.best_x is None:
        tracker.best_x, tracker.best_f = x0.copy(), np.inf

    first = {"pending": True}

    def wrapped(x):
        # the solvers start by evaluating x0; reuse the value already paid for
        if first["pending"] and np.array_equal(x, x0) and tracker.trace:
            first["pending"] = False
            return tracker.trace[0] if np.isfinite(tracker.trace[0]) else 1e10
        first["pending"] = False
        return tracker(x)

    converged = False
    if budget > 1:
        try:
            if method == "cobyla":
                res = _sp.minimize(
                    wrapped, x0, method="COBYLA",
                    options={"rhobeg": rho_begin, "tol": rho_end, "maxiter": budget},
                )
                converged = res.status == 1
            else:
                n = x0.size
                simplex = np.vstack([x0, x0 + rho_begin * np.eye(n)])
                res = _sp.minimize(
                    wrapped, x0, method="Nelder-Mead",
                    options={
                        "initial_simplex": simplex, "xatol": rho_end,
                        "fatol": rho_end**2, "maxfev": budget + 1, "adaptive": n > 2,
                    },
                )
                converged = bool(res.success)
        except _BudgetExhausted:
            converged = False
        if tracker.n_evals >= budget:
            # Nelder-Mead can finish a shrink step past maxfev; that is not convergence
            converged = converged and method == "cobyla"

    log.debug("%s: %d evals, best %.6g, converged=%s", method, tracker.n_evals,
              tracker.best_f, converged)
    return OptimResult(
        best_params=tracker.best_x,
        best_value=float(tracker.best_f),
        n_evals=tracker.n_evals,
        converged=converged,
        trace=tracker.trace,
        method=method,
    )
