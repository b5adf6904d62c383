import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

GATES_1Q = ("H", "RY", "RZ")
GATES_2Q = ("RZZ", "CNOT")


def random_gate_triples(rng, n, count):
    """(kind, qubits, angle) triples; two-qubit gates only when n >= 2."""
    kinds = GATES_1Q + (GATES_2Q if n >= 2 else ())
    out = []
    for _ in range(count):
        kind = kinds[rng.integers(len(kinds))]
        if kind in GATES_2Q:
            qubits = tuple(int(q) for q in rng.choice(n, size=2, replace=False))
        else:
            qubits = (int(rng.integers(n)),)
        angle = None if kind in ("H", "CNOT") else float(rng.uniform(-2 * math.pi, 2 * math.pi))
        out.append((kind, qubits, angle))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Small enough that all eight models fit in a few seconds.
TINY = {
    "sample.n_total": 60, "sample.min_per_class": 2,
    "svr.grid": {"C": [1.0, 10.0], "gamma": [0.2]}, "rf.n_trees": 5, "rf.grid": {"max_depth": [3]},
    "mlp.hidden": [8], "mlp.epochs": 20, "mlp.grid": {}, "grid.k_folds": 3,
    "quantum.feature_map_reps": 1, "quantum.ansatz_layers": 1,
    "quantum.optimizer_budget": 30, "qrf.n_trees": 2,
}


@pytest.fixture(scope="session")
def corpus_csv(tmp_path_factory):
    from qbde.corpus import make_corpus, write_corpus_csv

    path = tmp_path_factory.mktemp("corpus") / "corpus.csv"
    write_corpus_csv(path, make_corpus())
    return path


@pytest.fixture
def tiny_cfg(corpus_csv):
    from qbde.pipeline import resolve_config

    return resolve_config(TINY, **{"data.path": str(corpus_csv)})


# Filled by test_acceptance.py; one "PASS/FAIL criterion N: ..." line each.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
