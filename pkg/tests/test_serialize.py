import json
import os

import numpy as np
import pytest

from qbde.errors import ConfigurationError
from qbde.pipeline import fit_model, prepare
from qbde.serialize import MODEL_KINDS, Pipeline, atomic_write_text, dumps, load_pipeline, save_pipeline


@pytest.fixture(scope="module")
def fitted(corpus_csv):
    from conftest import TINY
    from qbde.pipeline import resolve_config

    cfg = resolve_config(TINY, **{"data.path": str(corpus_csv)})
    prep = prepare(cfg)
    return prep, {k: fit_model(k, prep.train, cfg) for k in MODEL_KINDS}


@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_round_trip_is_bit_exact(kind, fitted, tmp_path):
    prep, pipes = fitted
    pipe = pipes[kind]
    path = tmp_path / f"{kind}.json"
    save_pipeline(path, pipe)
    loaded = load_pipeline(path)
    assert loaded.kind == kind
    X = np.vstack([prep.train.features, prep.test.features])
    a, b = pipe.predict(X), loaded.predict(X)
    assert a.tobytes() == b.tobytes()
    # saving the loaded model again gives the same file
    path2 = tmp_path / f"{kind}-again.json"
    save_pipeline(path2, loaded)
    assert path.read_bytes() == path2.read_bytes()


def test_file_header(fitted, tmp_path):
    path = tmp_path / "m.json"
    save_pipeline(path, fitted[1]["svr"])
    doc = json.loads(path.read_text())
    assert doc["format"] == "qbde-model" and doc["version"] == 1 and doc["kind"] == "svr"


def test_bad_format_and_version(fitted):
    good = fitted[1]["rf"].to_dict()
    with pytest.raises(ConfigurationError):
        Pipeline.from_dict({**good, "format": "something-else"})
    with pytest.raises(ConfigurationError):
        Pipeline.from_dict({**good, "version": 99})
    with pytest.raises(ConfigurationError):
        Pipeline.from_dict({**good, "kind": "xgboost"})


def test_empty_batch(fitted):
    assert fitted[1]["qsvr"].predict(np.zeros((0, 6))).shape == (0,)


def test_atomic_write_replaces_and_leaves_no_temp(tmp_path):
    path = tmp_path / "out.txt"
    atomic_write_text(path, "first\n")
    atomic_write_text(path, "second\n")
    assert path.read_text() == "second\n"
    assert os.listdir(tmp_path) == ["out.txt"]


def test_atomic_write_failure_keeps_old_file(tmp_path):
    path = tmp_path / "out.txt"
    atomic_write_text(path, "old\n")

    class Boom:
        def __str__(self):
            raise RuntimeError

    with pytest.raises(TypeError):
        atomic_write_text(path, Boom())
    assert path.read_text() == "old\n"
    assert os.listdir(tmp_path) == ["out.txt"]


def test_dumps_is_sorted_and_stable():
    assert dumps({"b": 1, "a": [0.1, 2]}) == dumps({"a": [0.1, 2], "b": 1})
    assert json.loads(dumps({"x": 0.1 + 0.2}))["x"] == 0.1 + 0.2
