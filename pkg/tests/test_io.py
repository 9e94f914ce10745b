from __future__ import annotations

import json

import pytest

from qhsmm import build_poisson_process, load_model, loads_model, model_hash, resolve_source
from qhsmm.errors import ParseError
from qhsmm.io import dumps_model, model_to_dict

DOC = {
    "modes": ["a", "b"],
    "alphabet": ["0", "1"],
    "transitions": [
        {"from": "a", "to": "b", "symbol": "0", "prob": 1.0, "dwell": {"kind": "uniform", "params": {"a": 0.0, "b": 1.0}}},
        {"from": 1, "to": 0, "symbol": 1, "prob": 1, "dwell": {"kind": "exponential", "params": {"scale": 2.0}}},
    ],
}


def test_roundtrip(example):
    m = loads_model(dumps_model(example))
    assert model_to_dict(m) == model_to_dict(example)
    assert model_hash(m) == model_hash(example)


def test_labels_and_indices_equivalent():
    m = loads_model(json.dumps(DOC))
    assert [(t.source, t.target, t.symbol) for t in m.transitions] == [(0, 1, 0), (1, 0, 1)]


def test_hash_distinguishes_models():
    assert model_hash(build_poisson_process(1.0)) != model_hash(build_poisson_process(2.0))
    assert len(model_hash(build_poisson_process(1.0))) == 16


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as exc:
        loads_model('{\n  "modes": [,]\n}')
    assert exc.value.line == 2


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.update(extra=1),
        lambda d: d.pop("alphabet"),
        lambda d: d["transitions"][0].update(weight=1),
        lambda d: d["transitions"][0].update(to="zz"),
        lambda d: d["transitions"][0].update(prob="1"),
        lambda d: d["transitions"][0].update(dwell={"kind": "gamma"}),
        lambda d: d["transitions"][0].update(prob=0.5),
    ],
)
def test_rejections(mutate):
    doc = json.loads(json.dumps(DOC))
    mutate(doc)
    with pytest.raises(ParseError):
        loads_model(json.dumps(doc))


def test_invalid_model_lists_violations():
    doc = json.loads(json.dumps(DOC))
    doc["transitions"][0]["prob"] = 0.5
    with pytest.raises(ParseError) as exc:
        loads_model(json.dumps(doc))
    assert any(v.code == "row-sum" for v in exc.value.violations)


def test_resolve_source(tmp_path, example):
    assert model_hash(resolve_source("example:2,1")) == model_hash(example)
    assert resolve_source("poisson:3").n_modes == 1
    p = tmp_path / "m.json"
    p.write_text(json.dumps(DOC))
    assert load_model(p).n_modes == 2
    assert resolve_source(str(p)).n_modes == 2
    for bad in ("example:2", "poisson:x", str(tmp_path / "missing.json")):
        with pytest.raises((ParseError, OSError)):
            resolve_source(bad)
