import json
import math
import os
from pathlib import Path

import pytest

import cfgsim

DATA = Path(os.environ.get("CFGSIM_TEST_DATA", Path(__file__).resolve().parents[1] / "data"))


def load(name):
    return cfgsim.parse_program((DATA / name).read_text())


def test_parse_and_print():
    p = load("two_funcs.ir")
    assert [f.name for f in p.functions] == ["main", "fact"]
    assert p.unified_labels[0] == "@root"
    text = cfgsim.to_text(p)
    assert cfgsim.to_text(cfgsim.parse_program(text)) == text


def test_parse_error_position():
    with pytest.raises(cfgsim.ParseError) as info:
        load("missing_terminator.ir")
    assert "line 4" in str(info.value)
    assert isinstance(info.value, ValueError)


def test_similarity():
    a, b = load("diamond.ir"), load("diamond_extra.ir")
    assert cfgsim.graph_similarity(a, a)["value"] == pytest.approx(1.0, abs=1e-9)
    ab = cfgsim.graph_similarity(a, b)["value"]
    assert 0.0 < ab < 1.0
    assert cfgsim.graph_similarity(b, a)["value"] == pytest.approx(ab, abs=1e-9)

    topo = cfgsim.EngineConfig(mode=cfgsim.SimilarityMode.TOPOLOGICAL)
    chain, single = load("chain2.ir"), load("single.ir")
    value = cfgsim.graph_similarity(chain.functions[0].cfg, single.functions[0].cfg, topo)["value"]
    assert value == 0.5

    report = cfgsim.match_nodes(a, b)
    labels = b.unified_labels
    assert [labels[j] for j in report["unmatched_b"]] == ["main:e"]


def test_engine_config_validation():
    with pytest.raises(cfgsim.InputError):
        cfgsim.EngineConfig(epsilon=0.0)


def test_content_similarity():
    body = load("diamond.ir").functions[0].cfg.nodes[3].body
    assert [i.opcode for i in body] == ["call", "ret"]
    assert cfgsim.edit_distance(body, body) == 0
    assert cfgsim.content_similarity(body, []) == 0.0
    assert cfgsim.content_similarity([], []) == 1.0


def test_assignment():
    m = cfgsim.solve_max_assignment([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
    assert m.weight == pytest.approx(2.0)
    assert m.pairs == [(0, 0), (1, 1)]
    with pytest.raises(cfgsim.InputError):
        cfgsim.solve_max_assignment([[-1.0]])


def test_fit_and_predict():
    rows = [((1.0, 1.0, 1.0), 10.0), ((1.0, 0.0, 0.5), 7.0), ((0.5, 1.0, 0.8), 6.0)]
    model = cfgsim.fit(rows)
    assert model.alpha == pytest.approx([12.0, 8.0, -10.0], abs=1e-9)

    ref = cfgsim.GradeModel([6.058, 1.014, 2.919])
    raw, grade = cfgsim.predict(ref, 1.0, True, 1.0)
    assert raw == pytest.approx(9.991, abs=1e-12)
    assert grade == raw
    assert cfgsim.predict(cfgsim.GradeModel([9, 2, 2]), 1.0, True, 1.0) == (13.0, 10.0)

    back = cfgsim.model_from_json(cfgsim.model_to_json(ref))
    assert back.alpha == ref.alpha
    assert json.loads(cfgsim.model_to_json(ref))["engine"]["mode"] == "content"

    with pytest.raises(cfgsim.NumericError):
        cfgsim.fit([((1.0, 1.0, x), 9.0) for x in (0.7, 0.8, 0.9)])


def test_x3_and_bands():
    sub = load("diamond.ir")
    x3, best = cfgsim.compute_x3(sub, [("fact", load("two_funcs.ir")), ("same", load("diamond.ir"))])
    assert best == "same"
    assert x3 == pytest.approx(1.0, abs=1e-9)
    assert cfgsim.feedback_band(x3) == "very_similar"
    assert cfgsim.feedback_band(math.nextafter(0.5, 0.0)) == "dissimilar"
    assert cfgsim.feedback_band(0.5) == "roughly_similar"
    assert cfgsim.rescale_x3(0.84, 0.68) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(cfgsim.InputError):
        cfgsim.feedback_band(1.5)
