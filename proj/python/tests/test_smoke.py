import json
import math
from pathlib import Path

import pytest

ps = pytest.importorskip("propsearch")

DATA = Path(__file__).resolve().parents[2] / "tests" / "data"


@pytest.fixture(scope="module")
def tiny():
    model = ps.load_model(str(DATA / "tiny_model.txt"))
    props = ps.parse_properties(str(DATA / "tiny_properties.jsonl"))
    index = ps.build_index(model, props, built_at=0)
    return model, props, index


@pytest.fixture(scope="module")
def fixture():
    model = ps.load_model(str(DATA / "fixture_model.txt"))
    props = ps.parse_properties(str(DATA / "properties.jsonl"))
    index = ps.build_index(model, props, built_at=0)
    entities = ps.parse_entity_map(str(DATA / "entity_map.tsv"), props)
    return model, props, index, entities


def test_load_model(tiny):
    model, _, _ = tiny
    assert model.dim == 2
    assert len(model) == 6
    assert "alpha" in model
    assert model.lookup("dos") == [0.0, 3.0]
    assert model.lookup("missing") is None


def test_model_errors():
    with pytest.raises(ps.FormatError):
        ps.load_model_text("2 3\na 1 0 0\nb 0 2\n")
    with pytest.raises(ps.EmptyModelError):
        ps.load_model_text("")
    with pytest.raises(ps.Error):
        ps.load_model("/nonexistent/model.vec")


def test_tokenize():
    assert ps.tokenize("End Time!") == ["end", "time"]
    assert ps.tokenize("the of") == []
    assert ps.tokenize("the of", stopwords=set()) == ["the", "of"]


def test_search_order(tiny):
    model, _, index = tiny
    results = ps.search(index, model, "first")
    assert [r.property_id for r in results] == ["P1", "P3", "P2", "P4"]
    assert [r.tier for r in results] == ["semantic"] * 4
    assert results[0].score == pytest.approx(1.0)
    assert results[1].score == pytest.approx(math.sqrt(0.5), abs=1e-6)
    assert [r.rank for r in results] == [1, 2, 3, 4]


def test_alias_tier(fixture):
    model, _, index, _ = fixture
    top = ps.search(index, model, "divorced", limit=3)[0]
    assert (top.property_id, top.tier) == ("P582", "alias_exact")


def test_scoped_search(fixture):
    model, _, index, entities = fixture
    scope = entities["Q5582"]
    results = ps.search(index, model, "family", scope=scope, limit=5)
    assert results and all(r.property_id in scope for r in results)
    assert results[0].property_id in {"P22", "P25", "P3373", "P1038"}
    with pytest.raises(ps.ScopeError):
        ps.search(index, model, "family", scope=["P999999"])


def test_rank_semantic(tiny):
    model, _, index = tiny
    ranked = ps.rank_semantic(index, model, "first", scope=["P2", "P4"])
    assert [pid for pid, _ in ranked] == ["P2", "P4"]


def test_index_round_trip(tiny, tmp_path):
    _, _, index = tiny
    path = tmp_path / "tiny.pvix"
    ps.save_index(index, str(path))
    assert ps.load_index(str(path)) == index
    data = ps.index_to_bytes(index)
    assert data[:4] == b"PVIX"
    assert ps.index_from_bytes(data) == index
    with pytest.raises(ps.CorruptionError):
        ps.index_from_bytes(data[:-1])
    with pytest.raises(ps.FormatError):
        ps.index_from_bytes(b"NOPE" + data[4:])


def test_evaluate(tiny):
    model, props, index = tiny
    gold = ps.build_gold(props)
    assert [(g.alias, g.target_property) for g in gold] == [("uno", "P1"), ("uno", "P4")]
    report = ps.evaluate(index, model, gold)
    m = report.metrics
    assert (m.top1, m.top3, m.top10, m.mrr) == (0.5, 0.5, 1.0, 0.625)
    assert "mrr: 0.625000" in report.text()
    assert json.loads(report.row())["mrr"] == 0.625


def test_summarize_ranks():
    m = ps.summarize_ranks([1, 4])
    assert m.mrr == 0.625
    assert ps.summarize_ranks([1, None]).unresolvable_count == 1


def test_entity_simulation_deterministic(fixture):
    model, props, index, entities = fixture
    a = ps.entity_simulation(index, model, entities, props, 5, seed=9, workers=1)
    b = ps.entity_simulation(index, model, entities, props, 5, seed=9, workers=3)
    assert a.text() == b.text()
    assert len(a.sampled_entities) == 5
    assert ps.sample_entities(entities, 5, 9) == a.sampled_entities


def test_audit(fixture):
    model, _, index, _ = fixture
    rows = ps.audit_aliases(index, model)
    flags = {(r.property_id, r.alias): r.flag for r in rows}
    assert flags[("P17", "Country")] == "duplicate_of_label"
    assert {r.flag for r in rows} <= {"ok", "duplicate_of_label", "low_similarity"}


def test_rank_service(fixture):
    model, _, index, _ = fixture
    service = ps.RankService(index, model)
    status, body = service.health()
    assert status == 200 and json.loads(body)["status"] == "ok"
    status, body = service.rank(json.dumps({"query": "divorced"}))
    assert status == 200
    assert json.loads(body)["results"][0]["property_id"] == "P582"
    status, body = service.rank(json.dumps({"query": "x", "entity_properties": ["P0"]}))
    assert status == 422 and json.loads(body)["unknown"] == ["P0"]
    assert service.rank("{")[0] == 400
