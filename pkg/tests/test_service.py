from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from gred.llm import GenerationParams, ScriptedBackend
from gred.pipeline import Pipeline, PipelineConfig
from gred.runtime import BackendSpec, Dataset, RuntimeBundle, Settings
from gred.service import create_app

import conftest as helpers
from fixture_corpus import RGVISNET_DVQ, TARGET_DVQ


@pytest.fixture
def client(library, train_examples, schemas, embedder):
    backend = ScriptedBackend(fallback="echo_dvq")
    config = PipelineConfig(k=10, gen_params=GenerationParams(), embed_model_id=embedder.model_id)
    pipeline = Pipeline(
        library=library,
        train_examples={e.example_id: e for e in train_examples},
        schemas=schemas,
        annotations=helpers.ANNOTATIONS,
        embedder=embedder,
        backend=backend,
        config=config,
    )
    bundle = RuntimeBundle(
        dataset=Dataset(schemas=schemas, train=train_examples, test=[]),
        library=library,
        annotations=helpers.ANNOTATIONS,
        pipeline=pipeline,
        backend_spec=BackendSpec("scripted", "inline"),
        settings=Settings(),
        config=config,
    )
    return TestClient(create_app(bundle))


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["backend"] == "scripted:inline"


def test_config_endpoint(client):
    body = client.get("/config").json()
    assert body["k"] == 10
    assert body["enable_retune"] and body["enable_debug"]
    assert set(body["databases"]) == {"pets_1", "hr_robust"}
    assert body["library_size"] == 2 * len(helpers.TRAIN_EXAMPLES)


def test_parse_endpoint(client):
    response = client.post("/dvq/parse", json={"text": "visualize bar select A , B from t"})
    assert response.status_code == 200
    body = response.json()
    assert body["canonical"] == "Visualize BAR SELECT A , B FROM t"
    assert body["chart"] == "BAR"
    assert body["components"] == {"vis": "BAR", "axes": "A , B", "data": "FROM t"}


def test_parse_endpoint_reports_error_type_and_offset(client):
    response = client.post("/dvq/parse", json={"text": "Visualize HISTOGRAM SELECT a , b FROM t"})
    assert response.status_code == 422
    detail = response.json()["detail"]
    assert detail["type"] == "UnknownChartType"
    assert detail["offset"] == 10


def test_equal_endpoint(client):
    response = client.post("/dvq/equal", json={"a": TARGET_DVQ, "b": TARGET_DVQ.lower()})
    body = response.json()
    assert body["equal"] is True
    response = client.post("/dvq/equal", json={"a": TARGET_DVQ, "b": "garbage"})
    body = response.json()
    assert body["equal"] is False and body["b_parse_ok"] is False


def test_evaluate_endpoint(client):
    pairs = [
        {"pred": TARGET_DVQ, "gold": TARGET_DVQ},
        {"pred": RGVISNET_DVQ, "gold": TARGET_DVQ},
    ]
    body = client.post("/evaluate", json={"pairs": pairs}).json()
    assert body["n"] == 2
    assert body["n_c"] == 1
    assert body["vis_acc"] == 1.0
    assert body["acc"] == 0.5


def test_evaluate_endpoint_rejects_bad_gold(client):
    response = client.post("/evaluate", json={"pairs": [{"pred": TARGET_DVQ, "gold": "junk"}]})
    assert response.status_code == 422
    assert response.json()["detail"]["type"] == "GoldUnparsable"


def test_translate_endpoint_identity(client):
    example = helpers.TRAIN_EXAMPLES[0]
    response = client.post("/translate", json={"nlq": example.nlq, "db_id": example.db_id})
    assert response.status_code == 200
    body = response.json()
    assert body["final"] == example.dvq
    assert body["dvq_gen"] == example.dvq
    assert body["error"] is None
    assert body["retrieved_nlq"][0]["example_id"] == example.example_id
    assert body["stages"] is None


def test_translate_endpoint_with_prompts(client):
    example = helpers.TRAIN_EXAMPLES[0]
    response = client.post(
        "/translate", json={"nlq": example.nlq, "db_id": example.db_id, "include_prompts": True}
    )
    body = response.json()
    assert set(body["stages"]) == {"gen", "rtn", "dbg"}
    assert body["stages"]["gen"]["prompt"][0]["role"] == "system"


def test_translate_unknown_db(client):
    response = client.post("/translate", json={"nlq": "q", "db_id": "nope"})
    assert response.status_code == 404
