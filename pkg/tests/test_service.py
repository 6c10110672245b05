import base64
import hashlib

import numpy as np
import pytest
from fastapi.testclient import TestClient

from degrade_forge import image_io, space
from degrade_forge.service import create_app

from conftest import random_image


def b64png(img) -> str:
    return base64.b64encode(image_io.encode_png_bytes(img)).decode("ascii")


@pytest.fixture(scope="module")
def client(fixture_weights_path):
    return TestClient(create_app(weights_path=str(fixture_weights_path)))


@pytest.fixture(scope="module")
def bare_client():
    return TestClient(create_app(weights_path=None))


# ---------------------------------------------------------------------------
# /schema
# ---------------------------------------------------------------------------

def test_schema_has_33_slots_covering_indices(client):
    doc = client.get("/schema").json()
    assert doc["vector_length"] == 33
    assert sorted(s["index"] for s in doc["slots"]) == list(range(1, 34))
    onehot = [s for s in doc["slots"] if s["kind"] == "onehot"]
    assert {tuple(s["group_indices"]) for s in onehot} == {
        (12, 13, 14), (16, 17, 18), (21, 22), (25, 26), (29, 30), (31, 32, 33)}
    scalar = next(s for s in doc["slots"] if s["index"] == 2)
    assert scalar["range"] == [0.2, 3.0]
    assert set(doc["presets"]) == {"S1", "S2", "S3"}


# ---------------------------------------------------------------------------
# /degrade
# ---------------------------------------------------------------------------

def test_degrade_with_s1_vector_quarters_dimensions(client):
    params = space.sample_params(space.Level.S1, np.random.default_rng(1))
    vector = [float(x) for x in space.encode(params)]
    body = {"image": b64png(random_image((64, 64, 3), seed=1)), "vector": vector, "seed": 4}
    resp = client.post("/degrade", json=body)
    assert resp.status_code == 200
    lr = image_io.decode_png_bytes(base64.b64decode(resp.json()["image"]))
    assert lr.shape == (16, 16, 3)
    assert resp.json()["trace"][0]["op"] == "stage1.blur"


def test_degrade_with_params_document(client):
    params = space.sample_params(space.Level.S2, np.random.default_rng(2))
    body = {"image": b64png(random_image((64, 64, 3), seed=2)),
            "params": space.params_to_dict(params)}
    resp = client.post("/degrade", json=body)
    assert resp.status_code == 200


def test_degrade_requires_exactly_one_description(client):
    img = b64png(random_image((16, 16, 3)))
    assert client.post("/degrade", json={"image": img}).status_code == 400
    params = space.params_to_dict(space.sample_params(space.Level.S1, np.random.default_rng(0)))
    vector = [0.0] * 33
    resp = client.post("/degrade", json={"image": img, "params": params, "vector": vector})
    assert resp.status_code == 400
    assert resp.json()["error"]["field"] == "params"


def test_degrade_rejects_bad_vector_length(client):
    body = {"image": b64png(random_image((16, 16, 3))), "vector": [0.0] * 10}
    resp = client.post("/degrade", json=body)
    assert resp.status_code == 400


# ---------------------------------------------------------------------------
# /predict and /superresolve
# ---------------------------------------------------------------------------

def test_predict_returns_vector_and_interpretation(client):
    resp = client.post("/predict", json={"image": b64png(random_image((24, 24, 3), seed=3))})
    assert resp.status_code == 200
    doc = resp.json()
    assert len(doc["vector"]) == 33
    assert "stage1" in doc["params"]


def test_superresolve_is_deterministic_per_body(client):
    body = {"image": b64png(random_image((12, 12, 3), seed=4))}
    r1 = client.post("/superresolve", json=body)
    r2 = client.post("/superresolve", json=body)
    assert r1.status_code == 200
    assert r1.content == r2.content
    sr = image_io.decode_png_bytes(base64.b64decode(r1.json()["image"]))
    assert sr.shape == (48, 48, 3)
    assert len(r1.json()["v_hat"]) == 33
    assert len(r1.json()["a"]) == 5


def test_superresolve_honors_override_vector(client):
    img = b64png(random_image((12, 12, 3), seed=5))
    base = client.post("/superresolve", json={"image": img}).json()
    override = list(base["v_hat"])
    override[1] = min(1.0, override[1] + 0.5)
    edited = client.post("/superresolve",
                         json={"image": img, "override_vector": override}).json()
    assert edited["a"] != base["a"]
    same = client.post("/superresolve",
                       json={"image": img, "override_vector": base["v_hat"]}).json()
    assert same["image"] == base["image"]


# ---------------------------------------------------------------------------
# error envelope and statelessness
# ---------------------------------------------------------------------------

def test_malformed_body_gives_400_with_field(client):
    resp = client.post("/predict", json={})
    assert resp.status_code == 400
    assert resp.json()["error"]["field"] == "image"
    resp = client.post("/predict", json={"image": "@@not-base64@@"})
    assert resp.status_code == 400
    assert "PNG" in resp.json()["error"]["message"]


def test_inference_routes_without_weights_give_409(bare_client):
    img = b64png(random_image((16, 16, 3)))
    assert bare_client.post("/predict", json={"image": img}).status_code == 409
    assert bare_client.post("/superresolve", json={"image": img}).status_code == 409
    # schema and degrade do not need weights
    assert bare_client.get("/schema").status_code == 200
    params = space.params_to_dict(space.sample_params(space.Level.S1, np.random.default_rng(0)))
    assert bare_client.post("/degrade",
                            json={"image": b64png(random_image((32, 32, 3))),
                                  "params": params}).status_code == 200


def bank_digest(bundle) -> str:
    h = hashlib.sha256()
    for expert in bundle.bank.experts:
        for name, t in expert.items():
            h.update(name.encode())
            h.update(t.tobytes())
    for t in bundle.predictor.values():
        h.update(t.tobytes())
    for t in (bundle.weighting.w1, bundle.weighting.b1, bundle.weighting.w2,
              bundle.weighting.b2):
        h.update(t.tobytes())
    return h.hexdigest()


def test_requests_never_mutate_loaded_weights(fixture_weights_path):
    app = create_app(weights_path=str(fixture_weights_path))
    client = TestClient(app)
    before = bank_digest(app.state.bundle)

    img = b64png(random_image((16, 16, 3), seed=6))
    for i in range(1000):
        if i % 50 == 0:
            assert client.post("/predict", json={"image": img}).status_code == 200
        else:
            assert client.get("/schema").status_code == 200
    assert bank_digest(app.state.bundle) == before
