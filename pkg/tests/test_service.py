import numpy as np
import pytest
from fastapi.testclient import TestClient

from msmtfl.baselines import solve_lasso_l11
from msmtfl.core import make_dataset
from msmtfl.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def small_dataset_payload(seed=0, m=2, n=6, d=4):
    rng = np.random.default_rng(seed)
    tasks = []
    for _ in range(m):
        x = rng.standard_normal((n, d))
        tasks.append({"x": x.tolist(), "y": rng.standard_normal(n).tolist()})
    return {"tasks": tasks}


def to_dataset(payload):
    return make_dataset((np.array(t["x"]), np.array(t["y"])) for t in payload["tasks"])


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_weighted_lasso_endpoint_matches_library(client):
    payload = small_dataset_payload()
    body = {"dataset": payload, "penalties": [0.05, 0.05, 0.05, 0.05]}
    r = client.post("/solvers/weighted-lasso", json=body)
    assert r.status_code == 200
    out = r.json()
    assert all(out["converged"])
    w = solve_lasso_l11(to_dataset(payload), 0.05)
    np.testing.assert_allclose(np.array(out["weights"]), w, atol=1e-12)


def test_weighted_lasso_dimension_mismatch_is_400(client):
    body = {"dataset": small_dataset_payload(), "penalties": [0.05, 0.05]}
    r = client.post("/solvers/weighted-lasso", json=body)
    assert r.status_code == 400
    assert "penalty" in r.json()["detail"]


def test_ragged_dataset_is_400(client):
    payload = small_dataset_payload()
    payload["tasks"][1]["x"] = [row[:3] for row in payload["tasks"][1]["x"]]
    r = client.post("/solvers/lasso", json={"dataset": payload, "lam": 0.1})
    assert r.status_code == 400


def test_msmtfl_requires_theta_and_runs(client):
    payload = small_dataset_payload(seed=1)
    body = {"dataset": payload, "lam": 0.05, "stages": 3}
    r = client.post("/solvers/msmtfl", json=body)
    assert r.status_code == 400
    body["theta"] = 0.5
    r = client.post("/solvers/msmtfl", json=body)
    assert r.status_code == 200
    out = r.json()
    assert [s["stage"] for s in out["stages"]] == [1, 2, 3]
    assert all(s["theta"] == 0.5 for s in out["stages"])
    assert all(s["tau"] is None for s in out["stages"])
    assert out["stages"][0]["solution"] is None


def test_msmtfl_at_stage_payloads(client):
    payload = small_dataset_payload(seed=2)
    body = {"dataset": payload, "lam": 0.05, "stages": 2, "include_solutions": True}
    r = client.post("/solvers/msmtfl-at", json=body)
    assert r.status_code == 200
    out = r.json()
    for s in out["stages"]:
        assert s["tau"] is not None and s["tau"] >= 0
        assert s["solution"] is not None
    assert np.array(out["final_weights"]).shape == (4, 2)


def test_lasso_equals_single_stage_msmtfl_via_service(client):
    payload = small_dataset_payload(seed=3)
    r1 = client.post("/solvers/lasso", json={"dataset": payload, "lam": 0.07})
    r2 = client.post(
        "/solvers/msmtfl",
        json={"dataset": payload, "lam": 0.07, "stages": 1, "theta": 1e9},
    )
    assert r1.json()["weights"] == r2.json()["final_weights"]


def test_l21_endpoint(client):
    payload = small_dataset_payload(seed=4)
    r = client.post("/solvers/l21", json={"dataset": payload, "lam": 0.2})
    assert r.status_code == 200
    assert r.json()["converged"] is True


def test_synthetic_endpoint_counts_and_determinism(client):
    body = {"m": 3, "n": 5, "d": 20, "sigma": 0.01, "seed": 11}
    a = client.post("/data/synthetic", json=body).json()
    b = client.post("/data/synthetic", json=body).json()
    assert a == b
    w = np.array(a["true_weights"])
    assert w.shape == (20, 3)
    zero_rows = int(np.sum(np.abs(w).sum(axis=1) == 0.0))
    assert zero_rows == 18
    r = client.post("/data/synthetic", json={**body, "sigma": -1.0})
    assert r.status_code == 422  # pydantic field bound


def test_metrics_endpoints(client):
    r = client.post(
        "/metrics/regression",
        json={"predicted": [2.0], "reference": [1.0], "n": 1},
    )
    assert r.status_code == 200
    assert r.json()["nmse"] == pytest.approx(0.5)
    assert r.json()["amse"] == pytest.approx(1.0)
    r = client.post(
        "/metrics/regression",
        json={"predicted": [0.0], "reference": [0.0], "n": 1},
    )
    assert r.status_code == 400
    r = client.post(
        "/metrics/weight-error",
        json={"estimated": [[3.0, 4.0]], "truth": [[0.0, 0.0]]},
    )
    assert r.json()["l21_error"] == pytest.approx(5.0)


def test_experiment_endpoint_runs_and_is_deterministic(client):
    body = {"config": {
        "experiment": "stage-sweep",
        "m": "3", "n": "8", "d": "12", "sigma": "0.01",
        "seeds": "0,1", "stages": "2",
    }}
    a = client.post("/experiments/run", json=body)
    assert a.status_code == 200
    out = a.json()
    assert len(out["rows"]) == 2 * 2 * 2
    assert out["csv"].splitlines()[0].startswith("algorithm,seed,stage")
    assert not out["hard_failure"]
    b = client.post("/experiments/run", json=body)
    assert b.json()["csv"] == out["csv"]


def test_experiment_endpoint_config_errors(client):
    r = client.post("/experiments/run", json={"config": {"experiment": "bogus"}})
    assert r.status_code == 400
    assert r.json()["detail"]["category"] == "config"
    assert any("bogus" in p for p in r.json()["detail"]["problems"])

    r = client.post("/experiments/run", json={"config": {
        "experiment": "realdata-sweep", "manifest": "somewhere.manifest",
    }})
    assert r.status_code == 400
    assert "inline dataset" in r.json()["detail"]["problems"][0]


def test_experiment_endpoint_realdata_inline(client):
    payload = small_dataset_payload(seed=5, m=2, n=8, d=3)
    body = {
        "config": {
            "experiment": "realdata-sweep", "manifest": "inline",
            "train-ratio": "0.5", "seeds": "0", "stages": "2",
            "algorithms": "lasso",
        },
        "dataset": payload,
    }
    r = client.post("/experiments/run", json=body)
    assert r.status_code == 200
    rows = r.json()["rows"]
    assert len(rows) == 1
    assert rows[0]["nmse"] is not None


def test_malformed_payload_is_422(client):
    r = client.post("/solvers/lasso", json={"dataset": {"tasks": []}, "lam": 0.1})
    assert r.status_code == 422
    r = client.post("/solvers/lasso", json={"lam": 0.1})
    assert r.status_code == 422
