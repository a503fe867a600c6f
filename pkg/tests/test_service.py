"""Scenario service API tests."""

import time

import pytest
from fastapi.testclient import TestClient

from copolicy import SynthConfig, synth_panel
from copolicy.config import ScenarioRequest
from copolicy.service import JobStore, create_app


@pytest.fixture(scope="module")
def panel():
    return synth_panel(SynthConfig(n_units=12, n_years=18, seed=4))


@pytest.fixture()
def client(panel):
    app = create_app(panel)
    with TestClient(app) as c:
        yield c


def body(**kw):
    base = dict(effect_primary=-0.10, effect_secondary=-0.10, gap="C1", n_treated=5,
                n_reps=8, seed=3)
    base.update(kw)
    return base


def wait_done(client, job_id, timeout=30.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        r = client.get(f"/api/scenarios/{job_id}")
        assert r.status_code == 200
        if r.json()["status"] in ("done", "failed"):
            return r.json()
        time.sleep(0.05)
    raise TimeoutError("job did not finish")


class TestSubmit:
    def test_valid_body_returns_202_job_id(self, client):
        r = client.post("/api/scenarios", json=body())
        assert r.status_code == 202
        assert "job_id" in r.json()

    def test_k_too_large_400_names_field(self, client):
        r = client.post("/api/scenarios", json=body(n_treated=51))
        assert r.status_code == 400
        assert any(d["field"] == "n_treated" for d in r.json()["detail"])

    def test_unknown_key_400_names_field(self, client):
        r = client.post("/api/scenarios", json={**body(), "bogus": 1})
        assert r.status_code == 400
        assert any("bogus" in d["field"] for d in r.json()["detail"])

    def test_bad_type_400(self, client):
        r = client.post("/api/scenarios", json=body(n_reps="many"))
        assert r.status_code == 400

    def test_infeasible_gap_400(self, client):
        r = client.post("/api/scenarios", json=body(gap=[14.0, 15.0]))
        assert r.status_code == 400
        assert any(d["field"] == "gap" for d in r.json()["detail"])

    def test_duplicate_submission_same_job_id(self, client):
        a = client.post("/api/scenarios", json=body(seed=77)).json()["job_id"]
        b = client.post("/api/scenarios", json=body(seed=77)).json()["job_id"]
        assert a == b

    def test_different_seed_different_job(self, client):
        a = client.post("/api/scenarios", json=body(seed=1)).json()["job_id"]
        b = client.post("/api/scenarios", json=body(seed=2)).json()["job_id"]
        assert a != b


class TestStatusAndResults:
    def test_unknown_id_404(self, client):
        assert client.get("/api/scenarios/deadbeef").status_code == 404
        assert client.get("/api/scenarios/deadbeef/results").status_code == 404

    def test_results_before_done_409_with_progress(self, panel):
        store = JobStore()
        app = create_app(panel, store=store)
        with TestClient(app) as client:
            job = store.create("somekey", ScenarioRequest(**body()))
            store.mark_running(job.job_id)
            store.advance(job.job_id, 3)
            r = client.get(f"/api/scenarios/{job.job_id}/results")
            assert r.status_code == 409
            detail = r.json()["detail"]
            assert detail["status"] == "running"
            assert detail["progress"]["completed"] == 3

    def test_finished_job_payload_shape(self, client):
        job_id = client.post("/api/scenarios", json=body(seed=5)).json()["job_id"]
        status = wait_done(client, job_id)
        assert status["status"] == "done"
        assert status["progress"]["fraction"] == 1.0
        payload = client.get(f"/api/scenarios/{job_id}/results").json()
        assert set(payload["summaries"]) == {"primary", "secondary"}
        prim = payload["summaries"]["primary"]
        for key in ("coverage", "rel_bias_pct", "rmse", "var_model", "bias"):
            assert key in prim
        panels = payload["panels"]
        assert {"metric", "policy", "value"} == set(panels[0])
        metrics_present = {p["metric"] for p in panels if p["policy"] == "primary"}
        assert {"bias", "rel_bias_pct", "var_model", "rmse", "typeS", "coverage"} <= metrics_present
        assert payload["fail_rate"] == 0.0

    def test_misspecified_only_primary(self, client):
        job_id = client.post("/api/scenarios",
                             json=body(specification="misspecified", seed=6)).json()["job_id"]
        wait_done(client, job_id)
        payload = client.get(f"/api/scenarios/{job_id}/results").json()
        assert set(payload["summaries"]) == {"primary"}

    def test_failed_job_409_with_error(self, panel):
        store = JobStore()
        app = create_app(panel, store=store)
        with TestClient(app) as client:
            job = store.create("k2", ScenarioRequest(**body()))
            store.fail(job.job_id, "RankDeficient: boom")
            r = client.get(f"/api/scenarios/{job.job_id}/results")
            assert r.status_code == 409
            assert "RankDeficient" in r.json()["detail"]["error"]


class TestThresholds:
    def test_payload_contents(self, client):
        r = client.get("/api/reference/thresholds")
        assert r.status_code == 200
        data = r.json()
        assert data["ar_min_gap_years"] == [3, 4]
        assert data["did_min_gap_years"] == [6, 7]
        assert data["rel_bias_band_edges_pct"] == [5.0, 10.0, 20.0]
        assert data["std_bias_band_edges"] == [0.2, 0.4]

    def test_byte_stable(self, client):
        a = client.get("/api/reference/thresholds").content
        b = client.get("/api/reference/thresholds").content
        assert a == b

    def test_bands_classify_large(self, client):
        from copolicy import classify_bias
        edges = client.get("/api/reference/thresholds").json()["rel_bias_band_edges_pct"]
        assert 82.3 > edges[-1]
        assert classify_bias(82.3, "non_null") == "large"


class TestCache:
    def test_disk_cache_survives_restart(self, panel, tmp_path):
        cache = tmp_path / "cache"
        app1 = create_app(panel, cache_dir=str(cache))
        with TestClient(app1) as c1:
            job1 = c1.post("/api/scenarios", json=body(seed=9)).json()["job_id"]
            wait_done(c1, job1)
            payload1 = c1.get(f"/api/scenarios/{job1}/results").json()
        app2 = create_app(panel, cache_dir=str(cache))
        with TestClient(app2) as c2:
            job2 = c2.post("/api/scenarios", json=body(seed=9)).json()["job_id"]
            status = c2.get(f"/api/scenarios/{job2}")
            assert status.json()["status"] == "done"  # served from disk, no recompute
            payload2 = c2.get(f"/api/scenarios/{job2}/results").json()
        assert payload1 == payload2

    def test_concurrent_polls_read_only(self, client):
        job_id = client.post("/api/scenarios", json=body(seed=11)).json()["job_id"]
        wait_done(client, job_id)
        before = client.get(f"/api/scenarios/{job_id}/results").json()
        for _ in range(5):
            client.get(f"/api/scenarios/{job_id}")
        after = client.get(f"/api/scenarios/{job_id}/results").json()
        assert before == after
