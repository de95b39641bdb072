import numpy as np
import pytest
from fastapi.testclient import TestClient

from spectralte.bounds import dpo_bounds
from spectralte.service.app import app
from conftest import binary_symmetric, symmetric


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def listed(m):
    return np.asarray(m, dtype=float).tolist()


class TestEnvelope:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"

    def test_dpo_matches_library_bit_for_bit(self, client, rng):
        y1 = binary_symmetric(rng, 5)
        y0 = binary_symmetric(rng, 5)
        r = client.post(
            "/dpo", json={"y1": listed(y1), "y0": listed(y0), "t1": 0.0, "t0": 0.0}
        )
        assert r.status_code == 200
        direct = dpo_bounds(y1, y0, 0.0, 0.0)
        payload = r.json()["payload"]
        assert payload["lower"] == direct.lower
        assert payload["upper"] == direct.upper
        assert payload["binding_lower"] == direct.binding_lower

    def test_envelope_fields(self, client, rng):
        y = binary_symmetric(rng, 4)
        body = client.post(
            "/dpo", json={"y1": listed(y), "y0": listed(y), "t1": 0.0, "t0": 0.0}
        ).json()
        assert set(body) == {
            "kind",
            "inputs_digest",
            "parameters",
            "payload",
            "library_version",
        }
        assert body["kind"] == "dpo_bounds"
        assert len(body["inputs_digest"]) == 64


class TestErrors:
    def test_domain_error_is_400(self, client):
        r = client.post(
            "/dpo",
            json={"y1": [[0.0, 1.0], [0.5, 0.0]], "y0": [[0.0]], "t1": 0.0, "t0": 0.0},
        )
        assert r.status_code == 400
        assert "symmetric" in r.json()["detail"]

    def test_schema_error_is_422(self, client):
        r = client.post("/dte", json={"y1": [[0.0]], "y0": [[0.0]]})
        assert r.status_code == 422

    def test_oracle_guard_is_400(self, client):
        big = listed(np.zeros((9, 9)))
        r = client.post("/oracle", json={"op": "dpo", "y1": big, "y0": big, "t1": 0, "t0": 0})
        assert r.status_code == 400
        assert "guard" in r.json()["detail"]


class TestEndpoints:
    def test_dte_curve(self, client, rng):
        y = symmetric(rng, 4)
        r = client.post(
            "/dte",
            json={
                "y1": listed(y),
                "y0": listed(y),
                "grid": [-1.0, 0.0, 1.0],
                "monotonize": True,
            },
        )
        body = r.json()
        assert body["kind"] == "dte_curve"
        assert body["payload"]["monotonized"] is True
        assert len(body["payload"]["lower"]) == 3

    def test_cells_weighted_villages(self, client, rng):
        pairs = [
            {
                "y1": listed(binary_symmetric(rng, 4)),
                "y0": listed(binary_symmetric(rng, 4)),
            }
            for _ in range(3)
        ]
        r = client.post("/cells", json={"pairs": pairs, "weights": [4.0, 5.0, 6.0]})
        body = r.json()
        assert body["kind"] == "cell_bounds"
        cells = body["payload"]["cells"]
        assert [c["cell"] for c in cells] == ["(1,1)", "(1,0)", "(0,1)", "(0,0)"]
        assert len(body["payload"]["per_village"]) == 3

    def test_ste_and_hetero(self, client, rng):
        y1 = listed(symmetric(rng, 5))
        y0 = listed(symmetric(rng, 5))
        r = client.post("/ste", json={"y1": y1, "y0": y0, "basis": "untreated"})
        assert r.json()["payload"]["basis_tag"] == "untreated"
        r = client.post(
            "/hetero",
            json={"op": "dpo", "y1": y1, "y0": y0, "t1": 0.0, "t0": 0.0, "mode": "paperExact"},
        )
        assert r.json()["kind"] == "hetero_dpo_bounds"

    def test_bipartite(self, client, rng):
        b = listed((rng.random((3, 4)) < 0.5).astype(float))
        r = client.post("/bipartite", json={"op": "cells", "b1": b, "b0": b})
        assert r.status_code == 200
        assert r.json()["kind"] == "bipartite_cell_bounds"

    def test_randtest_deterministic_and_seed_echoed(self, client, rng):
        y1 = listed(binary_symmetric(rng, 5))
        y0 = listed(binary_symmetric(rng, 12))
        req = {
            "design": "censored",
            "y1": y1,
            "y0": y0,
            "pi": 0.4,
            "resamples": 19,
            "seed": 11,
        }
        a = client.post("/randtest", json=req).json()
        b = client.post("/randtest", json=req).json()
        assert a == b
        assert a["parameters"]["seed"] == 11
        # omitted seed gets generated and echoed
        del req["seed"]
        c = client.post("/randtest", json=req).json()
        assert isinstance(c["parameters"]["seed"], int)

    def test_smooth_default_bandwidth_and_kernel(self, client, rng):
        y = listed(symmetric(rng, 6))
        r = client.post(
            "/smooth", json={"op": "dpo", "y1": y, "y0": y, "t1": 0.0, "t0": 0.0}
        )
        assert r.json()["parameters"]["bandwidth"] > 0
        assert r.json()["parameters"]["kernel"] == "oneSidedQuintic"
        r = client.post("/smooth", json={"op": "cdf", "y1": y, "y0": y, "y": 0.0})
        assert r.json()["parameters"]["kernel"] == "symmetricQuartic"
        assert 0.0 <= r.json()["payload"]["value"] <= 1.0

    def test_hetero_ste_endpoint(self, client, rng):
        y1 = listed(symmetric(rng, 5))
        y0 = listed(symmetric(rng, 5))
        r = client.post(
            "/hetero", json={"op": "ste", "y1": y1, "y0": y0, "basis": "untreated"}
        )
        assert r.status_code == 200
        body = r.json()
        assert body["kind"] == "hetero_ste_matrix"
        assert body["payload"]["basis_tag"] == "hetero-untreated"

    def test_synth_reproducible(self, client):
        req = {"generator": "social", "n": 8, "seed": 5}
        a = client.post("/synth", json=req).json()
        b = client.post("/synth", json=req).json()
        assert a["payload"]["y1_obs"] == b["payload"]["y1_obs"]
        assert a["payload"]["rank_invariant"] is True

    def test_density(self, client, rng):
        r = client.post("/density", json={"values": rng.normal(size=20).tolist()})
        body = r.json()
        assert len(body["payload"]["y"]) == 401
        assert len(body["payload"]["density"]) == 401
