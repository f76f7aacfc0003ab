"""HTTP API: endpoint contracts, limits, determinism, error mapping."""

import copy

import pytest
import yaml
from fastapi.testclient import TestClient

from crtassure.io import preset_text
from crtassure.priors import sample_prior
from crtassure.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def preset_body(name: str, s: int = None) -> dict:
    body = yaml.safe_load(preset_text(name))
    if s is not None:
        body["design"]["s"] = s
    return body


class TestPlumbing:
    def test_healthz(self, client):
        r = client.get("/healthz")
        assert r.status_code == 200
        assert r.json() == {"status": "ok"}

    def test_presets_carry_name_text_and_mapping(self, client):
        r = client.get("/api/presets")
        assert r.status_code == 200
        entries = r.json()["presets"]
        assert [e["name"] for e in entries] == [
            "icons_assurance_full_psi",
            "icons_assurance_rho_only",
            "icons_power",
            "icons_prior_sensitivity",
        ]
        for entry in entries:
            assert yaml.safe_load(entry["text"]) == entry["scenario"]
            assert "design" in entry["scenario"]

    def test_schema_published(self, client):
        r = client.get("/api/schema")
        assert r.status_code == 200
        props = r.json()["properties"]
        assert {"design", "prior", "priors", "search"} <= set(props)

    def test_compute_time_header(self, client):
        r = client.post("/api/power", json=preset_body("icons_power"))
        assert float(r.headers["X-Compute-Ms"]) >= 0.0


class TestPowerAndAssurance:
    def test_power_point_golden(self, client):
        r = client.post("/api/power", json=preset_body("icons_power"))
        assert r.status_code == 200
        body = r.json()
        assert body["operation"] == "power"
        assert body["s"] == 1
        assert body["result"]["value"] == pytest.approx(0.7976808532838888, abs=1e-12)

    def test_assurance_equals_power_for_point_prior(self, client):
        body = preset_body("icons_power")
        pa = client.post("/api/assurance", json=body).json()
        pp = client.post("/api/power", json=body).json()
        assert pa["result"]["value"] == pp["result"]["value"]
        assert pa["result"]["mc_stderr"] == 0.0

    def test_assurance_rho_only(self, client):
        r = client.post("/api/assurance", json=preset_body("icons_assurance_rho_only", s=2000))
        assert r.status_code == 200
        body = r.json()
        assert body["s"] == 2000 and body["seed"] == 1729
        assert 0.77 <= body["result"]["value"] <= 0.84

    def test_missing_cluster_size_is_path_qualified_400(self, client):
        body = preset_body("icons_power")
        del body["design"]["cluster_size"]
        r = client.post("/api/assurance", json=body)
        assert r.status_code == 400
        assert "/design/cluster_size" in r.json()["detail"]


class TestSampleSize:
    def test_power_preset_at_50_clusters(self, client):
        body = preset_body("icons_power")
        body["design"]["clusters"] = 50
        r = client.post("/api/samplesize", json=body)
        assert r.status_code == 200
        result = r.json()["result"]
        assert result["n_bar"] == 9
        assert result["n_total"] == 450
        assert result["method"] == "power"

    def test_cluster_direction(self, client):
        body = preset_body("icons_power")
        body["design"]["cluster_size"] = 9
        body["search"]["direction"] = "clusters"
        r = client.post("/api/samplesize", json=body)
        assert r.status_code == 200
        assert r.json()["result"]["c_total"] == 50

    def test_infeasible_gives_422_with_plateau(self, client):
        body = preset_body("icons_power")
        body["prior"]["rho"] = {"kind": "point", "value": 0.3}
        body["search"]["target"] = 0.9
        r = client.post("/api/samplesize", json=body)
        assert r.status_code == 422
        detail = r.json()["detail"]
        assert detail["target"] == 0.9
        assert 0 < detail["plateau"] < 0.9
        assert detail["result"]["feasible"] is False

    def test_assurance_search_matches_preset_golden(self, client):
        r = client.post("/api/samplesize", json=preset_body("icons_assurance_rho_only"))
        assert r.status_code == 200
        assert r.json()["result"]["n_bar"] == 19


class TestCurveAndSweep:
    def test_fifty_point_curve_monotone(self, client):
        body = preset_body("icons_assurance_rho_only", s=2000)
        body["search"]["ranges"] = {"n_bar": [float(v) for v in range(2, 52)]}
        r = client.post("/api/curve", json=body)
        assert r.status_code == 200
        values = [p["value"] for p in r.json()["result"]["points"]]
        assert len(values) == 50
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_curve_requires_a_range(self, client):
        body = preset_body("icons_power")
        r = client.post("/api/curve", json=body)
        assert r.status_code == 400
        assert "/search/ranges/n_bar" in r.json()["detail"]

    def test_nu_sweep_curves(self, client):
        body = preset_body("icons_assurance_rho_only", s=500)
        body["search"]["ranges"] = {"n_bar": [10, 14], "nu": "0:0.6:0.3"}
        r = client.post("/api/nu-sweep", json=body)
        assert r.status_code == 200
        curves = r.json()["result"]["curves"]
        assert [c["nu"] for c in curves] == [0.0, 0.3, 0.6]
        assert len(curves[0]["points"]) == 2

    def test_nu_sweep_rejects_induced_joint(self, client):
        body = {
            "design": {"delta_m": 2.52, "clusters": 40, "s": 500},
            "prior": {
                "joint": {
                    "kind": "induced",
                    "sigma_b_sq": {"shape": 0.5, "rate": 0.2},
                    "sigma_w_sq": {"shape": 20.0, "rate": 0.3},
                },
                "nu": {"kind": "point", "value": 0.49},
            },
            "search": {"ranges": {"n_bar": [10, 14], "nu": [0, 0.3]}},
        }
        r = client.post("/api/nu-sweep", json=body)
        assert r.status_code == 400
        assert "rho marginal" in r.json()["detail"]


class TestComparePriors:
    def test_sensitivity_preset_grid(self, client):
        r = client.post("/api/compare-priors", json=preset_body("icons_prior_sensitivity", s=1000))
        assert r.status_code == 200
        body = r.json()
        rows = body["result"]["rows"]
        assert len(rows) == 4
        labels = {row["scenario_label"] for row in rows}
        assert labels == {"fitted", "diffuse"}
        power_rows = {r_["scenario_label"]: r_ for r_ in rows if r_["method"] == "power"}
        assert power_rows["fitted"]["n_bar"] == power_rows["diffuse"]["n_bar"]

    def test_requires_cluster_values(self, client):
        body = preset_body("icons_prior_sensitivity", s=500)
        del body["search"]["clusters"]
        r = client.post("/api/compare-priors", json=body)
        assert r.status_code == 400
        assert "/search/clusters" in r.json()["detail"]


class TestPriorSample:
    def test_draws_match_core_sampler(self, client):
        body = preset_body("icons_assurance_full_psi", s=300)
        r = client.post("/api/prior-sample", json=body)
        assert r.status_code == 200
        result = r.json()["result"]
        assert len(result["rho"]) == 300
        from crtassure.io import scenario_from_mapping

        doc = scenario_from_mapping(body)
        draws = sample_prior(doc.prior_spec(), 300, doc.design.seed)
        assert result["sigma"] == draws.sigma.tolist()
        assert result["rho"] == draws.rho.tolist()


class TestLimitsAndErrors:
    def test_unknown_key_rejected_with_path(self, client):
        body = preset_body("icons_power")
        body["bogus"] = 1
        r = client.post("/api/power", json=body)
        assert r.status_code == 400
        assert "/bogus" in r.json()["detail"]

    def test_non_mapping_body_rejected(self, client):
        r = client.post("/api/power", json=[1, 2, 3])
        assert r.status_code == 400

    def test_draw_cap_enforced_before_compute(self, client):
        body = preset_body("icons_assurance_rho_only", s=10**6 + 1)
        r = client.post("/api/assurance", json=body)
        assert r.status_code == 400
        assert "cap" in r.json()["detail"]

    def test_curve_point_cap(self, client):
        body = preset_body("icons_assurance_rho_only", s=100)
        body["search"]["ranges"] = {"n_bar": list(range(1, 1100))}
        r = client.post("/api/curve", json=body)
        assert r.status_code == 400
        assert "1099 points exceeds the 1000 cap" in r.json()["detail"]

    def test_time_budget_rejects_oversized_work(self):
        tight = TestClient(create_app(time_budget_s=0.001))
        body = preset_body("icons_assurance_rho_only", s=500_000)
        r = tight.post("/api/samplesize", json=body)
        assert r.status_code == 400
        assert "budget" in r.json()["detail"]

    def test_budget_env_var_honoured(self, monkeypatch):
        monkeypatch.setenv("CRTASSURE_TIME_BUDGET_S", "0.001")
        tight = TestClient(create_app())
        r = tight.post("/api/samplesize", json=preset_body("icons_assurance_rho_only", s=500_000))
        assert r.status_code == 400

    def test_invalid_rho_support_400(self, client):
        body = preset_body("icons_power")
        body["prior"]["rho"] = {"kind": "point", "value": 1.5}
        r = client.post("/api/power", json=body)
        assert r.status_code == 400
        assert "[0, 1)" in r.json()["detail"]


class TestDeterminismAndTraceability:
    def test_identical_body_identical_response_bytes(self, client):
        body = preset_body("icons_assurance_rho_only", s=800)
        r1 = client.post("/api/assurance", json=body)
        r2 = client.post("/api/assurance", json=body)
        assert r1.content == r2.content

    def test_seed_change_changes_result_not_contract(self, client):
        body = preset_body("icons_assurance_rho_only", s=800)
        other = copy.deepcopy(body)
        other["design"]["seed"] = 7
        r1 = client.post("/api/assurance", json=body).json()
        r2 = client.post("/api/assurance", json=other).json()
        assert r1["result"]["value"] != r2["result"]["value"]
        assert r1["spec_digest"] == r2["spec_digest"]
        assert r1["request_digest"] != r2["request_digest"]

    def test_response_echoes_request_digest(self, client):
        body = preset_body("icons_power")
        r1 = client.post("/api/power", json=body)
        r2 = client.post("/api/samplesize", json=body)
        assert r1.json()["request_digest"] == r2.json()["request_digest"]

    def test_cors_configurable(self):
        app = create_app(cors_origins=["http://ui.example"])
        with TestClient(app) as ui_client:
            r = ui_client.options(
                "/api/power",
                headers={
                    "Origin": "http://ui.example",
                    "Access-Control-Request-Method": "POST",
                },
            )
            assert r.headers.get("access-control-allow-origin") == "http://ui.example"
