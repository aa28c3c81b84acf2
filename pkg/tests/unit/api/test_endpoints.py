from unittest.mock import patch

import pytest
from fastapi.testclient import TestClient

from app.main import app
from app.models.schemas import ErrorCode, SectionCheckReport

client = TestClient(app)

PAIR = {"dim": 2, "points": [[-0.5, 0.0], [0.5, 0.0]]}


def test_root():
    """Test the root route reports the version"""
    resp = client.get("/")

    assert resp.status_code == 200
    assert resp.json()["version"] == "1.0.0"


def test_health_check():
    """Test the health check"""
    resp = client.get("/api/v1/health")

    assert resp.status_code == 200
    assert resp.json() == {"status": "healthy", "service": "confspace"}


def test_get_cache_stats():
    """Test the cache statistics route"""
    with patch(
        "app.api.endpoints.cache_service.get_stats",
        return_value={"hits": 1, "misses": 2, "size": 3},
    ):
        resp = client.get("/api/v1/cache/stats")

        assert resp.status_code == 200
        assert resp.json() == {"hits": 1, "misses": 2, "size": 3}


class TestAddEndpoint:
    def test_midpoint(self):
        """Test the midpoint is appended"""
        resp = client.post(
            "/api/v1/add", json={"section": "midpoint", "configuration": PAIR}
        )

        assert resp.status_code == 200
        assert resp.json()["points"][0] == [0.0, 0.0]

    def test_inapplicable_section(self):
        """Test an inapplicable section returns 400"""
        three = {"dim": 1, "points": [[0.0], [0.3], [0.6]]}
        resp = client.post(
            "/api/v1/add", json={"section": "midpoint", "configuration": three}
        )

        assert resp.status_code == 400
        assert resp.json()["detail"]["code"] == ErrorCode.INVALID_INPUT.value

    def test_invalid_configuration(self):
        """Test an invalid configuration returns a 422 error body"""
        bad = {"dim": 2, "points": [[0.0, 0.0], [2.0, 0.0]]}
        resp = client.post(
            "/api/v1/add", json={"section": "midpoint", "configuration": bad}
        )

        assert resp.status_code == 422
        assert resp.json()["detail"]["code"] == ErrorCode.VALIDATION_ERROR.value
        assert "outside" in resp.json()["detail"]["message"]


class TestCachedEndpoints:
    @pytest.fixture(autouse=True)
    def setup(self):
        self.p_cache = patch("app.api.endpoints.cache_service")
        self.m_cache = self.p_cache.start()
        self.m_cache.get.return_value = None

        yield
        patch.stopall()

    def test_verify(self):
        """Test a verify report is computed and cached"""
        req = {"section": "add-near:1,2", "n": 3, "m": 2, "samples": 50, "seed": 1}
        resp = client.post("/api/v1/verify", json=req)

        assert resp.status_code == 200
        data = resp.json()
        assert data["passed"]
        assert data["samples_run"] == 50
        assert data["manifest"]["subcommand"] == "verify"
        self.m_cache.set.assert_called_once()

    def test_verify_unknown_section(self):
        """Test an unknown section returns 400"""
        req = {"section": "nowhere", "n": 2, "m": 2}
        resp = client.post("/api/v1/verify", json=req)

        assert resp.status_code == 400
        assert resp.json()["detail"]["code"] == ErrorCode.INVALID_INPUT.value

    def test_verify_returns_cached_report(self):
        """Test a cached report skips the computation"""
        self.m_cache.get.return_value = SectionCheckReport(
            section="midpoint",
            n=2,
            m=2,
            seed=0,
            samples_run=1,
            worst_gap=0.5,
            worst_containment_excess=0.0,
            equivariance_checked=True,
            passed=True,
        )
        with patch("app.api.endpoints.verify_section") as m_verify:
            resp = client.post(
                "/api/v1/verify", json={"section": "midpoint", "n": 2, "m": 2}
            )

        m_verify.assert_not_called()
        assert resp.status_code == 200
        assert resp.json()["samples_run"] == 1

    def test_obstruct_midpoint(self):
        """Test the midpoint coefficients over HTTP"""
        resp = client.post(
            "/api/v1/obstruct", json={"section": "midpoint", "n": 2, "seed": 7}
        )

        assert resp.status_code == 200
        data = resp.json()
        assert data["identity_holds"]
        assert data["lambda_values"] == {"2": 1}

    def test_obstruct_centroid_reports_witness(self):
        """Test the centroid witness is returned in-band"""
        resp = client.post("/api/v1/obstruct", json={"section": "centroid", "n": 3})

        assert resp.status_code == 200
        assert resp.json()["collision_witness"]["kind"] == "collision"

    def test_obstruct_rejects_single_point(self):
        """Test fewer than two points fails validation"""
        resp = client.post("/api/v1/obstruct", json={"section": "centroid", "n": 1})
        assert resp.status_code == 422

    def test_fixed(self):
        """Test the contraction search converges"""
        req = {"map": "contraction:0.5,0.6,0", "n": 1, "m": 2}
        resp = client.post("/api/v1/fixed", json=req)

        assert resp.status_code == 200
        assert resp.json()["converged"]


class TestHomotopyEndpoint:
    def test_trace(self):
        """Test the trace runs through both phases"""
        req = {"section": "biased:0.25", "configuration": PAIR, "frames": 4}
        resp = client.post("/api/v1/homotopy", json=req)

        assert resp.status_code == 200
        data = resp.json()
        assert data["phase"][0] == "scaling"
        assert data["phase"][-1] == "line"
        assert len(data["frames"]) == 7

    def test_requires_pair(self):
        """Test a homotopy needs exactly two points"""
        three = {"dim": 1, "points": [[0.0], [0.3], [0.6]]}
        resp = client.post(
            "/api/v1/homotopy", json={"section": "midpoint", "configuration": three}
        )
        assert resp.status_code == 400
