"""HTTP service tests.

Requests run in-process against the ASGI app (no socket), which also
means the lifespan hook does not fire unless a test opts in via
``TestClient``.  That split is used deliberately: the plain transport
pins the not-yet-loaded 503 path, the TestClient pins load-on-startup.
"""

import json
import pathlib

import anyio
import httpx
import pytest

from crcscreen.data import FEATURE_COLUMNS, FeatureVector
from crcscreen.ensemble import ensemble_predict, fit_ensemble
from crcscreen.learners.base import ClassifierKind
from crcscreen.service import create_app

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

GOOD_BODY = {"fit_result": 120, "bmi": 31, "age": 66, "diabetes": 1, "smoking": 0}
LOW_RISK_BODY = {"fit_result": 0.1, "bmi": 22.0, "age": 50, "diabetes": 0, "smoking": 0}


def request(app, method, url, **kwargs):
    """One in-process request; returns the httpx response."""

    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport, base_url="http://testserver") as c:
            return await c.request(method, url, **kwargs)

    return anyio.run(go)


@pytest.fixture(scope="module")
def app(trained_model):
    return create_app(ensemble=trained_model)


class TestHealth:
    def test_ok_with_model(self, app):
        resp = request(app, "GET", "/health")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok", "model_version": "1"}

    def test_unready_app_answers_503_everywhere(self):
        bare = create_app()
        for method, path in (("GET", "/health"), ("GET", "/model/info")):
            resp = request(bare, method, path)
            assert resp.status_code == 503
            assert resp.json() == {
                "error": {"category": "unavailable", "message": "model not loaded"}
            }
        resp = request(bare, "POST", "/predict", json=GOOD_BODY)
        assert resp.status_code == 503

    @pytest.mark.filterwarnings("ignore::Warning")
    def test_model_path_loads_on_startup_only(self, model_path):
        lazy = create_app(model_path=str(model_path))
        # without the lifespan the load never happens
        assert request(lazy, "GET", "/health").status_code == 503

        from fastapi.testclient import TestClient

        with TestClient(create_app(model_path=str(model_path))) as client:
            resp = client.get("/health")
            assert resp.status_code == 200
            assert resp.json()["status"] == "ok"


class TestModelInfo:
    def test_reports_members_schema_and_scaling(self, app, trained_model):
        resp = request(app, "GET", "/model/info")
        assert resp.status_code == 200
        doc = resp.json()
        scaling = trained_model.members[0].scaling
        assert doc == {
            "format_version": "1",
            "members": [kind.value for kind in trained_model.kinds],
            "feature_schema": list(FEATURE_COLUMNS),
            "scaling": {
                "means": [float(v) for v in scaling.means],
                "stds": [float(v) for v in scaling.stds],
            },
            "tie_break": trained_model.tie_break,
            "fit_binarize_threshold": None,
        }

    def test_reflects_pruned_member_subset(self, ds300, light_hp):
        pair = (ClassifierKind.LOGISTIC_REGRESSION, ClassifierKind.DECISION_TREE)
        small = fit_ensemble(pair, ds300, light_hp)
        resp = request(create_app(ensemble=small), "GET", "/model/info")
        assert resp.json()["members"] == ["logistic_regression", "decision_tree"]


class TestPredict:
    @pytest.mark.parametrize("body", [GOOD_BODY, LOW_RISK_BODY], ids=["high", "low"])
    def test_matches_library_prediction(self, app, trained_model, body):
        resp = request(app, "POST", "/predict", json=body)
        assert resp.status_code == 200
        doc = resp.json()
        pred = ensemble_predict(trained_model, FeatureVector(**body))
        assert doc == {
            "probability": pred.soft_score,
            "label": "positive" if pred.majority_label == 1 else "negative",
            "votes": [
                {"kind": kind.value, "vote": int(vote), "score": float(score)}
                for kind, vote, score in zip(
                    trained_model.kinds, pred.votes, pred.member_scores
                )
            ],
            "model_version": "1",
        }

    def test_both_labels_reachable(self, app):
        high = request(app, "POST", "/predict", json=GOOD_BODY).json()
        low = request(app, "POST", "/predict", json=LOW_RISK_BODY).json()
        assert high["label"] == "positive"
        assert low["label"] == "negative"

    def test_extra_fields_are_ignored(self, app):
        tagged = {**GOOD_BODY, "name": "subject-1"}
        assert (
            request(app, "POST", "/predict", json=tagged).json()
            == request(app, "POST", "/predict", json=GOOD_BODY).json()
        )

    def test_int_and_float_encodings_agree(self, app):
        as_floats = {k: float(v) for k, v in GOOD_BODY.items()}
        assert (
            request(app, "POST", "/predict", json=as_floats).json()
            == request(app, "POST", "/predict", json=GOOD_BODY).json()
        )

    @pytest.mark.parametrize("missing", FEATURE_COLUMNS)
    def test_missing_field_is_400(self, app, missing):
        body = {k: v for k, v in GOOD_BODY.items() if k != missing}
        resp = request(app, "POST", "/predict", json=body)
        assert resp.status_code == 400
        assert resp.json() == {
            "error": {
                "category": "missing",
                "message": f"{missing} is required",
                "field": missing,
            }
        }

    @pytest.mark.parametrize(
        "field,value",
        [("age", "sixty"), ("smoking", True), ("bmi", None), ("fit_result", [1])],
    )
    def test_non_numeric_value_is_400(self, app, field, value):
        resp = request(app, "POST", "/predict", json={**GOOD_BODY, field: value})
        assert resp.status_code == 400
        assert resp.json() == {
            "error": {
                "category": "type",
                "message": f"{field} must be a number",
                "field": field,
            }
        }

    @pytest.mark.parametrize(
        "field,value,message",
        [
            ("fit_result", -5, "fit_result must be >= 0, got -5"),
            ("bmi", 500, "bmi must be in [10, 80], got 500"),
            ("age", 150, "age must be in [18, 120], got 150"),
            ("diabetes", 2, "diabetes must be 0 or 1, got 2"),
            ("smoking", 0.5, "smoking must be 0 or 1, got 0.5"),
        ],
    )
    def test_out_of_range_value_is_400(self, app, field, value, message):
        resp = request(app, "POST", "/predict", json={**GOOD_BODY, field: value})
        assert resp.status_code == 400
        assert resp.json() == {
            "error": {"category": "range", "message": message, "field": field}
        }

    def test_non_finite_number_is_400(self, app):
        body = '{"fit_result": NaN, "bmi": 27.0, "age": 65, "diabetes": 0, "smoking": 1}'
        resp = request(
            app, "POST", "/predict",
            content=body, headers={"content-type": "application/json"},
        )
        assert resp.status_code == 400
        assert resp.json()["error"] == {
            "category": "range",
            "message": "fit_result must be finite",
            "field": "fit_result",
        }

    def test_malformed_json_is_400(self, app):
        resp = request(
            app, "POST", "/predict",
            content=b"{not json", headers={"content-type": "application/json"},
        )
        assert resp.status_code == 400
        assert resp.json() == {
            "error": {"category": "malformed", "message": "request body must be valid JSON"}
        }

    @pytest.mark.parametrize("body", ["[1, 2, 3]", "42", '"text"', "null"])
    def test_non_object_body_is_400(self, app, body):
        resp = request(
            app, "POST", "/predict",
            content=body, headers={"content-type": "application/json"},
        )
        assert resp.status_code == 400
        assert resp.json() == {
            "error": {"category": "malformed", "message": "request body must be a JSON object"}
        }

    def test_validation_never_answers_422(self, app):
        bad_bodies = [
            {},
            {"fit_result": 1},
            {**GOOD_BODY, "age": "x"},
            {**GOOD_BODY, "bmi": -1},
            [1],
            None,
        ]
        for body in bad_bodies:
            assert request(app, "POST", "/predict", json=body).status_code == 400

    def test_boundary_fixture_verdicts(self, app):
        with open(FIXTURES / "boundary_cases.json", encoding="utf-8") as fh:
            cases = json.load(fh)["cases"]
        assert len(cases) == 12
        for case in cases:
            resp = request(app, "POST", "/predict", json=case["payload"])
            if case["valid"]:
                assert resp.status_code == 200, case["name"]
            else:
                assert resp.status_code == 400, case["name"]
                assert resp.json()["error"]["field"] == case["field"], case["name"]

    def test_binarized_model_round_trip(self, ds300, light_hp):
        pair = (ClassifierKind.LOGISTIC_REGRESSION, ClassifierKind.DECISION_TREE)
        model = fit_ensemble(pair, ds300, light_hp, fit_binarize_threshold=100.0)
        app = create_app(ensemble=model)
        assert request(app, "GET", "/model/info").json()["fit_binarize_threshold"] == 100.0
        above = request(app, "POST", "/predict", json={**GOOD_BODY, "fit_result": 150}).json()
        far_above = request(app, "POST", "/predict", json={**GOOD_BODY, "fit_result": 4000}).json()
        below = request(app, "POST", "/predict", json={**GOOD_BODY, "fit_result": 50}).json()
        assert above == far_above
        assert above["probability"] != below["probability"]


class TestHttpErrors:
    def test_unknown_path_shape(self, app):
        resp = request(app, "GET", "/nope")
        assert resp.status_code == 404
        assert resp.json() == {"error": {"category": "http", "message": "Not Found"}}

    def test_wrong_method_shape(self, app):
        resp = request(app, "GET", "/predict")
        assert resp.status_code == 405
        assert resp.json() == {"error": {"category": "http", "message": "Method Not Allowed"}}


class TestCors:
    @pytest.mark.parametrize(
        "origin", ["http://localhost:5173", "http://127.0.0.1:8080", "https://localhost"]
    )
    def test_loopback_origin_allowed(self, app, origin):
        resp = request(app, "GET", "/health", headers={"origin": origin})
        assert resp.headers.get("access-control-allow-origin") == origin

    @pytest.mark.parametrize(
        "origin", ["https://evil.example", "http://localhost.evil.example", "http://10.0.0.5"]
    )
    def test_external_origin_not_allowed(self, app, origin):
        resp = request(app, "GET", "/health", headers={"origin": origin})
        assert "access-control-allow-origin" not in resp.headers

    def test_preflight_allows_post(self, app):
        resp = request(
            app, "OPTIONS", "/predict",
            headers={
                "origin": "http://127.0.0.1:8080",
                "access-control-request-method": "POST",
            },
        )
        assert resp.status_code == 200
        assert resp.headers["access-control-allow-origin"] == "http://127.0.0.1:8080"
        assert "POST" in resp.headers["access-control-allow-methods"]


class TestConcurrency:
    def test_parallel_identical_requests_identical_answers(self, app):
        results = [None] * 8

        async def go():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://testserver"
            ) as client:

                async def one(i):
                    resp = await client.post("/predict", json=GOOD_BODY)
                    results[i] = (resp.status_code, resp.json())

                async with anyio.create_task_group() as tg:
                    for i in range(len(results)):
                        tg.start_soon(one, i)

        anyio.run(go)
        baseline = request(app, "POST", "/predict", json=GOOD_BODY)
        expected = (baseline.status_code, baseline.json())
        assert all(result == expected for result in results)
