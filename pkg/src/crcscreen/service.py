"""HTTP prediction service over a persisted majority-vote ensemble.

The wire format is plain UTF-8 JSON with numeric fields (never
string-encoded numbers).  All input checking happens here against the
same range rules the dataset loader uses, so a malformed or out-of-range
body gets a 400 naming the offending field; FastAPI's own 422 validation
path is never exercised.  Responses are pure functions of the loaded
model and the request body: the model is immutable after load and no
request mutates server state.

Privacy posture: the schema has no identifying fields, and request
payload values are never logged (the access log carries method, path,
and status only).
"""

from __future__ import annotations

from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .data import FEATURE_COLUMNS, FeatureVector, check_feature_value
from .ensemble import MajorityVoteEnsemble, ensemble_predict, load_model

# Browser clients are expected only during local development, so CORS is
# limited to loopback origins.
_LOOPBACK_ORIGIN_REGEX = r"^https?://(localhost|127\.0\.0\.1)(:\d+)?$"


def _error(status: int, category: str, message: str, field: str | None = None) -> JSONResponse:
    body = {"category": category, "message": message}
    if field is not None:
        body["field"] = field
    return JSONResponse(status_code=status, content={"error": body})


def validate_payload(payload):
    """Check a /predict body against the feature schema.

    Returns ``(FeatureVector, None)`` on success or ``(None, response)``
    where the response is a 400 naming the first offending field.
    """
    if not isinstance(payload, dict):
        return None, _error(400, "malformed", "request body must be a JSON object")
    for name in FEATURE_COLUMNS:
        if name not in payload:
            return None, _error(400, "missing", f"{name} is required", field=name)
        value = payload[name]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return None, _error(400, "type", f"{name} must be a number", field=name)
        message = check_feature_value(name, value)
        if message is not None:
            return None, _error(400, "range", message, field=name)
    x = FeatureVector(
        fit_result=float(payload["fit_result"]),
        bmi=float(payload["bmi"]),
        age=float(payload["age"]),
        diabetes=int(payload["diabetes"]),
        smoking=int(payload["smoking"]),
    )
    return x, None


def create_app(
    model_path=None, ensemble: MajorityVoteEnsemble | None = None
) -> FastAPI:
    """Build the service app.

    A given ``ensemble`` serves immediately; a ``model_path`` is loaded
    once on startup, and requests arriving before the load completes get
    503.  With neither argument the app stays permanently unready, which
    pins the 503 behaviour in tests.
    """
    state = {"ensemble": ensemble}

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if state["ensemble"] is None and model_path is not None:
            state["ensemble"] = load_model(model_path)
        yield

    app = FastAPI(
        title="crcscreen service",
        lifespan=lifespan,
        docs_url=None,
        redoc_url=None,
        openapi_url=None,
    )
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=_LOOPBACK_ORIGIN_REGEX,
        allow_methods=["GET", "POST"],
        allow_headers=["Content-Type"],
    )

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, exc: StarletteHTTPException):
        return _error(exc.status_code, "http", str(exc.detail))

    @app.get("/health")
    async def health():
        model = state["ensemble"]
        if model is None:
            return _error(503, "unavailable", "model not loaded")
        return {"status": "ok", "model_version": model.version}

    @app.get("/model/info")
    async def model_info():
        model = state["ensemble"]
        if model is None:
            return _error(503, "unavailable", "model not loaded")
        scaling = model.members[0].scaling
        return {
            "format_version": model.version,
            "members": [kind.value for kind in model.kinds],
            "feature_schema": list(FEATURE_COLUMNS),
            "scaling": {
                "means": [float(v) for v in scaling.means],
                "stds": [float(v) for v in scaling.stds],
            },
            "tie_break": model.tie_break,
            "fit_binarize_threshold": model.fit_binarize_threshold,
        }

    @app.post("/predict")
    async def predict(request: Request):
        model = state["ensemble"]
        if model is None:
            return _error(503, "unavailable", "model not loaded")
        try:
            payload = await request.json()
        except Exception:
            return _error(400, "malformed", "request body must be valid JSON")
        x, failure = validate_payload(payload)
        if failure is not None:
            return failure
        try:
            pred = ensemble_predict(model, x)
        except Exception:
            return _error(500, "internal", "internal error")
        return {
            "probability": pred.soft_score,
            "label": "positive" if pred.majority_label == 1 else "negative",
            "votes": [
                {"kind": kind.value, "vote": int(vote), "score": float(score)}
                for kind, vote, score in zip(model.kinds, pred.votes, pred.member_scores)
            ],
            "model_version": model.version,
        }

    return app
