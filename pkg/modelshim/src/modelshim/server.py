"""The three JSON endpoints.

POST /classify {"prompt"} -> {"label", "scores"}
POST /convert  {"stage", "input_name", "input_base64"} -> {"output_base64"}
GET  /health   -> {"status", "classifier_loaded", "stages"}

Request bodies are parsed by hand so every error leaves the server as a
plain {"error": "..."} document with the intended status code. Handlers are
stateless between requests; the only shared mutable state is each model's
invocation lock.
"""

from __future__ import annotations

import base64
import binascii
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from modelshim.config import ConfigurationError, ShimConfig
from modelshim.models import (
    ModelLoadError,
    Serialized,
    TaskScorer,
    load_stage_model,
)


@dataclass
class ShimState:
    classifier: Serialized | None
    classifier_error: str
    stage_models: dict[str, Serialized]


def build_state(config: ShimConfig) -> ShimState:
    classifier = None
    classifier_error = ""
    if config.classifier_path:
        try:
            classifier = Serialized(TaskScorer.from_file(config.classifier_path))
        except ModelLoadError as exc:
            classifier_error = str(exc)
    else:
        classifier_error = "no classifier path configured"

    stage_models = {
        stage: Serialized(load_stage_model(stage, identifier))
        for stage, identifier in config.stage_models.items()
    }

    if classifier is None and not stage_models:
        raise ConfigurationError(
            f"refusing to start: classifier unavailable ({classifier_error})"
            " and no conversion stage is bound"
        )
    return ShimState(classifier, classifier_error, stage_models)


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=status)


async def _json_object(request: Request) -> dict | JSONResponse:
    try:
        payload = await request.json()
    except Exception:
        return _error(400, "body must be a JSON object")
    if not isinstance(payload, dict):
        return _error(400, "body must be a JSON object")
    return payload


def create_app(config: ShimConfig) -> FastAPI:
    state = build_state(config)
    app = FastAPI(title="modelshim", docs_url=None, redoc_url=None)
    app.state.shim = state

    @app.post("/classify")
    async def classify(request: Request):
        payload = await _json_object(request)
        if isinstance(payload, JSONResponse):
            return payload
        prompt = payload.get("prompt")
        if not isinstance(prompt, str) or not prompt.strip():
            return _error(400, "prompt is empty")
        if state.classifier is None:
            return _error(503, "classifier model is not loaded")
        with state.classifier.lock:
            label, scores = state.classifier.inner.classify(prompt)
        return {"label": label, "scores": scores}

    @app.post("/convert")
    async def convert(request: Request):
        payload = await _json_object(request)
        if isinstance(payload, JSONResponse):
            return payload
        stage = payload.get("stage")
        model = state.stage_models.get(stage) if isinstance(stage, str) else None
        if model is None:
            return _error(404, f"no model bound for stage {stage}")
        input_name = payload.get("input_name")
        if not isinstance(input_name, str) or not input_name:
            return _error(422, "input_name is required")
        encoded = payload.get("input_base64")
        if not isinstance(encoded, str):
            return _error(422, "input_base64 is required")
        try:
            data = base64.b64decode(encoded, validate=True)
        except (binascii.Error, ValueError):
            return _error(422, "input_base64 is not valid base64")
        try:
            with model.lock:
                output = model.inner.run(input_name, data)
        except Exception as exc:
            return _error(500, f"model failure: {exc}")
        return {"output_base64": base64.b64encode(output).decode("ascii")}

    @app.get("/health")
    async def health():
        return {
            "status": "ok",
            "classifier_loaded": state.classifier is not None,
            "stages": sorted(state.stage_models),
        }

    return app
