"""Scoring service: a versioned REST API over the profile store, consumed
by the browser demo. Accepts raw traces so feature extraction stays
server-side and version-consistent."""

from __future__ import annotations

import json
import os
import tempfile
import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import authenticator as auth
from .config import RunConfig
from .features import extract_features
from .traces import (
    QualityPolicy,
    StructuralError,
    normalize,
    quality_gate,
    trace_from_dict,
    trace_to_dict,
)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


class ProfileStore:
    """Directory of per-profile JSON documents with atomic write-rename and
    single-writer locking per profile."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, profile_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(profile_id, threading.Lock())

    def _path(self, profile_id: str) -> Path:
        safe = "".join(c if c.isalnum() or c in "-_" else "_" for c in profile_id)
        return self.root / f"{safe}.json"

    def exists(self, profile_id: str) -> bool:
        return self._path(profile_id).exists()

    def load(self, profile_id: str) -> dict:
        path = self._path(profile_id)
        if not path.exists():
            raise ApiError(404, "not_found", f"profile {profile_id!r} does not exist")
        return json.loads(path.read_text())

    def save(self, profile_id: str, document: dict) -> None:
        path = self._path(profile_id)
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(document, fh)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def delete(self, profile_id: str) -> None:
        path = self._path(profile_id)
        if not path.exists():
            raise ApiError(404, "not_found", f"profile {profile_id!r} does not exist")
        path.unlink()


def _training_config(config: RunConfig) -> auth.TrainingConfig:
    return auth.TrainingConfig(
        model_type=config.model_types[0],
        quantile_q=config.quantile_q,
        shrinkage=config.shrinkage(),
        grid=config.grid,
        dp_hyper=config.dp_hyper(),
        dp_seed=config.seed,
    )


def create_app(store_dir, config: RunConfig | None = None, static_dir=None) -> FastAPI:
    config = config or RunConfig(model_types=("shrunk",))
    store = ProfileStore(store_dir)
    policy = config.quality_policy()
    training = _training_config(config)

    app = FastAPI(title="swipeguard scoring service", version="1")

    @app.exception_handler(ApiError)
    async def api_error_handler(_req: Request, exc: ApiError):
        return _error(exc.status, exc.code, exc.message)

    def status_payload(doc: dict) -> dict:
        payload = {
            "profile_id": doc["profile_id"],
            "state": doc["state"],
            "model_type": doc["model_type"],
            "enrolled_count": len(doc["enrolled_traces"]),
            "enrollment_target": doc["enrollment_target"],
            "threshold": doc.get("threshold"),
            "failure_reason": doc.get("failure_reason"),
        }
        model = doc.get("model")
        if model and model.get("model_type") == "dp_mixture":
            payload["component_count"] = len(model["component_stats"]["counts"])
        return payload

    def parse_trace(body: dict):
        try:
            trace = trace_from_dict(body)
        except StructuralError as exc:
            raise ApiError(400, "malformed", str(exc)) from exc
        verdict = quality_gate(trace, policy)
        if not verdict.accepted:
            raise ApiError(422, "quality_reject", verdict.reason)
        return trace, extract_features(normalize(trace), config.grid)

    @app.post("/v1/profiles", status_code=201)
    async def create_profile(body: dict):
        profile_id = str(body.get("profile_id", "")).strip()
        if not profile_id:
            raise ApiError(400, "malformed", "profile_id is required")
        with store.lock(profile_id):
            if store.exists(profile_id):
                raise ApiError(409, "already_exists", f"profile {profile_id!r} exists")
            profile = auth.Profile(
                profile_id, config=training, enrollment_target=config.enrollment_target
            )
            doc = auth.profile_to_dict(profile)
            doc["enrolled_traces"] = []
            store.save(profile_id, doc)
            return status_payload(doc)

    @app.get("/v1/profiles/{profile_id}")
    async def profile_status(profile_id: str):
        return status_payload(store.load(profile_id))

    @app.delete("/v1/profiles/{profile_id}", status_code=204)
    async def delete_profile(profile_id: str):
        with store.lock(profile_id):
            store.delete(profile_id)

    @app.post("/v1/profiles/{profile_id}/enroll")
    async def enroll(profile_id: str, body: dict):
        trace, feature = parse_trace(body)
        with store.lock(profile_id):
            doc = store.load(profile_id)
            profile = auth.profile_from_dict(doc, config=training)
            if profile.state != auth.ENROLLING:
                raise ApiError(409, "not_enrolling", f"profile is {profile.state}")
            auth.enroll(profile, feature)
            new_doc = auth.profile_to_dict(profile)
            new_doc["enrolled_traces"] = doc["enrolled_traces"] + [trace_to_dict(trace)]
            store.save(profile_id, new_doc)
            payload = status_payload(new_doc)
            payload["training_outcome"] = (
                None if profile.state == auth.ENROLLING else profile.state
            )
            return payload

    @app.post("/v1/profiles/{profile_id}/authenticate")
    async def authenticate(profile_id: str, body: dict):
        trace, feature = parse_trace(body)
        doc = store.load(profile_id)
        profile = auth.profile_from_dict(doc, config=training)
        try:
            decision = auth.authenticate(profile, feature)
        except auth.NotReadyError as exc:
            raise ApiError(409, "not_ready", str(exc)) from exc
        return {
            "score": decision.score,
            "threshold": decision.threshold,
            "accept": decision.accept,
            "model_type": decision.model_type,
        }

    @app.get("/v1/profiles/{profile_id}/replays")
    async def replays(profile_id: str):
        doc = store.load(profile_id)
        return {"profile_id": profile_id, "traces": doc["enrolled_traces"]}

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="demo")

    return app
