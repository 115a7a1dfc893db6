"""HTTP inference service over an immutable model snapshot.

The service is read-only: training happens offline and the artifact is
loaded at startup. Every request handler reads one snapshot reference, so
concurrent requests never observe a partially swapped model; the admin
reload endpoint replaces the reference atomically.

Environment: ``HS_ASSIST_MODEL_PATH``, ``HS_ASSIST_MANUAL_PATH``,
``HS_ASSIST_KB_PATH`` locate the data when not passed explicitly;
``HS_ASSIST_BIND_ADDR`` the listen address; ``HS_ASSIST_ADMIN_TOKEN``
guards reload; ``HS_ASSIST_CORS_ORIGIN`` the console origin.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .corpus import KnowledgeBase, Manual, load_knowledge_base, load_manual
from .encoder import ModelArtifact, load_artifact
from .report import build_report
from .retrieval import RetrievalConfig
from .version import __version__

MAX_K = 10
MAX_SENTENCES = 50

ENV_MODEL_PATH = "HS_ASSIST_MODEL_PATH"
ENV_MANUAL_PATH = "HS_ASSIST_MANUAL_PATH"
ENV_KB_PATH = "HS_ASSIST_KB_PATH"
ENV_BIND_ADDR = "HS_ASSIST_BIND_ADDR"
ENV_ADMIN_TOKEN = "HS_ASSIST_ADMIN_TOKEN"
ENV_CORS_ORIGIN = "HS_ASSIST_CORS_ORIGIN"

ADMIN_TOKEN_HEADER = "x-admin-token"


@dataclass(frozen=True)
class Snapshot:
    """One immutable bundle of everything inference needs."""

    model: ModelArtifact
    manual: Manual
    kb: KnowledgeBase
    config: RetrievalConfig


@dataclass(frozen=True)
class SnapshotPaths:
    model: Path
    manual: Path
    kb: Path | None

    @classmethod
    def from_env(cls) -> "SnapshotPaths | None":
        model = os.environ.get(ENV_MODEL_PATH)
        manual = os.environ.get(ENV_MANUAL_PATH)
        if not model or not manual:
            return None
        kb = os.environ.get(ENV_KB_PATH)
        return cls(Path(model), Path(manual), Path(kb) if kb else None)


def load_snapshot(paths: SnapshotPaths, config: RetrievalConfig | None = None) -> Snapshot:
    model = load_artifact(paths.model)
    manual = load_manual(paths.manual)
    if paths.kb is not None:
        kb = load_knowledge_base(paths.kb, manual)
    else:
        kb = KnowledgeBase(entries=())
    return Snapshot(model=model, manual=manual, kb=kb, config=config or RetrievalConfig())


class _Holder:
    """Mutable cell whose single reference assignment is the atomic swap."""

    def __init__(self, snapshot: Snapshot | None, paths: SnapshotPaths | None):
        self.snapshot = snapshot
        self.paths = paths


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(
    snapshot: Snapshot | None = None,
    paths: SnapshotPaths | None = None,
    config: RetrievalConfig | None = None,
) -> FastAPI:
    """Build the service; loads from ``paths`` (or the environment) when no
    snapshot is passed directly."""
    if snapshot is None:
        if paths is None:
            paths = SnapshotPaths.from_env()
        if paths is not None:
            snapshot = load_snapshot(paths, config)
    holder = _Holder(snapshot, paths)

    app = FastAPI(title="hs-assist", version=__version__)
    app.state.holder = holder

    origin = os.environ.get(ENV_CORS_ORIGIN, "*")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/v1/health")
    def health():
        if holder.snapshot is None:
            return _error(503, "MODEL_NOT_LOADED", "no model snapshot loaded")
        return {"status": "ok", "model_version": holder.snapshot.model.version}

    @app.get("/api/v1/model/info")
    def model_info():
        snap = holder.snapshot
        if snap is None:
            return _error(503, "MODEL_NOT_LOADED", "no model snapshot loaded")
        return {
            "version": snap.model.version,
            "label_count": len(snap.model.labels),
            "heading_count": len({l[:4] for l in snap.model.labels}),
            "dim": snap.model.dim,
            "vocab_size": len(snap.model.vocab),
            "lambda": snap.config.kb_weight,
            "k_case": snap.config.k_case,
            "temperature": snap.model.temperature,
        }

    @app.get("/api/v1/manual/{heading}")
    def manual_get(heading: str):
        snap = holder.snapshot
        if snap is None:
            return _error(503, "MODEL_NOT_LOADED", "no model snapshot loaded")
        if len(heading) != 4 or not heading.isascii() or not heading.isdigit():
            return _error(400, "MALFORMED_HEADING", f"{heading!r} is not a 4-digit heading")
        hm = snap.manual.get(heading)
        if hm is None:
            return _error(404, "UNKNOWN_HEADING", f"heading {heading} not in manual")
        return {
            "heading": heading,
            "title": hm.title,
            "sentences": [{"sid": s.sid, "text": s.text} for s in hm.sentences],
            "subheadings": dict(hm.subheading_oneliners),
        }

    @app.post("/api/v1/classify")
    async def classify(request: Request):
        snap = holder.snapshot
        if snap is None:
            return _error(503, "MODEL_NOT_LOADED", "no model snapshot loaded")
        try:
            body = await request.json()
        except Exception:
            return _error(422, "INVALID_JSON", "request body is not valid JSON")
        if not isinstance(body, dict):
            return _error(422, "INVALID_JSON", "request body must be a JSON object")

        description = body.get("description", "")
        if not isinstance(description, str) or not description.strip():
            return _error(422, "EMPTY_DESCRIPTION", "description must be a non-empty string")
        k = body.get("k", 3)
        if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= MAX_K:
            return _error(422, "K_OUT_OF_RANGE", f"k must be an integer in [1, {MAX_K}]")
        n_sentences = body.get("n_sentences", 7)
        if (
            not isinstance(n_sentences, int)
            or isinstance(n_sentences, bool)
            or not 1 <= n_sentences <= MAX_SENTENCES
        ):
            return _error(
                422, "N_OUT_OF_RANGE", f"n_sentences must be an integer in [1, {MAX_SENTENCES}]"
            )
        kb_weight = body.get("lambda", snap.config.kb_weight)
        if isinstance(kb_weight, bool) or not isinstance(kb_weight, (int, float)) or kb_weight < 0:
            return _error(422, "LAMBDA_OUT_OF_RANGE", "lambda must be a non-negative number")

        config = RetrievalConfig(
            kb_weight=float(kb_weight),
            k_case=snap.config.k_case,
            n_sentences=n_sentences,
            clamp_negative_kb_sim=snap.config.clamp_negative_kb_sim,
            normalize_text_score=snap.config.normalize_text_score,
        )
        started = time.perf_counter()
        report = build_report(
            snap.model,
            snap.manual,
            snap.kb,
            snap.model.idf,
            description,
            k=k,
            n_sentences=n_sentences,
            config=config,
        )
        latency_ms = (time.perf_counter() - started) * 1000.0
        return {
            "report": report.to_dict(),
            "request": {
                "description": description,
                "k": k,
                "n_sentences": n_sentences,
                "lambda": float(kb_weight),
            },
            "latency_ms": latency_ms,
        }

    @app.post("/api/v1/admin/reload")
    def reload(request: Request):
        expected = os.environ.get(ENV_ADMIN_TOKEN)
        if not expected:
            return _error(403, "RELOAD_DISABLED", f"set {ENV_ADMIN_TOKEN} to enable reload")
        provided = request.headers.get(ADMIN_TOKEN_HEADER)
        if provided != expected:
            return _error(403, "BAD_TOKEN", "admin token mismatch")
        if holder.paths is None:
            return _error(409, "NO_SOURCE_PATHS", "service was started without data paths")
        fresh = load_snapshot(holder.paths, holder.snapshot.config if holder.snapshot else None)
        holder.snapshot = fresh  # single reference assignment: atomic swap
        return {"reloaded": True, "model_version": fresh.model.version}

    return app
