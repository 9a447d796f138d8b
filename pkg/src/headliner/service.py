"""HTTP scoring service over one immutable loaded model.

Endpoints: POST /score, GET /health, GET /model. Request handlers share
the model read-only, so any number may run concurrently; scoring through
this service is numerically identical to the CLI on the same model file.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import recurrent
from .model_io import FORMAT_VERSION
from .text import EmptyTitleError, encode

MAX_TITLE_BYTES = 10_000


def _model_info(model) -> dict:
    return {"kind": model.kind, "H": model.hidden_size, "d": model.embed_dim,
            "version": FORMAT_VERSION}


def create_app(model=None, cors_origins: tuple[str, ...] | list[str] = ("*",)) -> FastAPI:
    """Build the service app; pass model=None to start unwarmed (503s)."""
    app = FastAPI(title="headliner scoring service")
    app.state.model = model
    app.add_middleware(CORSMiddleware, allow_origins=list(cors_origins),
                       allow_methods=["*"], allow_headers=["*"])

    @app.get("/health")
    def health():
        if app.state.model is None:
            return JSONResponse({"status": "loading"}, status_code=503)
        return {"status": "ok"}

    @app.get("/model")
    def model_info():
        if app.state.model is None:
            return JSONResponse({"error": "model not loaded"}, status_code=503)
        return _model_info(app.state.model)

    @app.post("/score")
    async def score(request: Request):
        current = app.state.model
        if current is None:
            return JSONResponse({"error": "model not loaded"}, status_code=503)
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError:
            return JSONResponse({"error": "body must be JSON"}, status_code=400)
        if not isinstance(body, dict) or not isinstance(body.get("title"), str):
            return JSONResponse({"error": "missing title"}, status_code=400)
        title = body["title"]
        if len(title.encode("utf-8")) > MAX_TITLE_BYTES:
            return JSONResponse({"error": "title too large"}, status_code=413)
        try:
            seq = encode(title, current.vocab, current.max_seq_len)
        except EmptyTitleError:
            return JSONResponse({"error": "empty title"}, status_code=400)
        result = recurrent.introspect(current, seq)
        p = result.fused_score
        return {"probability": p,
                "label": "popular" if p > 0.5 else "unpopular",
                "tokens": [{"token": w.token, "contribution": w.score}
                           for w in result.words],
                "model_info": _model_info(current)}

    return app
