"""FastAPI application exposing the scoring wire protocol.

Error mapping: ProtocolError -> 400, OversizeBatch -> 413,
ModelUnavailable -> 503. Health is liveness only: it reports the
configured mode even when the LM checkpoint cannot be loaded, while
scoring surfaces the 503.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .config import MODE_PARITY, ServiceConfig
from .errors import ModelUnavailable, OversizeBatch, ProtocolError
from .parity import parity_score
from .protocol import parse_score_request


def create_app(cfg: ServiceConfig) -> FastAPI:
    from . import __version__

    app = FastAPI(title="scorer-service", version=__version__)
    lm_scorer = None
    if cfg.mode != MODE_PARITY:
        from .lm import LmScorer

        lm_scorer = LmScorer(cfg)

    @app.get("/v1/health")
    def health() -> dict:
        return {"mode": cfg.mode, "version": __version__}

    @app.post("/v1/score")
    async def score(request: Request) -> JSONResponse:
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "body is not valid JSON"}, status_code=400)
        try:
            _template_id, pairs = parse_score_request(body, cfg.max_batch)
        except OversizeBatch as exc:
            return JSONResponse({"error": str(exc)}, status_code=413)
        except ProtocolError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)

        if cfg.mode == MODE_PARITY:
            scored = [parity_score(pair, cfg) for pair in pairs]
        else:
            try:
                scored = lm_scorer.score(pairs)
            except ModelUnavailable as exc:
                return JSONResponse({"error": str(exc)}, status_code=503)

        return JSONResponse({"scores": [
            {"pair_id": pair.pair_id, "p": p, "q": q}
            for pair, (p, q) in zip(pairs, scored)
        ]})

    return app
