"""FastAPI application: POST /embed, GET /health.

Contract: vectors come back in input order, unit-norm at float32 precision,
deterministic within one server process.  400 on malformed bodies, 503
before the encoder is ready, 413 above the batch cap.
"""

from __future__ import annotations

import argparse
import os
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .encoder import Encoder, load_encoder

DEFAULT_PORT = 8765
BATCH_CAP = 256


class EmbedRequest(BaseModel):
    texts: list[str]


class EmbedResponse(BaseModel):
    model: str
    dim: int
    vectors: list[list[float]]


def create_app(encoder: Encoder | None = None, defer_loading: bool = False) -> FastAPI:
    state = {"encoder": encoder}

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if state["encoder"] is None and not defer_loading:
            state["encoder"] = load_encoder(os.environ.get("EMBED_SERVICE_MODEL"))
        yield

    app = FastAPI(title="embed-service", lifespan=lifespan)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/health")
    async def health():
        enc = state["encoder"]
        if enc is None:
            return JSONResponse(status_code=503, content={"status": "loading"})
        return {"status": "ok", "model": enc.name, "dim": enc.dim}

    @app.post("/embed")
    async def embed(body: EmbedRequest):
        enc = state["encoder"]
        if enc is None:
            return JSONResponse(status_code=503, content={"detail": "model loading"})
        if len(body.texts) > BATCH_CAP:
            return JSONResponse(
                status_code=413,
                content={"detail": f"batch of {len(body.texts)} exceeds cap {BATCH_CAP}"},
            )
        vectors = enc.encode(body.texts)
        return EmbedResponse(
            model=enc.name, dim=enc.dim, vectors=[row.tolist() for row in vectors]
        )

    return app


def main(argv: list[str] | None = None) -> int:
    import uvicorn

    parser = argparse.ArgumentParser(prog="embed-service")
    parser.add_argument(
        "--port",
        type=int,
        default=int(os.environ.get("MAR_EMBEDDER_PORT", DEFAULT_PORT)),
    )
    parser.add_argument("--host", default="127.0.0.1")
    args = parser.parse_args(argv)
    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
