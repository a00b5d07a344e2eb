"""HTTP facade over the session engine for live annotation sessions.

Three endpoints drive a session: GET /next-hit assigns work (idempotent
until submitted), POST /submit scores it and returns gold feedback plus the
banner, GET /status exposes the worker's ledger snapshot. A single lock
serializes request handling, which trivially satisfies per-worker
serialization and total event-log order.
"""

from __future__ import annotations

import threading
from typing import Any

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .engine import Engine, EngineError, HitPayload, Terminal
from .geometry import BoundingBox


class SubmitRequest(BaseModel):
    worker: str
    hit_id: str
    boxes: list[list[float]] = Field(default_factory=list)
    elapsed: float = 0.0
    complete: bool = False


def create_app(engine: Engine, cors: bool = False) -> FastAPI:
    app = FastAPI(title="visgold task service")
    if cors:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=["*"],
            allow_methods=["*"],
            allow_headers=["*"],
        )
    lock = threading.Lock()

    @app.get("/next-hit")
    def next_hit(worker: str) -> dict[str, Any]:
        with lock:
            try:
                result = engine.next_hit(worker)
            except EngineError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from exc
        if isinstance(result, Terminal):
            status = 403 if result.status == "blocked" else 200
            body = {"terminal": result.status, "reason": result.reason}
            if status == 403:
                raise HTTPException(status_code=403, detail=body)
            return body
        assert isinstance(result, HitPayload)
        return result.to_dict()

    @app.post("/submit")
    def submit(req: SubmitRequest) -> dict[str, Any]:
        try:
            boxes = [BoundingBox(*vals) for vals in req.boxes]
        except (TypeError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=f"bad box: {exc}") from exc
        with lock:
            try:
                result = engine.submit(req.worker, req.hit_id, boxes, req.elapsed, req.complete)
            except EngineError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
        body: dict[str, Any] = {
            "banner": {
                "has_rating": result.banner.has_rating,
                "running_avg": result.banner.running_avg,
                "tier": result.banner.tier.value if result.banner.tier else None,
                "message": result.banner.message,
            },
            "payout_cents": result.payout_cents,
            "bonus_cents": result.bonus_cents,
            "blocked": result.blocked,
            "warned": result.warned,
        }
        if result.feedback is not None:
            body["feedback"] = result.feedback.to_dict()
        return body

    @app.get("/status")
    def status(worker: str) -> dict[str, Any]:
        with lock:
            try:
                return engine.status(worker)
            except EngineError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from exc

    return app


def serve(engine: Engine, port: int = 8765, cors: bool = True) -> None:
    import uvicorn

    uvicorn.run(create_app(engine, cors=cors), host="127.0.0.1", port=port, log_level="info")
