"""HTTP review service.

Serves the sampled batch, image bytes, per-annotation verdict recording, a
progress summary and the verified export.  A verdict is written (and fsynced)
to the event log before it is acknowledged, so acknowledged verdicts survive
a crash; restart replays the log and resumes the same batch.
"""

from __future__ import annotations

import threading
import time
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Header, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse
from pydantic import BaseModel

from .errors import ValidationError
from .manifest import HoiAnnotation, read_manifest
from .review import (
    DEFAULT_REVIEW_FRACTION,
    ReviewState,
    Verdict,
    VerdictLog,
    export_verified,
    sample_batch,
)
from .vocabulary import TripletVocabulary


class EditedAnnotationBody(BaseModel):
    human_box: list[float]
    object_box: list[float]
    hoi_id: int


class VerdictBody(BaseModel):
    annotation_id: str
    decision: str
    edited_annotation: Optional[EditedAnnotationBody] = None
    reviewer: Optional[str] = None
    timestamp: Optional[int] = None


def build_state(manifest_path: Path | str, log: VerdictLog, fraction: float, seed: int) -> ReviewState:
    """Replay an existing log, or sample a fresh batch and log it."""
    if log.exists():
        return log.replay()
    images = list(read_manifest(manifest_path))
    items = sample_batch(images, fraction, seed)
    state = ReviewState.from_batch(items, fraction=fraction, seed=seed)
    log.append(state.batch_event())
    return state


def create_app(
    state: ReviewState,
    data_root: Path | str,
    log: VerdictLog,
    vocab: TripletVocabulary | None = None,
) -> FastAPI:
    app = FastAPI(title="hoiforge review service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    data_root = Path(data_root).resolve()
    write_lock = threading.Lock()
    items_by_id = {item.image_id: item for item in state.items}

    def item_payload(item) -> dict:
        rec = item.to_dict()
        if vocab is not None:
            for ann in rec["annotations"]:
                entry = vocab.entry(ann["hoi_id"])
                ann["verb"] = entry.verb
                ann["object"] = entry.object_name
        return rec

    @app.get("/api/batch")
    def get_batch(cursor: int = 0, limit: int = 50) -> dict:
        if cursor < 0 or limit <= 0:
            raise HTTPException(status_code=400, detail="cursor must be >= 0 and limit > 0")
        chunk = state.items[cursor : cursor + limit]
        next_cursor = cursor + limit if cursor + limit < len(state.items) else None
        return {
            "items": [item_payload(item) for item in chunk],
            "cursor": next_cursor,
            "total": len(state.items),
        }

    @app.get("/api/image/{image_id}")
    def get_image(image_id: str):
        item = items_by_id.get(image_id)
        if item is None:
            raise HTTPException(status_code=404, detail=f"unknown image_id {image_id!r}")
        path = (data_root / item.file).resolve()
        if data_root not in path.parents and path != data_root:
            raise HTTPException(status_code=400, detail="image path escapes the data root")
        if not path.is_file():
            raise HTTPException(status_code=404, detail=f"image file missing: {item.file}")
        return FileResponse(path)

    @app.post("/api/verdict")
    def post_verdict(body: VerdictBody, x_reviewer: Optional[str] = Header(default=None)) -> dict:
        try:
            edited = None
            if body.edited_annotation is not None:
                edited = HoiAnnotation.from_dict(
                    {**body.edited_annotation.model_dump(), "source": "edited"}, where="verdict"
                )
            verdict = Verdict(
                annotation_id=body.annotation_id,
                decision=body.decision,
                reviewer=body.reviewer or x_reviewer or "anonymous",
                timestamp=body.timestamp if body.timestamp is not None else int(time.time() * 1000),
                edited_annotation=edited,
            )
        except ValidationError as e:
            raise HTTPException(status_code=400, detail=str(e)) from None

        with write_lock:
            try:
                state.annotation(verdict.annotation_id)
            except KeyError as e:
                raise HTTPException(status_code=404, detail=str(e)) from None
            # durable before acknowledged
            log.append(verdict.to_event())
            ann = state.apply_verdict(verdict, state.applied_verdicts)
        return {"acknowledged": True, "annotation_id": ann.annotation_id, "status": ann.status}

    @app.get("/api/progress")
    def get_progress() -> dict:
        return state.progress()

    @app.get("/api/export")
    def get_export() -> dict:
        header, images = export_verified(state)
        return {"meta": header, "images": [img.to_dict() for img in images]}

    return app


def serve(
    manifest_path: Path | str,
    data_root: Path | str,
    log_path: Path | str,
    fraction: float = DEFAULT_REVIEW_FRACTION,
    seed: int = 0,
    vocab: TripletVocabulary | None = None,
    host: str = "127.0.0.1",
    port: int = 8080,
) -> None:
    import uvicorn

    log = VerdictLog(log_path)
    state = build_state(manifest_path, log, fraction, seed)
    app = create_app(state, data_root, log, vocab=vocab)
    uvicorn.run(app, host=host, port=port, log_level="info")
