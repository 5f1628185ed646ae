"""Human verification workflow: batch sampling, verdict folding, export.

All review state is a pure fold over an append-only JSON-lines event log.
The first event records the sampled batch (so the log is self-contained);
every later event is a per-annotation verdict.  Concurrent verdicts on one
annotation resolve last-write-wins by timestamp, ties by log order.

Event shapes:
    {"type": "batch", "fraction": f, "seed": s, "sampling_unit": "images",
     "items": [<review item>, ...]}
    {"type": "verdict", "annotation_id": id, "decision": "accept|reject|edit",
     "edited_annotation": {...}|null, "reviewer": str, "timestamp": ms}
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import SchemaError, ValidationError
from .manifest import SOURCE_EDITED, SOURCE_VERIFIED, AnnotatedImage, HoiAnnotation
from .rng import SplitMix64

STATUS_PENDING = "pending"
STATUS_ACCEPTED = "accepted"
STATUS_REJECTED = "rejected"
STATUS_EDITED = "edited"
STATUSES = (STATUS_PENDING, STATUS_ACCEPTED, STATUS_REJECTED, STATUS_EDITED)

DECISION_ACCEPT = "accept"
DECISION_REJECT = "reject"
DECISION_EDIT = "edit"
DECISIONS = (DECISION_ACCEPT, DECISION_REJECT, DECISION_EDIT)

_DECISION_STATUS = {
    DECISION_ACCEPT: STATUS_ACCEPTED,
    DECISION_REJECT: STATUS_REJECTED,
    DECISION_EDIT: STATUS_EDITED,
}

SAMPLING_UNIT = "images"
DEFAULT_REVIEW_FRACTION = 0.05


@dataclass
class Verdict:
    annotation_id: str
    decision: str
    reviewer: str = "anonymous"
    timestamp: int = 0
    edited_annotation: HoiAnnotation | None = None

    def __post_init__(self):
        if self.decision not in DECISIONS:
            raise ValidationError(f"decision must be one of {DECISIONS}, got {self.decision!r}")
        if self.decision == DECISION_EDIT and self.edited_annotation is None:
            raise ValidationError("edit verdict requires edited_annotation")

    def to_event(self) -> dict:
        return {
            "type": "verdict",
            "annotation_id": self.annotation_id,
            "decision": self.decision,
            "edited_annotation": self.edited_annotation.to_dict() if self.edited_annotation else None,
            "reviewer": self.reviewer,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_event(cls, event: dict, where: str = "verdict event") -> "Verdict":
        try:
            edited = event.get("edited_annotation")
            return cls(
                annotation_id=str(event["annotation_id"]),
                decision=str(event["decision"]),
                reviewer=str(event.get("reviewer", "anonymous")),
                timestamp=int(event.get("timestamp", 0)),
                edited_annotation=HoiAnnotation.from_dict(edited, where) if edited else None,
            )
        except KeyError as e:
            raise SchemaError(f"{where}: missing field {e.args[0]!r}") from None


@dataclass
class ReviewAnnotation:
    annotation_id: str
    original: HoiAnnotation
    status: str = STATUS_PENDING
    edited: HoiAnnotation | None = None
    last_timestamp: int = -1
    last_log_index: int = -1

    def current(self) -> HoiAnnotation:
        return self.edited if self.status == STATUS_EDITED and self.edited else self.original

    def to_dict(self) -> dict:
        out = {"annotation_id": self.annotation_id, "status": self.status}
        out.update(self.original.to_dict())
        if self.edited:
            out["edited_annotation"] = self.edited.to_dict()
        return out


@dataclass
class ReviewItem:
    image_id: str
    file: str
    width: int
    height: int
    prompt_triplets: list[int]
    annotations: list[ReviewAnnotation]

    @property
    def status(self) -> str:
        """Item-level view: pending until every annotation has a verdict."""
        statuses = {a.status for a in self.annotations}
        if not statuses or STATUS_PENDING in statuses:
            return STATUS_PENDING
        if STATUS_EDITED in statuses:
            return STATUS_EDITED
        if statuses == {STATUS_REJECTED}:
            return STATUS_REJECTED
        return STATUS_ACCEPTED

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "file": self.file,
            "width": self.width,
            "height": self.height,
            "prompt_triplets": list(self.prompt_triplets),
            "status": self.status,
            "annotations": [a.to_dict() for a in self.annotations],
        }

    @classmethod
    def from_dict(cls, rec: dict, where: str = "review item") -> "ReviewItem":
        try:
            annotations = [
                ReviewAnnotation(
                    annotation_id=str(a["annotation_id"]),
                    original=HoiAnnotation.from_dict(a, where),
                )
                for a in rec.get("annotations", [])
            ]
            return cls(
                image_id=str(rec["image_id"]),
                file=str(rec["file"]),
                width=int(rec["width"]),
                height=int(rec["height"]),
                prompt_triplets=[int(t) for t in rec.get("prompt_triplets", [])],
                annotations=annotations,
            )
        except KeyError as e:
            raise SchemaError(f"{where}: missing field {e.args[0]!r}") from None


def sample_batch(
    images: Sequence[AnnotatedImage], fraction: float, seed: int
) -> list[ReviewItem]:
    """Seeded uniform sample (without replacement) of round(fraction * N) kept images.

    N counts kept images with at least one annotation; the batch keeps
    manifest order.  Annotation ids are "<image_id>#<index>" and stay stable
    for the life of the batch.
    """
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    eligible = [img for img in images if img.kept and img.annotations]
    n = round(fraction * len(eligible))
    rng = SplitMix64(seed)
    chosen = sorted(rng.sample(range(len(eligible)), min(n, len(eligible))))
    items = []
    for idx in chosen:
        img = eligible[idx]
        items.append(
            ReviewItem(
                image_id=img.image_id,
                file=img.file,
                width=img.width,
                height=img.height,
                prompt_triplets=list(img.prompt_triplets),
                annotations=[
                    ReviewAnnotation(annotation_id=f"{img.image_id}#{i}", original=ann)
                    for i, ann in enumerate(img.annotations)
                ],
            )
        )
    return items


@dataclass
class ReviewState:
    items: list[ReviewItem] = field(default_factory=list)
    fraction: float = DEFAULT_REVIEW_FRACTION
    seed: int = 0
    applied_verdicts: int = 0
    _index: dict[str, ReviewAnnotation] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._reindex()

    def _reindex(self) -> None:
        self._index = {a.annotation_id: a for item in self.items for a in item.annotations}

    @classmethod
    def from_batch(cls, items: list[ReviewItem], fraction: float, seed: int) -> "ReviewState":
        return cls(items=items, fraction=fraction, seed=seed)

    def batch_event(self) -> dict:
        return {
            "type": "batch",
            "fraction": self.fraction,
            "seed": self.seed,
            "sampling_unit": SAMPLING_UNIT,
            "items": [item.to_dict() for item in self.items],
        }

    def annotation(self, annotation_id: str) -> ReviewAnnotation:
        try:
            return self._index[annotation_id]
        except KeyError:
            raise KeyError(f"unknown annotation_id {annotation_id!r}") from None

    def progress(self) -> dict[str, int]:
        counts = {s: 0 for s in STATUSES}
        for ann in self._index.values():
            counts[ann.status] += 1
        counts["total"] = len(self._index)
        return counts

    def apply_verdict(self, verdict: Verdict, log_index: int) -> ReviewAnnotation:
        """Fold one verdict into the state; stale timestamps do not override."""
        ann = self.annotation(verdict.annotation_id)
        if (verdict.timestamp, log_index) < (ann.last_timestamp, ann.last_log_index):
            return ann
        ann.status = _DECISION_STATUS[verdict.decision]
        ann.edited = verdict.edited_annotation if verdict.decision == DECISION_EDIT else None
        ann.last_timestamp = verdict.timestamp
        ann.last_log_index = log_index
        self.applied_verdicts += 1
        return ann


def record_verdict(state: ReviewState, verdict: Verdict, log_index: int | None = None) -> ReviewState:
    """Validate and fold a verdict; unknown annotation ids raise KeyError."""
    state.annotation(verdict.annotation_id)  # not-found check before mutation
    state.apply_verdict(verdict, state.applied_verdicts if log_index is None else log_index)
    return state


def replay(events: Iterable[dict]) -> ReviewState:
    """Rebuild state from a full event stream (batch event first)."""
    state: ReviewState | None = None
    for i, event in enumerate(events):
        etype = event.get("type")
        if etype == "batch":
            if state is not None:
                raise SchemaError(f"event {i}: duplicate batch event")
            items = [ReviewItem.from_dict(rec, where=f"event {i}") for rec in event.get("items", [])]
            state = ReviewState(
                items=items,
                fraction=float(event.get("fraction", DEFAULT_REVIEW_FRACTION)),
                seed=int(event.get("seed", 0)),
            )
        elif etype == "verdict":
            if state is None:
                raise SchemaError(f"event {i}: verdict before batch event")
            state.apply_verdict(Verdict.from_event(event, where=f"event {i}"), log_index=i)
        else:
            raise SchemaError(f"event {i}: unknown event type {etype!r}")
    if state is None:
        raise SchemaError("event log has no batch event")
    return state


def export_verified(state: ReviewState) -> tuple[dict, list[AnnotatedImage]]:
    """Manifest of exactly the accepted and edited annotations.

    Accepted annotations keep their original geometry with source
    "verified"; edited ones carry the reviewer's payload with source
    "edited".  Rejected and pending annotations are dropped, as are images
    left with nothing.  Returns (header, images).
    """
    images: list[AnnotatedImage] = []
    n_annotations = 0
    for item in state.items:
        exported: list[HoiAnnotation] = []
        for ann in item.annotations:
            if ann.status == STATUS_ACCEPTED:
                src = ann.original
                exported.append(
                    HoiAnnotation(
                        human_box=src.human_box, object_box=src.object_box, hoi_id=src.hoi_id,
                        source=SOURCE_VERIFIED, pass_index=src.pass_index,
                    )
                )
            elif ann.status == STATUS_EDITED and ann.edited is not None:
                e = ann.edited
                exported.append(
                    HoiAnnotation(
                        human_box=e.human_box, object_box=e.object_box, hoi_id=e.hoi_id,
                        source=SOURCE_EDITED,
                    )
                )
        if not exported:
            continue
        n_annotations += len(exported)
        images.append(
            AnnotatedImage(
                image_id=item.image_id,
                file=item.file,
                width=item.width,
                height=item.height,
                prompt_triplets=list(item.prompt_triplets),
                detections=[],
                annotations=exported,
                kept=True,
            )
        )
    header = {
        "sampling_unit": SAMPLING_UNIT,
        "fraction": state.fraction,
        "seed": state.seed,
        "exported_images": len(images),
        "exported_annotations": n_annotations,
    }
    return header, images


class VerdictLog:
    """Append-only JSON-lines event log, flushed to disk before acknowledging."""

    def __init__(self, path: Path | str):
        self.path = Path(path)

    def exists(self) -> bool:
        return self.path.exists() and self.path.stat().st_size > 0

    def append(self, event: dict) -> None:
        with self.path.open("a") as fh:
            fh.write(json.dumps(event) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def events(self) -> list[dict]:
        out = []
        with self.path.open() as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    out.append(json.loads(line))
                except json.JSONDecodeError as e:
                    raise SchemaError(f"{self.path}:{lineno}: {e.msg}") from e
        return out

    def replay(self) -> ReviewState:
        return replay(self.events())
