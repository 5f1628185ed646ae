"""Image manifest records and JSON-lines IO.

A manifest is one JSON object per line, each an image record:

    {"image_id": str, "file": str, "width": int, "height": int,
     "prompt_triplets": [int, ...],
     "detections": [{"class_id": int, "box": [x1, y1, x2, y2], "confidence": float}, ...],
     "annotations": [{"human_box": [...], "object_box": [...], "hoi_id": int, "source": str}, ...],
     "kept": bool}

Boxes are pixel corner coordinates.  Parse errors carry the image_id (or
line number) so a bad record in a large manifest is findable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import SchemaError, ValidationError
from .geometry import BBox

SOURCE_AUTO = "auto"
SOURCE_VERIFIED = "verified"
SOURCE_EDITED = "edited"
ANNOTATION_SOURCES = (SOURCE_AUTO, SOURCE_VERIFIED, SOURCE_EDITED)


@dataclass(frozen=True)
class DetectionRecord:
    image_id: str
    class_id: int
    box: BBox
    confidence: float

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValidationError(f"confidence must be in [0, 1], got {self.confidence}")

    def to_dict(self) -> dict:
        return {"class_id": self.class_id, "box": self.box.as_list(), "confidence": self.confidence}


@dataclass(frozen=True)
class HoiAnnotation:
    human_box: BBox
    object_box: BBox
    hoi_id: int
    source: str = SOURCE_AUTO
    # which association pass produced this annotation (1 = object-driven,
    # 2 = leftover-person), None for annotations not created by auto-labeling
    pass_index: int | None = None

    def __post_init__(self):
        if self.source not in ANNOTATION_SOURCES:
            raise ValidationError(f"annotation source must be one of {ANNOTATION_SOURCES}, got {self.source!r}")

    def to_dict(self) -> dict:
        out = {
            "human_box": self.human_box.as_list(),
            "object_box": self.object_box.as_list(),
            "hoi_id": self.hoi_id,
            "source": self.source,
        }
        if self.pass_index is not None:
            out["pass"] = self.pass_index
        return out

    @classmethod
    def from_dict(cls, rec: dict, where: str = "annotation") -> "HoiAnnotation":
        try:
            return cls(
                human_box=BBox.from_list(rec["human_box"]),
                object_box=BBox.from_list(rec["object_box"]),
                hoi_id=int(rec["hoi_id"]),
                source=rec.get("source", SOURCE_AUTO),
                pass_index=rec.get("pass"),
            )
        except KeyError as e:
            raise SchemaError(f"{where}: missing field {e.args[0]!r}") from None
        except (TypeError, ValueError) as e:
            raise SchemaError(f"{where}: {e}") from None


@dataclass
class AnnotatedImage:
    image_id: str
    file: str
    width: int
    height: int
    prompt_triplets: list[int] = field(default_factory=list)
    detections: list[DetectionRecord] = field(default_factory=list)
    annotations: list[HoiAnnotation] = field(default_factory=list)
    kept: bool = True

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValidationError(f"image {self.image_id}: width/height must be positive")
        for det in self.detections:
            self._check_box(det.box, "detection")
        for ann in self.annotations:
            self._check_box(ann.human_box, "annotation human")
            self._check_box(ann.object_box, "annotation object")
        if not self.kept and self.annotations:
            raise ValidationError(f"image {self.image_id}: discarded image must not carry annotations")

    def _check_box(self, box: BBox, what: str) -> None:
        if box.x1 < 0 or box.y1 < 0 or box.x2 > self.width or box.y2 > self.height:
            raise ValidationError(
                f"image {self.image_id}: {what} box {box.as_list()} outside [0,{self.width}]x[0,{self.height}]"
            )

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "file": self.file,
            "width": self.width,
            "height": self.height,
            "prompt_triplets": list(self.prompt_triplets),
            "detections": [d.to_dict() for d in self.detections],
            "annotations": [a.to_dict() for a in self.annotations],
            "kept": self.kept,
        }

    @classmethod
    def from_dict(cls, rec: dict, where: str = "image record") -> "AnnotatedImage":
        try:
            image_id = str(rec["image_id"])
            detections = [
                DetectionRecord(
                    image_id=image_id,
                    class_id=int(d["class_id"]),
                    box=BBox.from_list(d["box"]),
                    confidence=float(d["confidence"]),
                )
                for d in rec.get("detections", [])
            ]
            annotations = [
                HoiAnnotation.from_dict(a, where=f"{where} ({image_id})")
                for a in rec.get("annotations", [])
            ]
            return cls(
                image_id=image_id,
                file=str(rec["file"]),
                width=int(rec["width"]),
                height=int(rec["height"]),
                prompt_triplets=[int(t) for t in rec.get("prompt_triplets", [])],
                detections=detections,
                annotations=annotations,
                kept=bool(rec.get("kept", True)),
            )
        except KeyError as e:
            raise SchemaError(f"{where}: missing field {e.args[0]!r}") from None
        except (TypeError, ValueError) as e:
            if isinstance(e, (SchemaError, ValidationError)):
                raise
            raise SchemaError(f"{where}: {e}") from None


def read_manifest(path: Path | str) -> Iterator[AnnotatedImage]:
    """Yield image records from a JSON-lines manifest, with line context on errors."""
    path = Path(path)
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(f"{path}:{lineno}: {e.msg}") from e
            yield AnnotatedImage.from_dict(rec, where=f"{path}:{lineno}")


def write_manifest(path: Path | str, images: Iterable[AnnotatedImage]) -> int:
    """Write image records as JSON-lines; returns the record count."""
    path = Path(path)
    n = 0
    with path.open("w") as fh:
        for img in images:
            fh.write(json.dumps(img.to_dict()) + "\n")
            n += 1
    return n
