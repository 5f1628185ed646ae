"""Automatic labeling: confidence filtering and human-object association.

An image is kept only if every prompted triplet's object class was detected
with confidence at or above the threshold.  Association then runs two passes:

Pass 1: each qualifying detection of a prompted object class is paired with
the person whose box center is nearest the object's box center.

Pass 2: any person left unlabeled by pass 1 is paired with the nearest
qualifying object (any prompted class), reusing that object's prompted
category.  Objects may be reused across persons.

Distances are Euclidean between box centers; ties break by lowest detection
index.  A detection never pairs with itself (relevant when "person" is
itself a prompted object class).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import AssociationError, ValidationError
from .geometry import center_distance
from .manifest import SOURCE_AUTO, AnnotatedImage, HoiAnnotation
from .vocabulary import TripletVocabulary

DEFAULT_CONFIDENCE_THRESHOLD = 0.5
DEFAULT_PERSON_CLASS_ID = 0


def filter_image(
    img: AnnotatedImage,
    vocab: TripletVocabulary,
    threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
) -> bool:
    """Keep the image iff every prompted object class has a detection with
    confidence >= threshold (the boundary is inclusive)."""
    if not (0.0 <= threshold <= 1.0):
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    if not img.prompt_triplets:
        raise ValidationError(f"image {img.image_id}: prompt_triplets is empty")
    for hoi_id in img.prompt_triplets:
        wanted = vocab.object_class_of(hoi_id)
        if not any(d.class_id == wanted and d.confidence >= threshold for d in img.detections):
            return False
    return True


def associate(
    img: AnnotatedImage,
    vocab: TripletVocabulary,
    threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
    person_class_id: int = DEFAULT_PERSON_CLASS_ID,
) -> list[HoiAnnotation]:
    """Pair detected persons with qualifying objects; see the module docstring
    for the two-pass rules.  Raises AssociationError when the image has no
    person detection at all."""
    persons = [(i, d) for i, d in enumerate(img.detections) if d.class_id == person_class_id]
    if not persons:
        raise AssociationError(f"image {img.image_id}: no person detections")

    annotations: list[HoiAnnotation] = []
    assigned_persons: set[int] = set()

    for hoi_id in img.prompt_triplets:
        wanted = vocab.object_class_of(hoi_id)
        for obj_idx, obj in enumerate(img.detections):
            if obj.class_id != wanted or obj.confidence < threshold:
                continue
            candidates = [(pi, p) for pi, p in persons if pi != obj_idx]
            if not candidates:
                continue
            best_idx, best_person = min(
                candidates, key=lambda item: (center_distance(item[1].box, obj.box), item[0])
            )
            annotations.append(
                HoiAnnotation(
                    human_box=best_person.box, object_box=obj.box, hoi_id=hoi_id,
                    source=SOURCE_AUTO, pass_index=1,
                )
            )
            assigned_persons.add(best_idx)

    # prompted class per qualifying object, first prompted triplet wins
    qualifying: list[tuple[int, int, object]] = []
    for obj_idx, obj in enumerate(img.detections):
        if obj.confidence < threshold:
            continue
        for hoi_id in img.prompt_triplets:
            if vocab.object_class_of(hoi_id) == obj.class_id:
                qualifying.append((obj_idx, hoi_id, obj))
                break

    for person_idx, person in persons:
        if person_idx in assigned_persons:
            continue
        options = [(oi, h, o) for oi, h, o in qualifying if oi != person_idx]
        if not options:
            continue
        _, hoi_id, obj = min(
            options, key=lambda item: (center_distance(person.box, item[2].box), item[0])
        )
        annotations.append(
            HoiAnnotation(
                human_box=person.box, object_box=obj.box, hoi_id=hoi_id,
                source=SOURCE_AUTO, pass_index=2,
            )
        )
    return annotations


@dataclass
class LabelSummary:
    total: int = 0
    kept: int = 0
    discarded: int = 0
    association_errors: list[str] = field(default_factory=list)
    per_category: dict[int, int] = field(default_factory=dict)

    @property
    def retention(self) -> float:
        return self.kept / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "kept": self.kept,
            "discarded": self.discarded,
            "retention": self.retention,
            "association_errors": list(self.association_errors),
            "per_category": {str(k): v for k, v in sorted(self.per_category.items())},
        }


def label_dataset(
    images: Iterable[AnnotatedImage],
    vocab: TripletVocabulary,
    threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
    person_class_id: int = DEFAULT_PERSON_CLASS_ID,
) -> tuple[list[AnnotatedImage], LabelSummary]:
    """Filter and annotate a manifest, preserving input order.

    Images that fail the confidence filter are emitted with kept=False and no
    annotations.  Images that pass but cannot be associated (no person) are
    also emitted unkept, and flagged in the summary so pipeline loss stays
    auditable.
    """
    out: list[AnnotatedImage] = []
    summary = LabelSummary()
    for img in images:
        summary.total += 1
        keep = filter_image(img, vocab, threshold)
        annotations: list[HoiAnnotation] = []
        if keep:
            try:
                annotations = associate(img, vocab, threshold, person_class_id)
            except AssociationError:
                summary.association_errors.append(img.image_id)
                keep = False
        if keep:
            summary.kept += 1
            for ann in annotations:
                summary.per_category[ann.hoi_id] = summary.per_category.get(ann.hoi_id, 0) + 1
        else:
            summary.discarded += 1
        out.append(
            AnnotatedImage(
                image_id=img.image_id,
                file=img.file,
                width=img.width,
                height=img.height,
                prompt_triplets=list(img.prompt_triplets),
                detections=list(img.detections),
                annotations=annotations if keep else [],
                kept=keep,
            )
        )
    return out, summary
