"""Triplet detection evaluation: greedy per-image matching, per-category
average precision, and the Full / Rare / Non-Rare report in Default or
Known-Object mode.

Matching convention: predictions are visited in descending score (ties by
input order); a prediction is a true positive iff an unmatched ground truth
of the same category overlaps with min(IoU(human), IoU(object)) at or above
the threshold, and each ground truth is consumed at most once.  When several
ground truths qualify, the one with the largest min-IoU is consumed.  AP uses
all-point interpolation.  Both conventions are echoed in the report header.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import SchemaError, ValidationError
from .geometry import BBox, iou
from .manifest import AnnotatedImage
from .vocabulary import TripletVocabulary

MODE_DEFAULT = "default"
MODE_KNOWN_OBJECT = "known"

MATCH_CRITERION = "min(human IoU, object IoU) greedy by descending score"
AP_INTERPOLATION = "all-point"


@dataclass(frozen=True)
class EvalPrediction:
    image_id: str
    human_box: BBox
    object_box: BBox
    hoi_id: int
    score: float

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValidationError(f"score must be in [0, 1], got {self.score}")


@dataclass(frozen=True)
class GroundTruthTriplet:
    image_id: str
    human_box: BBox
    object_box: BBox
    hoi_id: int


@dataclass
class EvalSettings:
    iou_threshold: float = 0.5
    mode: str = MODE_DEFAULT
    rare_set: set[int] = field(default_factory=set)
    known_object_index: dict[int, set[str]] | None = None

    def __post_init__(self):
        if not (0.0 < self.iou_threshold < 1.0):
            raise ValidationError(f"iou_threshold must be in (0, 1), got {self.iou_threshold}")
        if self.mode not in (MODE_DEFAULT, MODE_KNOWN_OBJECT):
            raise ValidationError(f"mode must be '{MODE_DEFAULT}' or '{MODE_KNOWN_OBJECT}'")


def ground_truth_from_manifest(images: Iterable[AnnotatedImage]) -> list[GroundTruthTriplet]:
    """Flatten kept images' annotations into evaluation ground truths."""
    out = []
    for img in images:
        if not img.kept:
            continue
        for ann in img.annotations:
            out.append(
                GroundTruthTriplet(
                    image_id=img.image_id,
                    human_box=ann.human_box,
                    object_box=ann.object_box,
                    hoi_id=ann.hoi_id,
                )
            )
    return out


def match_image(
    preds: Sequence[EvalPrediction],
    gts: Sequence[GroundTruthTriplet],
    iou_threshold: float = 0.5,
) -> list[bool]:
    """TP/FP flag per prediction, in the predictions' input order."""
    ids = {p.image_id for p in preds} | {g.image_id for g in gts}
    if len(ids) > 1:
        raise ValidationError(f"match_image got records from several images: {sorted(ids)}")

    order = sorted(range(len(preds)), key=lambda i: (-preds[i].score, i))
    gt_used = [False] * len(gts)
    flags = [False] * len(preds)
    for i in order:
        p = preds[i]
        best_j = -1
        best_overlap = 0.0
        for j, g in enumerate(gts):
            if gt_used[j] or g.hoi_id != p.hoi_id:
                continue
            overlap = min(iou(p.human_box, g.human_box), iou(p.object_box, g.object_box))
            if overlap >= iou_threshold and overlap > best_overlap:
                best_overlap = overlap
                best_j = j
        if best_j >= 0:
            gt_used[best_j] = True
            flags[i] = True
    return flags


def average_precision(flags: Sequence[bool], n_gt: int) -> float | None:
    """Area under the precision-recall curve, all-point interpolation.

    ``flags`` must already be in descending-score order.  A category with no
    ground truth and no predictions has no defined AP and returns None so the
    caller can exclude it from the mean.
    """
    if n_gt < 0:
        raise ValueError(f"n_gt must be >= 0, got {n_gt}")
    if n_gt == 0:
        return None if not flags else 0.0
    if not flags:
        return 0.0

    tp = 0
    precision = []
    recall = []
    for k, flag in enumerate(flags, start=1):
        tp += int(flag)
        precision.append(tp / k)
        recall.append(tp / n_gt)

    # interpolate right-to-left: precision at recall r is the max at >= r
    interp = list(precision)
    for k in range(len(interp) - 2, -1, -1):
        interp[k] = max(interp[k], interp[k + 1])

    ap = 0.0
    prev_r = 0.0
    for k in range(len(flags)):
        if recall[k] > prev_r:
            ap += (recall[k] - prev_r) * interp[k]
            prev_r = recall[k]
    return ap


@dataclass
class CategoryResult:
    hoi_id: int
    ap: float | None
    n_gt: int
    n_pred: int
    rare: bool

    def to_dict(self) -> dict:
        return {"hoi_id": self.hoi_id, "ap": self.ap, "n_gt": self.n_gt, "n_pred": self.n_pred, "rare": self.rare}


@dataclass
class MapReport:
    full: float | None
    rare: float | None
    non_rare: float | None
    mode: str
    iou_threshold: float
    n_categories: int
    score_ties: int
    per_category: list[CategoryResult]

    def to_dict(self) -> dict:
        return {
            "matching": MATCH_CRITERION,
            "interpolation": AP_INTERPOLATION,
            "mode": self.mode,
            "iou_threshold": self.iou_threshold,
            "full": self.full,
            "rare": self.rare,
            "non_rare": self.non_rare,
            "n_categories": self.n_categories,
            "score_ties": self.score_ties,
            "per_category": [c.to_dict() for c in self.per_category],
        }


def map_report(
    preds: Sequence[EvalPrediction],
    gts: Sequence[GroundTruthTriplet],
    settings: EvalSettings,
    vocab: TripletVocabulary | None = None,
) -> MapReport:
    """Per-category AP over the corpus plus Full / Rare / Non-Rare means.

    Full averages over categories with ground truth; rare/non-rare split that
    set by ``settings.rare_set``.  Known-Object mode restricts each
    category's prediction and ground-truth pools to the images listed for its
    object class in ``settings.known_object_index`` (requires ``vocab``).
    """
    allowed = None
    if settings.mode == MODE_KNOWN_OBJECT:
        if settings.known_object_index is None:
            raise ValueError("Known-Object mode needs a known_object_index")
        if vocab is None:
            raise ValueError("Known-Object mode needs the vocabulary to map categories to object classes")
        allowed = {
            hoi_id: settings.known_object_index.get(vocab.object_class_of(hoi_id), set())
            for hoi_id in {p.hoi_id for p in preds} | {g.hoi_id for g in gts}
        }

    def eligible(image_id: str, hoi_id: int) -> bool:
        return allowed is None or image_id in allowed[hoi_id]

    preds = [p for p in preds if eligible(p.image_id, p.hoi_id)]
    gts = [g for g in gts if eligible(g.image_id, g.hoi_id)]

    by_image: dict[str, tuple[list[tuple[int, EvalPrediction]], list[GroundTruthTriplet]]] = {}
    for idx, p in enumerate(preds):
        by_image.setdefault(p.image_id, ([], []))[0].append((idx, p))
    for g in gts:
        by_image.setdefault(g.image_id, ([], []))[1].append(g)

    # (score, input order, tp) per category, gathered across images
    per_cat: dict[int, list[tuple[float, int, bool]]] = {}
    n_gt: dict[int, int] = {}
    for g in gts:
        n_gt[g.hoi_id] = n_gt.get(g.hoi_id, 0) + 1
    for img_preds, img_gts in by_image.values():
        flags = match_image([p for _, p in img_preds], img_gts, settings.iou_threshold)
        for (idx, p), tp in zip(img_preds, flags):
            per_cat.setdefault(p.hoi_id, []).append((p.score, idx, tp))

    categories = sorted(set(n_gt) | set(per_cat))
    results: list[CategoryResult] = []
    ties = 0
    for cat in categories:
        entries = sorted(per_cat.get(cat, []), key=lambda t: (-t[0], t[1]))
        scores = [s for s, _, _ in entries]
        ties += len(scores) - len(set(scores))
        ap = average_precision([tp for _, _, tp in entries], n_gt.get(cat, 0))
        results.append(
            CategoryResult(
                hoi_id=cat,
                ap=ap,
                n_gt=n_gt.get(cat, 0),
                n_pred=len(entries),
                rare=cat in settings.rare_set,
            )
        )

    evaluated = [r for r in results if r.n_gt > 0]
    rare = [r.ap for r in evaluated if r.rare]
    non_rare = [r.ap for r in evaluated if not r.rare]

    def mean(values: list[float | None]) -> float | None:
        return sum(values) / len(values) if values else None

    return MapReport(
        full=mean([r.ap for r in evaluated]),
        rare=mean(rare),
        non_rare=mean(non_rare),
        mode=settings.mode,
        iou_threshold=settings.iou_threshold,
        n_categories=len(evaluated),
        score_ties=ties,
        per_category=results,
    )


def read_predictions(path: Path | str) -> list[EvalPrediction]:
    """Read JSON-lines of evaluation predictions."""
    path = Path(path)
    out = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                out.append(
                    EvalPrediction(
                        image_id=str(rec["image_id"]),
                        human_box=BBox.from_list(rec["human_box"]),
                        object_box=BBox.from_list(rec["object_box"]),
                        hoi_id=int(rec["hoi_id"]),
                        score=float(rec["score"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                if isinstance(e, ValidationError):
                    raise
                raise SchemaError(f"{path}:{lineno}: bad prediction record ({e})") from None
    return out


def load_known_object_index(path: Path | str) -> dict[int, set[str]]:
    """Read {object_class_id: [image_id, ...]} from JSON."""
    path = Path(path)
    try:
        rec = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"known-object index {path}, line {e.lineno}: {e.msg}") from e
    if not isinstance(rec, dict):
        raise SchemaError(f"known-object index {path}: expected a JSON object")
    return {int(k): set(map(str, v)) for k, v in rec.items()}
