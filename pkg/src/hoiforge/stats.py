"""Dataset statistics: category histograms, long-tail reports, merging,
similarity scoring on precomputed embeddings, and zero-shot split construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import SchemaError, ValidationError
from .manifest import AnnotatedImage
from .rng import SplitMix64
from .vocabulary import TripletVocabulary

UNIT_IMAGES = "images"
UNIT_INSTANCES = "instances"

SPLIT_RF_UC = "rf-uc"
SPLIT_NF_UC = "nf-uc"
SPLIT_UO = "uo"
SPLIT_UV = "uv"
SPLIT_KINDS = (SPLIT_RF_UC, SPLIT_NF_UC, SPLIT_UO, SPLIT_UV)

# Conventional split sizes for the four settings; CLI parameters, not constants.
DEFAULT_SPLIT_SIZES = {SPLIT_RF_UC: 120, SPLIT_NF_UC: 120, SPLIT_UO: 12, SPLIT_UV: 20}


@dataclass
class CategoryHistogram:
    counts: list[int]
    unit: str

    def __post_init__(self):
        if self.unit not in (UNIT_IMAGES, UNIT_INSTANCES):
            raise ValidationError(f"unit must be '{UNIT_IMAGES}' or '{UNIT_INSTANCES}', got {self.unit!r}")
        if any(c < 0 for c in self.counts):
            raise ValidationError("histogram counts must be non-negative")

    def __len__(self) -> int:
        return len(self.counts)

    def to_dict(self) -> dict:
        return {"unit": self.unit, "counts": list(self.counts)}

    @classmethod
    def from_dict(cls, rec: dict, where: str = "histogram") -> "CategoryHistogram":
        try:
            return cls(counts=[int(c) for c in rec["counts"]], unit=str(rec["unit"]))
        except KeyError as e:
            raise SchemaError(f"{where}: missing field {e.args[0]!r}") from None

    def save(self, path: Path | str) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path: Path | str) -> "CategoryHistogram":
        path = Path(path)
        try:
            rec = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise SchemaError(f"histogram file {path}, line {e.lineno}: {e.msg}") from e
        return cls.from_dict(rec, where=f"histogram file {path}")


def histogram(
    images: Iterable[AnnotatedImage], vocab: TripletVocabulary, unit: str = UNIT_INSTANCES
) -> CategoryHistogram:
    """Count annotations per category (instances) or distinct images per category."""
    k = vocab.num_categories
    counts = [0] * k
    seen: list[set[str]] = [set() for _ in range(k)] if unit == UNIT_IMAGES else []
    hist = CategoryHistogram(counts=counts, unit=unit)  # validates unit up front
    for img in images:
        for ann in img.annotations:
            if not (0 <= ann.hoi_id < k):
                raise ValidationError(f"image {img.image_id}: hoi_id {ann.hoi_id} out of range 0..{k - 1}")
            if unit == UNIT_INSTANCES:
                counts[ann.hoi_id] += 1
            else:
                seen[ann.hoi_id].add(img.image_id)
    if unit == UNIT_IMAGES:
        hist.counts = [len(s) for s in seen]
    return hist


@dataclass
class DatasetSummary:
    """Corpus totals: images, distinct person/object boxes and triplet instances."""

    images_total: int = 0
    images_kept: int = 0
    person_boxes: int = 0
    object_boxes: int = 0
    triplet_instances: int = 0

    def to_dict(self) -> dict:
        return {
            "images_total": self.images_total,
            "images_kept": self.images_kept,
            "person_boxes": self.person_boxes,
            "object_boxes": self.object_boxes,
            "triplet_instances": self.triplet_instances,
        }


def summarize_dataset(images: Iterable[AnnotatedImage]) -> DatasetSummary:
    """Box counts are distinct per image: a person appearing in several
    triplets of one image contributes one person box."""
    s = DatasetSummary()
    for img in images:
        s.images_total += 1
        if not img.kept:
            continue
        s.images_kept += 1
        humans = {tuple(a.human_box.as_list()) for a in img.annotations}
        objects = {tuple(a.object_box.as_list()) for a in img.annotations}
        s.person_boxes += len(humans)
        s.object_boxes += len(objects)
        s.triplet_instances += len(img.annotations)
    return s


def tail_report(hist: CategoryHistogram, threshold: int) -> tuple[int, list[int]]:
    """Categories with strictly fewer than ``threshold`` entries, ascending by count then id."""
    below = [(c, i) for i, c in enumerate(hist.counts) if c < threshold]
    below.sort()
    return len(below), [i for _, i in below]


def merge(a: CategoryHistogram, b: CategoryHistogram) -> CategoryHistogram:
    """Element-wise sum; operands must agree on length and unit."""
    if len(a) != len(b):
        raise ValidationError(f"histogram length mismatch: {len(a)} vs {len(b)}")
    if a.unit != b.unit:
        raise ValidationError(f"histogram unit mismatch: {a.unit!r} vs {b.unit!r}")
    return CategoryHistogram(counts=[x + y for x, y in zip(a.counts, b.counts)], unit=a.unit)


def clip_score(image_emb, text_emb, w: float = 1.0) -> float:
    """w * max(0, cosine similarity) between two embedding vectors."""
    v = np.asarray(image_emb, dtype=float).ravel()
    t = np.asarray(text_emb, dtype=float).ravel()
    if v.size == 0 or v.size != t.size:
        raise ValueError(f"embedding dimensions differ or are empty: {v.size} vs {t.size}")
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(t))):
        raise ValueError("embeddings must be finite")
    nv, nt = np.linalg.norm(v), np.linalg.norm(t)
    if nv == 0.0 or nt == 0.0:
        raise ValueError("embeddings must be non-zero")
    cos = float(np.dot(v, t) / (nv * nt))
    return w * max(0.0, cos)


def load_embeddings(path: Path | str) -> dict[str, np.ndarray]:
    """Read JSON-lines of {"id": str, "values": [float, ...]}."""
    path = Path(path)
    out: dict[str, np.ndarray] = {}
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                out[str(rec["id"])] = np.asarray(rec["values"], dtype=float)
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise SchemaError(f"{path}:{lineno}: bad embedding record ({e})") from None
    return out


@dataclass
class ZeroShotSplit:
    kind: str
    n: int
    seed: int
    unseen_hoi: set[int]
    seen_hoi: set[int]
    unseen_objects: set[int] = field(default_factory=set)
    unseen_verbs: set[str] = field(default_factory=set)

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "n": self.n,
            "seed": self.seed,
            "unseen_hoi": sorted(self.unseen_hoi),
            "seen_hoi": sorted(self.seen_hoi),
        }
        if self.kind == SPLIT_UO:
            out["unseen_objects"] = sorted(self.unseen_objects)
        if self.kind == SPLIT_UV:
            out["unseen_verbs"] = sorted(self.unseen_verbs)
        return out

    def save(self, path: Path | str) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def triplets_for_verbs(vocab: TripletVocabulary, verbs: Iterable[str]) -> set[int]:
    wanted = set(verbs)
    return {e.hoi_id for e in vocab.entries if e.verb in wanted}


def triplets_for_objects(vocab: TripletVocabulary, object_class_ids: Iterable[int]) -> set[int]:
    wanted = set(object_class_ids)
    return {e.hoi_id for e in vocab.entries if e.object_class_id in wanted}


def make_zero_shot_split(
    hist: CategoryHistogram | None,
    vocab: TripletVocabulary,
    kind: str,
    n: int,
    seed: int = 0,
) -> ZeroShotSplit:
    """Build one of the four unseen-composition splits.

    rf-uc / nf-uc take the n lowest / highest count categories (ties break
    by ascending id, so splits are reproducible); uo / uv draw n unseen
    object classes / verbs uniformly with the given seed and mark every
    triplet built on them unseen.
    """
    kind = kind.lower()
    if kind not in SPLIT_KINDS:
        raise ValueError(f"kind must be one of {SPLIT_KINDS}, got {kind!r}")
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    k = vocab.num_categories
    all_ids = set(range(k))

    if kind in (SPLIT_RF_UC, SPLIT_NF_UC):
        if hist is None:
            raise ValueError(f"{kind} split needs a category histogram")
        if len(hist) != k:
            raise ValidationError(f"histogram length {len(hist)} does not match vocabulary size {k}")
        if n >= k:
            raise ValueError(f"n must be < number of categories ({k}), got {n}")
        if kind == SPLIT_RF_UC:
            order = sorted(range(k), key=lambda i: (hist.counts[i], i))
        else:
            order = sorted(range(k), key=lambda i: (-hist.counts[i], i))
        unseen = set(order[:n])
        return ZeroShotSplit(kind=kind, n=n, seed=seed, unseen_hoi=unseen, seen_hoi=all_ids - unseen)

    rng = SplitMix64(seed)
    if kind == SPLIT_UO:
        objs = vocab.object_class_ids()
        if n >= len(objs):
            raise ValueError(f"n must be < number of object classes ({len(objs)}), got {n}")
        chosen = set(rng.sample(objs, n))
        unseen = triplets_for_objects(vocab, chosen)
        return ZeroShotSplit(
            kind=kind, n=n, seed=seed, unseen_hoi=unseen, seen_hoi=all_ids - unseen, unseen_objects=chosen
        )

    verbs = vocab.verbs()
    if n >= len(verbs):
        raise ValueError(f"n must be < number of verbs ({len(verbs)}), got {n}")
    chosen_verbs = set(rng.sample(verbs, n))
    unseen = triplets_for_verbs(vocab, chosen_verbs)
    return ZeroShotSplit(
        kind=kind, n=n, seed=seed, unseen_hoi=unseen, seen_hoi=all_ids - unseen, unseen_verbs=chosen_verbs
    )


def rare_set_from_histogram(hist: CategoryHistogram | Mapping[int, int], threshold: int = 10) -> set[int]:
    """Categories with fewer than ``threshold`` training entries."""
    if isinstance(hist, CategoryHistogram):
        return {i for i, c in enumerate(hist.counts) if c < threshold}
    return {i for i, c in hist.items() if c < threshold}
