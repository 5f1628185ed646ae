"""Set matching and the composite loss.

This module is the numerical core of the toolkit: embedding-space classifier
math, query pooling and global-feature fusion, pairwise matching costs, an
exact minimum-cost assignment solver, and the weighted loss over matched
prediction / ground-truth pairs.

Boxes here are normalized ``(cx, cy, w, h)`` in [0, 1]; conversion from the
manifest's pixel corner form lives in :mod:`hoiforge.geometry`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SchemaError, ValidationError
from .geometry import center_to_corner, giou_array

PROB_EPS = 1e-12
ROW_SUM_TOL = 1e-9


def classifier_distribution(queries, category_embeddings) -> np.ndarray:
    """Row-wise softmax of the query/category dot products.

    ``queries`` is (N, C), ``category_embeddings`` is (K, C); the result is a
    row-stochastic (N, K) array.  Computed with the usual max-shift so large
    logits do not overflow.
    """
    q = _check_matrix(queries, "queries")
    t = _check_matrix(category_embeddings, "category embeddings")
    if q.shape[1] != t.shape[1]:
        raise ValueError(f"channel mismatch: queries have C={q.shape[1]}, embeddings C={t.shape[1]}")
    logits = q @ t.T
    logits -= logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    return e / e.sum(axis=1, keepdims=True)


def pool_pair_queries(paired) -> np.ndarray:
    """Average the two (N, C) halves of a (2, N, C) paired-query array."""
    arr = np.asarray(paired, dtype=float)
    if arr.ndim != 3 or arr.shape[0] != 2:
        raise ValueError(f"expected shape (2, N, C), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("paired queries must be finite")
    return (arr[0] + arr[1]) / 2.0


def enhance_with_global(queries, global_vec) -> np.ndarray:
    """Add a global context vector to every query row."""
    q = _check_matrix(queries, "queries")
    g = np.asarray(global_vec, dtype=float).ravel()
    if g.size != q.shape[1]:
        raise ValueError(f"global vector has C={g.size}, queries have C={q.shape[1]}")
    if not np.all(np.isfinite(g)):
        raise ValueError("global vector must be finite")
    return q + g


def _check_matrix(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a 2-D array with N >= 1 and C >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def validate_category_embeddings(matrix) -> np.ndarray:
    """Category embedding matrix must have no all-zero row."""
    arr = _check_matrix(matrix, "category embeddings")
    if np.any(np.all(arr == 0.0, axis=1)):
        raise ValidationError("category embeddings contain an all-zero row")
    return arr


@dataclass
class CostWeights:
    """Weights of the four cost/loss components."""

    box: float = 2.5
    giou: float = 1.0
    obj_cls: float = 1.0
    interaction: float = 1.0

    def __post_init__(self):
        values = (self.box, self.giou, self.obj_cls, self.interaction)
        if any(v < 0 for v in values):
            raise ValidationError("cost weights must be non-negative")
        if all(v == 0 for v in values):
            raise ValidationError("at least one cost weight must be positive")

    @classmethod
    def from_string(cls, spec: str) -> "CostWeights":
        """Parse "box,giou,obj_cls,interaction", e.g. "2.5,1,1,1"."""
        parts = [p.strip() for p in spec.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected 4 comma-separated weights, got {spec!r}")
        return cls(*(float(p) for p in parts))


def _check_norm_boxes(arr, name: str) -> np.ndarray:
    boxes = np.asarray(arr, dtype=float)
    if boxes.ndim != 2 or boxes.shape[1] != 4:
        raise ValidationError(f"{name} must be (N, 4) center-form boxes, got shape {boxes.shape}")
    if not np.all(np.isfinite(boxes)):
        raise ValidationError(f"{name} must be finite")
    if np.any(boxes < 0.0) or np.any(boxes > 1.0):
        raise ValidationError(f"{name} must lie in [0, 1]")
    if np.any(boxes[:, 2] <= 0.0) or np.any(boxes[:, 3] <= 0.0):
        raise ValidationError(f"{name} must have positive width and height")
    return boxes


def _check_distributions(arr, name: str) -> np.ndarray:
    dist = np.asarray(arr, dtype=float)
    if dist.ndim != 2:
        raise ValidationError(f"{name} must be a 2-D array, got shape {dist.shape}")
    sums = dist.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > ROW_SUM_TOL):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise ValidationError(f"{name} rows must sum to 1 within {ROW_SUM_TOL} (worst deviation {worst:.3e})")
    return dist


@dataclass
class PredictionSet:
    """N paired human/object boxes with per-query class distributions."""

    human_boxes: np.ndarray
    object_boxes: np.ndarray
    object_dist: np.ndarray
    interaction_dist: np.ndarray

    def __post_init__(self):
        self.human_boxes = _check_norm_boxes(self.human_boxes, "human_boxes")
        self.object_boxes = _check_norm_boxes(self.object_boxes, "object_boxes")
        self.object_dist = _check_distributions(self.object_dist, "object_dist")
        self.interaction_dist = _check_distributions(self.interaction_dist, "interaction_dist")
        n = len(self.human_boxes)
        for name, arr in (
            ("object_boxes", self.object_boxes),
            ("object_dist", self.object_dist),
            ("interaction_dist", self.interaction_dist),
        ):
            if len(arr) != n:
                raise ValidationError(f"{name} has {len(arr)} rows, expected {n}")

    def __len__(self) -> int:
        return len(self.human_boxes)


@dataclass
class GroundTruthSet:
    """M reference pairs with their object and interaction class ids."""

    human_boxes: np.ndarray
    object_boxes: np.ndarray
    object_classes: np.ndarray
    hoi_classes: np.ndarray

    def __post_init__(self):
        self.human_boxes = _check_norm_boxes(self.human_boxes, "human_boxes")
        self.object_boxes = _check_norm_boxes(self.object_boxes, "object_boxes")
        self.object_classes = np.asarray(self.object_classes, dtype=int)
        self.hoi_classes = np.asarray(self.hoi_classes, dtype=int)
        m = len(self.human_boxes)
        if not (len(self.object_boxes) == len(self.object_classes) == len(self.hoi_classes) == m):
            raise ValidationError("ground-truth arrays disagree on M")
        if np.any(self.object_classes < 0) or np.any(self.hoi_classes < 0):
            raise ValidationError("class ids must be non-negative")

    def __len__(self) -> int:
        return len(self.human_boxes)


@dataclass
class Assignment:
    """One-to-one prediction/ground-truth pairing of size min(N, M)."""

    pairs: list[tuple[int, int]]

    def total_cost(self, cost: np.ndarray) -> float:
        return float(sum(cost[i, j] for i, j in self.pairs))


def cost_matrix(pred: PredictionSet, gt: GroundTruthSet, w: CostWeights) -> np.ndarray:
    """(N, M) matching costs.

    cost(i, j) = w.box * (L1 human + L1 object)
               + w.giou * ((1 - giou human) + (1 - giou object))
               + w.obj_cls * (1 - P_object[i, class_j])
               + w.interaction * (1 - P_interaction[i, hoi_j])

    Probabilities enter as (1 - p) rather than -log p so costs stay bounded.
    """
    if np.any(gt.object_classes >= pred.object_dist.shape[1]):
        raise ValidationError("ground-truth object class out of range for object_dist")
    if np.any(gt.hoi_classes >= pred.interaction_dist.shape[1]):
        raise ValidationError("ground-truth hoi class out of range for interaction_dist")

    l1_h = np.abs(pred.human_boxes[:, None, :] - gt.human_boxes[None, :, :]).sum(axis=-1)
    l1_o = np.abs(pred.object_boxes[:, None, :] - gt.object_boxes[None, :, :]).sum(axis=-1)

    giou_h = giou_array(
        center_to_corner(pred.human_boxes)[:, None, :], center_to_corner(gt.human_boxes)[None, :, :]
    )
    giou_o = giou_array(
        center_to_corner(pred.object_boxes)[:, None, :], center_to_corner(gt.object_boxes)[None, :, :]
    )

    p_obj = pred.object_dist[:, gt.object_classes]
    p_int = pred.interaction_dist[:, gt.hoi_classes]

    return (
        w.box * (l1_h + l1_o)
        + w.giou * ((1.0 - giou_h) + (1.0 - giou_o))
        + w.obj_cls * (1.0 - p_obj)
        + w.interaction * (1.0 - p_int)
    )


def hungarian(cost) -> Assignment:
    """Exact minimum-cost assignment of size min(N, M).

    Shortest-augmenting-path formulation with row/column potentials,
    O(min(N,M)^2 * max(N,M)); handles rectangular matrices by solving with
    rows on the smaller side and mapping back.
    """
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2 or c.size == 0:
        raise ValueError(f"cost matrix must be 2-D and non-empty, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix entries must be finite")

    transposed = c.shape[0] > c.shape[1]
    if transposed:
        c = c.T
    n, m = c.shape

    # col_owner[j] = 1-based row matched to column j; index 0 is a virtual column.
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    col_owner = [0] * (m + 1)
    path = [0] * (m + 1)

    for row in range(1, n + 1):
        col_owner[0] = row
        j0 = 0
        min_red = [float("inf")] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = col_owner[j0]
            delta = float("inf")
            j1 = -1
            for j in range(1, m + 1):
                if used[j]:
                    continue
                reduced = c[i0 - 1, j - 1] - u[i0] - v[j]
                if reduced < min_red[j]:
                    min_red[j] = reduced
                    path[j] = j0
                if min_red[j] < delta:
                    delta = min_red[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[col_owner[j]] += delta
                    v[j] -= delta
                else:
                    min_red[j] -= delta
            j0 = j1
            if col_owner[j0] == 0:
                break
        while j0:
            j1 = path[j0]
            col_owner[j0] = col_owner[j1]
            j0 = j1

    pairs = [(col_owner[j] - 1, j - 1) for j in range(1, m + 1) if col_owner[j] != 0]
    if transposed:
        pairs = [(j, i) for i, j in pairs]
    pairs.sort()
    return Assignment(pairs=pairs)


@dataclass
class LossBreakdown:
    total: float
    box: float
    giou: float
    obj_cls: float
    interaction: float
    clamped_terms: int = 0

    def components(self) -> dict[str, float]:
        return {"box": self.box, "giou": self.giou, "obj_cls": self.obj_cls, "interaction": self.interaction}

    def to_dict(self) -> dict:
        out = {"total": self.total}
        out.update(self.components())
        out["clamped_terms"] = self.clamped_terms
        return out


def total_loss(
    pred: PredictionSet, gt: GroundTruthSet, assignment: Assignment, w: CostWeights
) -> LossBreakdown:
    """Weighted loss over matched pairs.

    Box L1 and (1 - giou) terms are summed over pairs; the two classification
    terms are the mean negative log probability of the true class.  A true
    class probability of zero is clamped at PROB_EPS and counted in
    ``clamped_terms`` instead of producing an infinity.
    """
    _check_assignment(assignment, len(pred), len(gt))
    if not assignment.pairs:
        return LossBreakdown(total=0.0, box=0.0, giou=0.0, obj_cls=0.0, interaction=0.0)

    pi = np.array([i for i, _ in assignment.pairs], dtype=int)
    gj = np.array([j for _, j in assignment.pairs], dtype=int)

    l_box = float(
        np.abs(pred.human_boxes[pi] - gt.human_boxes[gj]).sum()
        + np.abs(pred.object_boxes[pi] - gt.object_boxes[gj]).sum()
    )
    giou_h = giou_array(center_to_corner(pred.human_boxes[pi]), center_to_corner(gt.human_boxes[gj]))
    giou_o = giou_array(center_to_corner(pred.object_boxes[pi]), center_to_corner(gt.object_boxes[gj]))
    l_giou = float((1.0 - giou_h).sum() + (1.0 - giou_o).sum())

    p_obj = pred.object_dist[pi, gt.object_classes[gj]]
    p_int = pred.interaction_dist[pi, gt.hoi_classes[gj]]
    clamped = int(np.sum(p_obj < PROB_EPS) + np.sum(p_int < PROB_EPS))
    l_obj = float(-np.log(np.maximum(p_obj, PROB_EPS)).mean())
    l_int = float(-np.log(np.maximum(p_int, PROB_EPS)).mean())

    total = w.box * l_box + w.giou * l_giou + w.obj_cls * l_obj + w.interaction * l_int
    return LossBreakdown(
        total=total, box=l_box, giou=l_giou, obj_cls=l_obj, interaction=l_int, clamped_terms=clamped
    )


def _check_assignment(assignment: Assignment, n: int, m: int) -> None:
    pairs = assignment.pairs
    if len(pairs) != min(n, m):
        raise ValidationError(f"assignment must have min(N, M) = {min(n, m)} pairs, got {len(pairs)}")
    rows = [i for i, _ in pairs]
    cols = [j for _, j in pairs]
    if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
        raise ValidationError("assignment indices must be distinct on both sides")
    if any(not (0 <= i < n) for i in rows) or any(not (0 <= j < m) for j in cols):
        raise ValidationError("assignment index out of range")


def load_prediction_set(path: Path | str) -> PredictionSet:
    """Read a per-image prediction file: normalized boxes plus dense rows."""
    rec = _load_json_object(path, "prediction")
    try:
        return PredictionSet(
            human_boxes=rec["human_boxes"],
            object_boxes=rec["object_boxes"],
            object_dist=rec["object_dist"],
            interaction_dist=rec["interaction_dist"],
        )
    except KeyError as e:
        raise SchemaError(f"prediction file {path}: missing field {e.args[0]!r}") from None


def load_ground_truth_set(path: Path | str) -> GroundTruthSet:
    """Read a per-image ground-truth file: array of entries."""
    rec = _load_json_object(path, "ground-truth")
    entries = rec.get("entries")
    if not isinstance(entries, list) or not entries:
        raise SchemaError(f"ground-truth file {path}: expected a non-empty 'entries' array")
    try:
        return GroundTruthSet(
            human_boxes=[e["human_box"] for e in entries],
            object_boxes=[e["object_box"] for e in entries],
            object_classes=[e["object_class"] for e in entries],
            hoi_classes=[e["hoi_class"] for e in entries],
        )
    except KeyError as e:
        raise SchemaError(f"ground-truth file {path}: missing field {e.args[0]!r}") from None


def _load_json_object(path: Path | str, what: str) -> dict:
    path = Path(path)
    try:
        rec = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"{what} file {path}, line {e.lineno}: {e.msg}") from e
    if not isinstance(rec, dict):
        raise SchemaError(f"{what} file {path}: expected a JSON object")
    return rec
