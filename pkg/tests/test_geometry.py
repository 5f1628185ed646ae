import numpy as np
import pytest

from hoiforge.geometry import (
    BBox,
    center_distance,
    center_to_corner,
    corner_to_center,
    giou,
    giou_array,
    iou,
)


def test_bbox_validation():
    with pytest.raises(ValueError):
        BBox(0, 0, 0, 1)
    with pytest.raises(ValueError):
        BBox(2, 0, 1, 1)
    with pytest.raises(ValueError):
        BBox(0, 0, float("nan"), 1)
    b = BBox(1, 2, 4, 8)
    assert b.center() == (2.5, 5.0)
    assert b.area == 18


def test_iou_known_values():
    a = BBox(0, 0, 10, 10)
    assert iou(a, a) == 1.0
    assert iou(a, BBox(20, 20, 30, 30)) == 0.0
    # half-overlapping squares: inter 50, union 150
    assert iou(a, BBox(5, 0, 15, 10)) == pytest.approx(50 / 150)


def test_giou_identical_is_one():
    a = BBox(3, 4, 9, 11)
    assert giou(a, a) == 1.0


def test_giou_disjoint_unit_boxes():
    # side-by-side unit boxes with a unit gap: IoU 0, union 2, hull 3
    assert giou(BBox(0, 0, 1, 1), BBox(2, 0, 3, 1)) == pytest.approx(-1 / 3, abs=1e-9)


def test_giou_nested_quarter_area():
    # inner box of a quarter of the area, hull equals the outer box
    outer = BBox(0, 0, 2, 2)
    inner = BBox(0, 0, 1, 1)
    assert giou(outer, inner) == pytest.approx(0.25, abs=1e-9)


def test_giou_symmetric_and_bounded():
    rng = np.random.default_rng(11)
    for _ in range(500):
        x1, y1 = rng.uniform(0, 50, 2)
        a = BBox(x1, y1, x1 + rng.uniform(0.1, 50), y1 + rng.uniform(0.1, 50))
        x1, y1 = rng.uniform(0, 50, 2)
        b = BBox(x1, y1, x1 + rng.uniform(0.1, 50), y1 + rng.uniform(0.1, 50))
        g = giou(a, b)
        assert giou(b, a) == pytest.approx(g, abs=1e-12)
        assert -1.0 < g <= 1.0


def test_giou_degenerate_rejected():
    with pytest.raises(ValueError):
        giou_array(np.array([0.0, 0.0, 0.0, 1.0]), np.array([0.0, 0.0, 1.0, 1.0]))


def test_center_corner_round_trip():
    rng = np.random.default_rng(3)
    cxcywh = np.column_stack(
        [rng.uniform(0.2, 0.8, 100), rng.uniform(0.2, 0.8, 100), rng.uniform(0.05, 0.3, 100), rng.uniform(0.05, 0.3, 100)]
    )
    back = corner_to_center(center_to_corner(cxcywh))
    assert np.allclose(back, cxcywh, atol=1e-12)


def test_center_distance():
    a = BBox(0, 0, 20, 20)  # center (10, 10)
    b = BBox(80, 80, 100, 100)  # center (90, 90)
    assert center_distance(a, b) == pytest.approx(np.hypot(80, 80))
