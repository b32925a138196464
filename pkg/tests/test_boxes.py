"""Bounding boxes and label propagation."""

import numpy as np
import pytest

from mlsaug.boxes import Annotation, BBox, bbox_from_mask, bbox_from_points, propagate
from mlsaug.errors import EmptyMaskError
from mlsaug.mls import HandleSet, build_warp_field, precompute_basis
from mlsaug.pipeline import LabeledSample

from conftest import make_disk


class TestBBox:
    def test_from_points_frozen(self):
        b = bbox_from_points(np.array([[1.0, 2.0], [5.0, 9.0], [3.0, 4.0]]))
        assert (b.x, b.y, b.w, b.h) == (1.0, 2.0, 4.0, 7.0)

    def test_from_mask_frozen(self):
        m = np.zeros((16, 16), np.uint8)
        m[4, 3] = 255
        m[8, 7] = 1  # any non-zero counts
        b = bbox_from_mask(m)
        assert (b.x, b.y, b.w, b.h) == (3.0, 4.0, 4.0, 4.0)

    def test_from_mask_single_pixel(self):
        m = np.zeros((8, 8), np.uint8)
        m[5, 2] = 255
        b = bbox_from_mask(m)
        assert (b.x, b.y, b.w, b.h) == (2.0, 5.0, 0.0, 0.0)

    def test_empty_mask_raises(self):
        with pytest.raises(EmptyMaskError):
            bbox_from_mask(np.zeros((8, 8), np.uint8))

    def test_from_points_rejects_empty(self):
        with pytest.raises(ValueError):
            bbox_from_points(np.zeros((0, 2)))

    def test_clamped(self):
        b = BBox(-3.0, -2.0, 10.0, 30.0).clamped(width=8, height=12)
        assert b.x == 0.0 and b.y == 0.0
        assert b.x + b.w <= 7.0 + 1e-12
        assert b.y + b.h <= 11.0 + 1e-12

    def test_clamped_noop_inside(self):
        b = BBox(1.0, 2.0, 3.0, 4.0)
        assert b.clamped(width=10, height=10) == b

    def test_to_json_ints_when_integral(self):
        d = BBox(1.0, 2.0, 3.0, 4.0).to_json()
        assert d == {"x": 1, "y": 2, "w": 3, "h": 4}
        assert all(isinstance(v, int) for v in d.values())
        d2 = BBox(1.5, 2.0, 3.0, 4.0).to_json()
        assert d2["x"] == 1.5 and isinstance(d2["x"], float)

    def test_negative_extent_rejected(self):
        with pytest.raises(ValueError):
            BBox(0.0, 0.0, -1.0, 4.0)


class TestAnnotation:
    def test_empty_label_rejected(self):
        with pytest.raises(ValueError):
            Annotation("", BBox(0.0, 0.0, 1.0, 1.0), "v0")

    def test_fields(self):
        ann = Annotation("cat", BBox(1.0, 2.0, 3.0, 4.0), "v5")
        assert ann.class_label == "cat"
        assert ann.source_variant == "v5"
        assert ann.bbox.to_json() == {"x": 1, "y": 2, "w": 3, "h": 4}


def _sample_with_disk():
    img = make_disk(48, (22.0, 25.0), 9.0, value=210)
    mask = make_disk(48, (22.0, 25.0), 9.0, value=255)
    return LabeledSample(
        path="mem://disk.png", image=img, class_label="disk", mask=mask
    )


def _corner_field(shape, shift):
    h, w = shape[:2]
    pts = np.array(
        [[0.0, 0.0], [w - 1.0, 0.0], [0.0, h - 1.0], [w - 1.0, h - 1.0]],
        dtype=np.float64,
    )
    handles = HandleSet(sources=pts + shift, targets=pts)
    basis = precompute_basis(pts, alpha=2.0, width=w, height=h, spacing=1)
    return build_warp_field(basis, handles)


class TestPropagate:
    def test_integer_translation_moves_box_exactly(self):
        sample = _sample_with_disk()
        field = _corner_field(sample.image.shape, np.array([3.0, -2.0]))
        img, mask, ann = propagate(sample, field, variant_id="v7")
        assert ann.source_variant == "v7"
        assert ann.class_label == "disk"
        b0 = bbox_from_mask(sample.mask)
        b1 = ann.bbox
        # sources sit at corner+shift, so content moves opposite the shift
        assert (b1.x, b1.y) == (b0.x - 3.0, b0.y + 2.0)
        assert (b1.w, b1.h) == (b0.w, b0.h)
        assert img.shape == sample.image.shape
        assert mask.shape == sample.mask.shape

    def test_identity_keeps_everything(self):
        sample = _sample_with_disk()
        field = _corner_field(sample.image.shape, np.zeros(2))
        img, mask, ann = propagate(sample, field, variant_id="v0")
        assert np.array_equal(img, sample.image)
        assert np.array_equal(mask, sample.mask)
        assert ann.bbox == bbox_from_mask(sample.mask)

    def test_box_contains_warped_mask(self):
        sample = _sample_with_disk()
        field = _corner_field(sample.image.shape, np.array([-4.0, 5.0]))
        _, mask, ann = propagate(sample, field, variant_id="v1")
        ys, xs = np.nonzero(mask)
        b = ann.bbox
        assert b.x <= xs.min() and xs.max() <= b.x + b.w
        assert b.y <= ys.min() and ys.max() <= b.y + b.h

    def test_mask_pushed_out_raises(self):
        sample = _sample_with_disk()
        field = _corner_field(sample.image.shape, np.array([120.0, 0.0]))
        with pytest.raises(EmptyMaskError):
            propagate(sample, field, variant_id="v2")

    def test_no_mask_rejected(self):
        sample = _sample_with_disk()
        bare = LabeledSample(
            path=sample.path, image=sample.image, class_label="disk", mask=None
        )
        field = _corner_field(sample.image.shape, np.array([2.0, 1.0]))
        with pytest.raises(ValueError):
            propagate(bare, field, variant_id="v3")
