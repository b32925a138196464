"""Bounding boxes and propagation of labels through a warp.

A box is (x, y, w, h) with w/h the coordinate extent (max - min) of the
covered points.  Boxes for warped variants are always re-derived from the
warped mask; warping the four box corners through a non-affine field would
not bound the deformed object.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyMaskError
from .mls import WarpField, warp_image, warp_mask

__all__ = ["BBox", "Annotation", "bbox_from_points", "bbox_from_mask", "propagate"]


@dataclass(frozen=True)
class BBox:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w < 0 or self.h < 0:
            raise ValueError(f"box extent must be non-negative, got {self.w}x{self.h}")

    def clamped(self, width: int, height: int) -> "BBox":
        """Intersect with the pixel-coordinate range of a width x height raster."""
        x0 = min(max(self.x, 0.0), width - 1.0)
        y0 = min(max(self.y, 0.0), height - 1.0)
        x1 = min(max(self.x + self.w, 0.0), width - 1.0)
        y1 = min(max(self.y + self.h, 0.0), height - 1.0)
        return BBox(x0, y0, x1 - x0, y1 - y0)

    def to_json(self) -> dict:
        def num(v: float):
            return int(v) if float(v).is_integer() else float(v)

        return {"x": num(self.x), "y": num(self.y), "w": num(self.w), "h": num(self.h)}


@dataclass(frozen=True)
class Annotation:
    """One labeled object: class name, box, and the variant that produced it."""

    class_label: str
    bbox: BBox
    source_variant: str

    def __post_init__(self):
        if not self.class_label:
            raise ValueError("class_label must be nonempty")


def bbox_from_points(points) -> BBox:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) == 0:
        raise ValueError(f"points must be a nonempty (n, 2) array, got shape {pts.shape}")
    x0, y0 = pts.min(axis=0)
    x1, y1 = pts.max(axis=0)
    return BBox(float(x0), float(y0), float(x1 - x0), float(y1 - y0))


def bbox_from_mask(mask: np.ndarray) -> BBox:
    """Tight box over foreground pixels; raises :class:`EmptyMaskError` if none."""
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ValueError(f"mask must be 2-d, got shape {m.shape}")
    ys, xs = np.nonzero(m)
    if xs.size == 0:
        raise EmptyMaskError("mask has no foreground pixels")
    return BBox(float(xs.min()), float(ys.min()),
                float(xs.max() - xs.min()), float(ys.max() - ys.min()))


def propagate(sample, field: WarpField, variant_id: str = ""):
    """Warp a labeled sample and re-derive its annotation.

    ``sample`` needs ``image``, ``mask`` and ``class_label`` attributes.  The
    image is warped bilinearly, the mask with nearest sampling through the
    same field, and the box is read off the warped mask (clamped to bounds).

    Returns ``(warped_image, warped_mask, Annotation)``.  Raises
    :class:`EmptyMaskError` when the deformation pushed every foreground
    pixel out of frame; the caller records the variant as rejected.
    """
    if sample.mask is None:
        raise ValueError("sample has no mask to propagate")
    warped = warp_image(sample.image, field)
    warped_mask = warp_mask(sample.mask, field)
    if not warped_mask.any():
        raise EmptyMaskError("warped mask is empty")
    box = bbox_from_mask(warped_mask).clamped(field.width, field.height)
    label = sample.class_label or "object"
    return warped, warped_mask, Annotation(label, box, variant_id or "v0")
