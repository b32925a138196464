"""Side-by-side preview: anchor markers and move arrows next to the warp result."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .mls import HandleSet, warp_image_with_handles
from .raster import check_image

__all__ = ["preview_render"]

_GAP = 4


def preview_render(image: np.ndarray, handles: HandleSet, out_path: str | Path,
                   spacing: int = 1) -> np.ndarray:
    """Write a two-pane PNG: source with overlay on the left, warp on the right.

    Markers sit on the warp anchors (``handles.targets``); each arrow points
    to the spot whose content the anchor pulls in (``handles.sources``).
    Identity handles draw zero-length arrows and an unchanged right pane.
    """
    img = check_image(image, "image")
    warped = warp_image_with_handles(img, handles, spacing=spacing)
    h, w = img.shape[:2]

    left = Image.fromarray(img).convert("RGB")
    draw = ImageDraw.Draw(left)
    for (sx, sy), (tx, ty) in zip(handles.sources, handles.targets):
        if (sx, sy) != (tx, ty):
            draw.line([(tx, ty), (sx, sy)], fill=(0, 200, 0), width=1)
    for tx, ty in handles.targets:
        draw.ellipse([tx - 2, ty - 2, tx + 2, ty + 2], outline=(255, 0, 0))

    canvas = Image.new("RGB", (2 * w + _GAP, h), (255, 255, 255))
    canvas.paste(left, (0, 0))
    canvas.paste(Image.fromarray(warped).convert("RGB"), (w + _GAP, 0))
    canvas.save(out_path, format="PNG")
    return np.asarray(canvas)
