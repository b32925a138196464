"""PNG raster I/O.

Images are numpy ``uint8`` arrays, row-major: ``(h, w)`` for single-channel,
``(h, w, 3)`` for RGB.  Masks are always ``(h, w)`` with 0 as background.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


def check_image(arr: np.ndarray, name: str = "image") -> np.ndarray:
    """Validate an image array and return it as uint8."""
    a = np.asarray(arr)
    if a.dtype != np.uint8:
        raise ValueError(f"{name} must be uint8, got {a.dtype}")
    if a.ndim == 3 and a.shape[2] == 1:
        a = a[:, :, 0]
    if not (a.ndim == 2 or (a.ndim == 3 and a.shape[2] == 3)):
        raise ValueError(f"{name} must be (h, w) or (h, w, 3), got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} has empty dimensions: {a.shape}")
    return a


def check_mask(arr: np.ndarray, name: str = "mask") -> np.ndarray:
    a = np.asarray(arr)
    if a.ndim != 2:
        raise ValueError(f"{name} must be single-channel (h, w), got shape {a.shape}")
    if a.dtype != np.uint8:
        raise ValueError(f"{name} must be uint8, got {a.dtype}")
    return a


def load_image(path: str | Path) -> np.ndarray:
    """Load a PNG as uint8, grayscale (h, w) or color (h, w, 3)."""
    with Image.open(path) as im:
        if im.mode == "L":
            return np.asarray(im, dtype=np.uint8)
        if im.mode == "1":
            return (np.asarray(im, dtype=np.uint8) * 255).astype(np.uint8)
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def load_mask(path: str | Path) -> np.ndarray:
    """Load a single-channel mask PNG; palette images keep their raw indices."""
    with Image.open(path) as im:
        if im.mode in ("L", "P"):
            arr = np.asarray(im, dtype=np.uint8)
        elif im.mode == "1":
            arr = (np.asarray(im, dtype=np.uint8) * 255).astype(np.uint8)
        else:
            raise ValueError(f"mask {path} must be single-channel, got mode {im.mode}")
    return check_mask(arr, str(path))


def save_png(arr: np.ndarray, path: str | Path) -> None:
    a = np.asarray(arr)
    if a.ndim == 2:
        im = Image.fromarray(a, mode="L")
    else:
        im = Image.fromarray(check_image(a), mode="RGB")
    im.save(path, format="PNG")
