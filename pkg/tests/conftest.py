import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)


def make_disk(size=64, center=(32, 32), radius=20, value=255):
    yy, xx = np.mgrid[0:size, 0:size]
    m = ((xx - center[0]) ** 2 + (yy - center[1]) ** 2) <= radius ** 2
    return (m * value).astype(np.uint8)


def make_blob(size, seed, radius_frac=0.3):
    """Deterministic star-convex blob mask, wobbling radius around a circle."""
    r = np.random.default_rng(seed)
    cx = cy = size / 2.0
    base = size * radius_frac
    coeff = r.uniform(-0.15, 0.15, 3)
    yy, xx = np.mgrid[0:size, 0:size]
    ang = np.arctan2(yy - cy, xx - cx)
    rad = base * (1 + coeff[0] * np.cos(ang) + coeff[1] * np.sin(2 * ang)
                  + coeff[2] * np.cos(3 * ang))
    m = np.hypot(xx - cx, yy - cy) <= rad
    return (m * 255).astype(np.uint8)


def make_smooth_image(size, seed):
    """Natural-looking test image: smooth low-frequency layers, mild texture."""
    r = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64) / size
    img = np.zeros((size, size))
    for _ in range(4):
        fx, fy = r.uniform(0.5, 3.0, 2)
        ph = r.uniform(0, 2 * np.pi, 2)
        img += r.uniform(20, 60) * np.sin(2 * np.pi * fx * xx + ph[0]) \
            * np.sin(2 * np.pi * fy * yy + ph[1])
    img += r.uniform(4, 8) * np.sin(2 * np.pi * 12 * xx) * np.sin(2 * np.pi * 11 * yy)
    img -= img.min()
    img *= 255.0 / max(img.max(), 1e-9)
    return img.astype(np.uint8)
