#!/usr/bin/env python3
"""Synthesize a tiny labeled dataset and run every pipeline mode on it.

Creates blobs and discs with masks under ``<out>/dataset``, then runs the
classify, segment and detect pipelines and renders one side-by-side preview
of the contour handle scheme.  Everything is deterministic; rerunning into
the same directory reproduces the same bytes.
"""

import argparse
from pathlib import Path

import numpy as np

from mlsaug.mls import HandleSet
from mlsaug.pipeline import RunConfig, load_dataset, run_augmentation
from mlsaug.preview import preview_render
from mlsaug.raster import save_png
from mlsaug.regions import ContourConfig, contour_handles, largest_region
from mlsaug.schemes import displace_points, enumerate_patterns


def synth_blob(size: int, seed: int) -> np.ndarray:
    """Star-convex blob mask with a wobbled radius."""
    r = np.random.default_rng(seed)
    c = size / 2.0
    coeff = r.uniform(-0.15, 0.15, 3)
    yy, xx = np.mgrid[0:size, 0:size]
    ang = np.arctan2(yy - c, xx - c)
    rad = size * 0.3 * (1 + coeff[0] * np.cos(ang)
                        + coeff[1] * np.sin(2 * ang) + coeff[2] * np.cos(3 * ang))
    return ((np.hypot(xx - c, yy - c) <= rad) * 255).astype(np.uint8)


def synth_disc(size: int, seed: int) -> np.ndarray:
    r = np.random.default_rng(seed)
    cx, cy = r.uniform(0.4, 0.6, 2) * size
    rad = r.uniform(0.2, 0.3) * size
    yy, xx = np.mgrid[0:size, 0:size]
    return (((xx - cx) ** 2 + (yy - cy) ** 2 <= rad ** 2) * 255).astype(np.uint8)


def shade(mask: np.ndarray, seed: int) -> np.ndarray:
    """Fill a mask with a smooth gradient on a dark textured background."""
    r = np.random.default_rng(seed)
    size = mask.shape[0]
    yy, xx = np.mgrid[0:size, 0:size] / size
    img = 30 + 20 * np.sin(2 * np.pi * (3 * xx + 2 * yy + r.uniform(0, 1)))
    grad = 120 + 100 * (r.uniform(0, 1) * xx + r.uniform(0, 1) * yy)
    img[mask > 0] = grad[mask > 0]
    return np.clip(img, 0, 255).astype(np.uint8)


def build_dataset(root: Path, size: int) -> tuple[Path, Path, Path]:
    classify = root / "classify"
    images = root / "images"
    masks = root / "masks"
    for i in range(2):
        blob = synth_blob(size, seed=10 + i)
        disc = synth_disc(size, seed=20 + i)
        (classify / "blob").mkdir(parents=True, exist_ok=True)
        (classify / "disc").mkdir(parents=True, exist_ok=True)
        save_png(shade(blob, seed=30 + i), classify / "blob" / f"blob{i}.png")
        save_png(shade(disc, seed=40 + i), classify / "disc" / f"disc{i}.png")
    images.mkdir(parents=True, exist_ok=True)
    masks.mkdir(parents=True, exist_ok=True)
    for i in range(2):
        blob = synth_blob(size, seed=50 + i)
        save_png(shade(blob, seed=60 + i), images / f"sample{i}.png")
        save_png(blob, masks / f"sample{i}.png")
    return classify, images, masks


def run_mode(mode: str, out: Path, count: int, **kw) -> None:
    cfg = RunConfig(mode=mode, out=str(out), count=count, **kw)
    samples, errors = load_dataset(kw["input"], mode, kw.get("masks"))
    manifest = run_augmentation(cfg, samples, errors)
    s = manifest["summary"]
    print(f"  {mode:>9}: {s['emitted']} variants from {s['samples']} samples "
          f"-> {out}")


def render_preview(image_path: Path, mask_path: Path, out: Path) -> None:
    from mlsaug.raster import load_image, load_mask

    image = load_image(image_path)
    region = largest_region(load_mask(mask_path))
    cfg = ContourConfig()
    points = contour_handles(region, cfg)
    length = cfg.k_l * min(region.bbox.w, region.bbox.h)
    pattern = enumerate_patterns(len(points), cfg.direction_count, 40)[-1]
    displaced = displace_points(points, pattern, length, cfg.phi0, cfg.phi_step)
    preview_render(image, HandleSet(sources=displaced, targets=points), out)
    print(f"  preview: handle layout and warp -> {out}")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="demo_out", help="output directory")
    ap.add_argument("--size", type=int, default=96, help="image size (default 96)")
    ap.add_argument("--count", type=int, default=24,
                    help="variants per image (default 24)")
    args = ap.parse_args()

    root = Path(args.out)
    classify_dir, images, masks = build_dataset(root / "dataset", args.size)
    print(f"dataset -> {root / 'dataset'}")

    run_mode("classify", root / "aug_classify", args.count,
             input=str(classify_dir))
    run_mode("segment", root / "aug_segment", args.count,
             input=str(images), masks=str(masks))
    run_mode("detect", root / "aug_detect", args.count,
             input=str(images), masks=str(masks))
    render_preview(images / "sample0.png", masks / "sample0.png",
                   root / "preview.png")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
