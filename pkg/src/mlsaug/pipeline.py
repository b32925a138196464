"""Batch augmentation: dataset loading, variant generation, manifest.

One source image yields ``count`` deterministic variants.  Per sample the
anchor points are fixed (grid scheme, or contour handles plus image-corner
anchors), so the MLS basis is precomputed once and every variant only swaps
in its own displaced point set -- the cheap, target-dependent half of the
transform.  Everything is pure and ordered; two runs with the same config
write byte-identical trees, regardless of ``jobs``.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import schemes
from .boxes import bbox_from_mask
from .errors import DegenerateRegionError, EmptyMaskError, PatternSpaceExhausted
from .mls import PrecomputedBasis, _densify, precompute_basis, sample_image, transform_lattice
from .raster import load_image, load_mask, save_png
from .regions import ContourConfig, contour_handles, largest_region
from .schemes import GridConfig

__all__ = ["LabeledSample", "RunConfig", "load_dataset", "run_augmentation",
           "render_from_record", "MODES"]

MODES = ("classify", "segment", "detect")

# variants transformed per batched lattice evaluation
_BLOCK = 256


@dataclass
class LabeledSample:
    path: str
    image: np.ndarray
    class_label: str = ""
    mask: np.ndarray | None = None
    mask_path: str | None = None


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; the manifest stores it verbatim."""

    mode: str
    input: str = ""
    masks: str = ""
    out: str = ""
    kp: float = 0.23
    kl: float = 0.14
    ks: float = 0.25
    phi0: float = 45.0
    alpha: float = 2.0
    grid: int = 1
    count: int = 2004
    jobs: int = 1
    anchor_corners: bool = True
    contour: ContourConfig = field(default_factory=ContourConfig)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        GridConfig(self.kp, self.kl, self.ks, self.phi0)  # validates coefficients
        if not self.alpha > 1.0:
            raise ValueError(f"alpha must be > 1, got {self.alpha}")
        if not (isinstance(self.grid, int) and self.grid >= 1):
            raise ValueError(f"grid spacing must be an integer >= 1, got {self.grid}")
        if not (isinstance(self.count, int) and self.count >= 1):
            raise ValueError(f"count must be an integer >= 1, got {self.count}")
        if not (isinstance(self.jobs, int) and self.jobs >= 1):
            raise ValueError(f"jobs must be an integer >= 1, got {self.jobs}")

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        data = dict(data)
        contour = data.pop("contour", None)
        known = {f for f in cls.__dataclass_fields__ if f != "contour"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if contour is not None:
            if not isinstance(contour, dict):
                raise ValueError("'contour' must be an object")
            ckeys = set(ContourConfig.__dataclass_fields__)
            bad = set(contour) - ckeys
            if bad:
                raise ValueError(f"unknown contour config keys: {sorted(bad)}")
            if "ray_angles" in contour:
                contour["ray_angles"] = tuple(contour["ray_angles"])
            data["contour"] = ContourConfig(**contour)
        return cls(**data)

    def to_json(self) -> dict:
        c = self.contour
        return {
            "mode": self.mode, "input": self.input, "masks": self.masks,
            "out": self.out, "kp": self.kp, "kl": self.kl, "ks": self.ks,
            "phi0": self.phi0, "alpha": self.alpha, "grid": self.grid,
            "count": self.count, "jobs": self.jobs,
            "anchor_corners": self.anchor_corners,
            "contour": {"ray_angles": list(c.ray_angles), "xi": c.xi,
                        "k_l": c.k_l, "phi0": c.phi0, "phi_step": c.phi_step,
                        "dedupe_dist": c.dedupe_dist},
        }


def load_dataset(input_dir: str | Path, mode: str, masks_dir: str | Path | None = None):
    """Collect samples, sorted by path.

    classify: one subdirectory per class, the directory name is the label.
    segment/detect: PNGs in ``input_dir`` paired with same-name masks in
    ``masks_dir``; the label is the input directory's name.

    Returns ``(samples, errors)``; unreadable or unpaired files become error
    entries and the rest of the run proceeds.
    """
    root = Path(input_dir)
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if not root.is_dir():
        raise ValueError(f"input directory not found: {root}")
    samples: list[LabeledSample] = []
    errors: list[dict] = []

    if mode == "classify":
        for cls_dir in sorted(d for d in root.iterdir() if d.is_dir()):
            for p in sorted(cls_dir.glob("*.png")):
                rel = f"{cls_dir.name}/{p.name}"
                try:
                    samples.append(LabeledSample(rel, load_image(p), cls_dir.name))
                except Exception as exc:
                    errors.append({"path": rel, "error": str(exc)})
        return samples, errors

    if masks_dir is None:
        raise ValueError(f"{mode} mode requires a masks directory")
    mroot = Path(masks_dir)
    if not mroot.is_dir():
        raise ValueError(f"masks directory not found: {mroot}")
    for p in sorted(root.glob("*.png")):
        mp = mroot / p.name
        if not mp.is_file():
            errors.append({"path": p.name, "error": f"no mask {mp.name} in {mroot}"})
            continue
        try:
            img = load_image(p)
            mask = load_mask(mp)
        except Exception as exc:
            errors.append({"path": p.name, "error": str(exc)})
            continue
        if mask.shape != img.shape[:2]:
            errors.append({"path": p.name,
                           "error": f"mask {mask.shape} does not match image {img.shape[:2]}"})
            continue
        samples.append(LabeledSample(p.name, img, root.name, mask, mp.name))
    return samples, errors


@dataclass(frozen=True)
class _Plan:
    """Per-sample deformation plan: fixed anchors plus movement rule."""

    points: np.ndarray      # scheme anchors; first `moving` are movable
    moving: int
    length: float
    phi0: float
    step_degrees: float
    directions: int


def _corner_anchors(width: int, height: int) -> np.ndarray:
    return np.array([(0.0, 0.0), (width - 1.0, 0.0),
                     (0.0, height - 1.0), (width - 1.0, height - 1.0)])


def _plan_for(cfg: RunConfig, sample: LabeledSample) -> _Plan:
    h, w = sample.image.shape[:2]
    if cfg.mode == "classify":
        pts = schemes.nine_point_grid(w, h, cfg.kp)
        return _Plan(points=pts, moving=len(pts),
                     length=schemes.displacement_length(w, h, cfg.kp, cfg.kl),
                     phi0=cfg.phi0, step_degrees=360.0 * cfg.ks,
                     directions=schemes.direction_count(cfg.ks))
    region = largest_region(sample.mask)
    handles = contour_handles(region, cfg.contour)
    pts = handles
    if cfg.anchor_corners:
        pts = np.vstack([handles, _corner_anchors(w, h)])
    return _Plan(points=pts, moving=len(handles),
                 length=cfg.contour.k_l * min(region.bbox.w, region.bbox.h),
                 phi0=cfg.contour.phi0, step_degrees=cfg.contour.phi_step,
                 directions=cfg.contour.direction_count)


def _variant_products(image: np.ndarray, mask: np.ndarray | None,
                      samples_row: np.ndarray, width: int, height: int,
                      spacing: int):
    """Warp image (and mask) through one lattice row of field samples."""
    map_x, map_y = _densify(samples_row, width, height, spacing)
    warped = sample_image(image, map_x, map_y, sampling="bilinear", fill="edge")
    if mask is None:
        return warped, None, None
    wmask = sample_image(mask, map_x, map_y, sampling="nearest", fill=0)
    if not wmask.any():
        return warped, wmask, "warped mask is empty"
    return warped, wmask, None


def _render_sample(cfg: RunConfig, sample: LabeledSample, plan: _Plan,
                   basis: PrecomputedBasis, patterns, out_root: Path,
                   pool: ThreadPoolExecutor | None):
    """Emit every variant of one sample; returns (records, emitted, rejected)."""
    h, w = sample.image.shape[:2]
    stem = Path(sample.path).stem
    subdir = Path(sample.class_label) if cfg.mode == "classify" else Path(".")
    (out_root / subdir).mkdir(parents=True, exist_ok=True)

    base_params = {
        "alpha": cfg.alpha, "grid": cfg.grid, "width": w, "height": h,
        "scheme_points": [[float(x), float(y)] for x, y in plan.points],
        "moving": plan.moving, "length": plan.length, "phi0": plan.phi0,
        "step_degrees": plan.step_degrees, "directions": plan.directions,
    }

    def render(idx_pattern_samples):
        idx, pattern, field_samples = idx_pattern_samples
        name = f"{stem}_v{idx}"
        rel = (subdir / f"{name}.png").as_posix()
        record = {
            "variant_index": idx,
            "source_path": sample.path,
            "pattern": [[int(i), int(j)] for i, j in pattern.moves],
            "params": base_params,
            "image": None, "mask": None, "annotation": None,
            "rejected": False, "reason": None,
        }
        warped, wmask, reject = _variant_products(
            sample.image, sample.mask if cfg.mode != "classify" else None,
            field_samples, w, h, cfg.grid)
        if reject is not None:
            record["rejected"] = True
            record["reason"] = reject
            return record
        save_png(warped, out_root / rel)
        record["image"] = rel
        if cfg.mode == "segment":
            mrel = (subdir / f"{name}_mask.png").as_posix()
            save_png(wmask, out_root / mrel)
            record["mask"] = mrel
        elif cfg.mode == "detect":
            box = bbox_from_mask(wmask).clamped(w, h)
            ann = {"class": sample.class_label or "object", **box.to_json()}
            jrel = (subdir / f"{name}.json").as_posix()
            with open(out_root / jrel, "w") as fh:
                json.dump([ann], fh, sort_keys=True)
            record["annotation"] = jrel
        return record

    records = []
    for lo in range(0, len(patterns), _BLOCK):
        block = patterns[lo:lo + _BLOCK]
        displaced = np.stack([
            schemes.displace_points(plan.points, pat, plan.length,
                                    plan.phi0, plan.step_degrees)
            for pat in block])
        fields = transform_lattice(basis, displaced)
        tasks = [(lo + k, block[k], fields[k]) for k in range(len(block))]
        if pool is None:
            records.extend(render(t) for t in tasks)
        else:
            records.extend(pool.map(render, tasks))
    emitted = sum(1 for r in records if not r["rejected"])
    return records, emitted, len(records) - emitted


def run_augmentation(cfg: RunConfig, samples: list[LabeledSample],
                     load_errors: list[dict] | None = None) -> dict:
    """Generate all variants and write ``manifest.json`` under ``cfg.out``.

    Returns the manifest dict.  Per-sample failures (degenerate region,
    exhausted pattern space, empty mask) are recorded and skipped.
    """
    out_root = Path(cfg.out)
    out_root.mkdir(parents=True, exist_ok=True)
    manifest = {
        "config": cfg.to_json(),
        "samples": [],
        "records": [],
        "summary": {},
    }
    for err in load_errors or []:
        manifest["samples"].append({"path": err["path"], "label": None,
                                    "mask": None, "error": err["error"]})

    pool = ThreadPoolExecutor(max_workers=cfg.jobs) if cfg.jobs > 1 else None
    emitted = rejected = failed = 0
    try:
        for sample in samples:
            entry = {"path": sample.path, "label": sample.class_label or None,
                     "mask": sample.mask_path, "error": None}
            manifest["samples"].append(entry)
            try:
                plan = _plan_for(cfg, sample)
                patterns = schemes.enumerate_patterns(plan.moving, plan.directions,
                                                      cfg.count)
                h, w = sample.image.shape[:2]
                basis = precompute_basis(plan.points, cfg.alpha, w, h, cfg.grid)
            except (DegenerateRegionError, EmptyMaskError,
                    PatternSpaceExhausted, ValueError) as exc:
                entry["error"] = str(exc)
                failed += 1
                continue
            recs, emit, rej = _render_sample(cfg, sample, plan, basis, patterns,
                                             out_root, pool)
            manifest["records"].extend(recs)
            emitted += emit
            rejected += rej
    finally:
        if pool is not None:
            pool.shutdown()

    manifest["summary"] = {
        "samples": len(samples),
        "failed_samples": failed,
        "load_errors": len(load_errors or []),
        "requested_per_sample": cfg.count,
        "emitted": emitted,
        "rejected": rejected,
    }
    with open(out_root / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest


def render_from_record(record: dict, image: np.ndarray,
                       mask: np.ndarray | None = None):
    """Re-run one manifest record; returns (warped, warped_mask_or_None).

    The record carries the full parameter snapshot, so the result is pixel
    identical to the original run.
    """
    p = record["params"]
    points = np.asarray(p["scheme_points"], dtype=np.float64)
    pattern = schemes.MovePattern(tuple((int(i), int(j)) for i, j in record["pattern"]))
    displaced = schemes.displace_points(points, pattern, p["length"],
                                        p["phi0"], p["step_degrees"])
    basis = precompute_basis(points, p["alpha"], p["width"], p["height"], p["grid"])
    fields = transform_lattice(basis, displaced)
    warped, wmask, reject = _variant_products(image, mask, fields,
                                              p["width"], p["height"], p["grid"])
    if reject is not None:
        return warped, None
    return warped, wmask
