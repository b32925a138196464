"""Command-line interface.

Subcommands: ``classify``, ``segment``, ``detect`` run the batch pipeline;
``preview`` renders one deformation side by side with its handle layout.
Flags override values from ``--config`` (a JSON file with RunConfig fields),
which override the built-in defaults.  Exit codes: 0 on success, 1 when some
files or samples errored but the run finished, 2 for invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import schemes
from .mls import HandleSet
from .pipeline import MODES, RunConfig, load_dataset, run_augmentation
from .preview import preview_render
from .raster import load_image, load_mask
from .regions import contour_handles, largest_region


def _add_common(p: argparse.ArgumentParser, needs_masks: bool):
    p.add_argument("--input", help="input directory (or image for preview)")
    if needs_masks:
        p.add_argument("--masks", help="directory of same-name mask PNGs")
    p.add_argument("--out", help="output directory")
    p.add_argument("--kp", type=float, help="grid placement coefficient (default 0.23)")
    p.add_argument("--kl", type=float, help="move length coefficient (default 0.14)")
    p.add_argument("--ks", type=float, help="angular step coefficient (default 0.25)")
    p.add_argument("--phi0", type=float, help="first move direction in degrees (default 45)")
    p.add_argument("--alpha", type=float, help="MLS falloff exponent (default 2.0)")
    p.add_argument("--grid", type=int, help="warp lattice spacing in px (default 1)")
    p.add_argument("--count", type=int, help="variants per image (default 2004)")
    p.add_argument("--jobs", type=int, help="worker threads (default 1)")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--seedless", action="store_true",
                   help="no-op: the pipeline is fully deterministic and uses no RNG")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mlsaug",
        description="Deterministic label-preserving augmentation via rigid MLS warps")
    sub = ap.add_subparsers(dest="command", required=True)
    for mode in MODES:
        p = sub.add_parser(mode, help=f"run the {mode} pipeline")
        _add_common(p, needs_masks=mode != "classify")
    pv = sub.add_parser("preview", help="render one deformation side by side")
    _add_common(pv, needs_masks=True)
    pv.add_argument("--scheme", choices=("grid", "contour"), default="grid",
                    help="handle scheme to visualize (default grid)")
    pv.add_argument("--variant", type=int, default=0,
                    help="index of the move pattern to show (default 0)")
    return ap


def _build_config(args: argparse.Namespace, mode: str) -> RunConfig:
    data: dict = {}
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        loaded.pop("mode", None)
        data.update(loaded)
    for key in ("input", "masks", "out", "kp", "kl", "ks", "phi0",
                "alpha", "grid", "count", "jobs"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    data["mode"] = mode
    return RunConfig.from_mapping(data)


def _run_batch(args: argparse.Namespace, mode: str) -> int:
    cfg = _build_config(args, mode)
    if not cfg.input:
        raise ValueError("--input is required")
    if not cfg.out:
        raise ValueError("--out is required")
    samples, errors = load_dataset(cfg.input, mode,
                                   cfg.masks or None if mode != "classify" else None)
    manifest = run_augmentation(cfg, samples, errors)
    s = manifest["summary"]
    print(f"{mode}: {s['emitted']} variants from {s['samples']} samples "
          f"({s['rejected']} rejected, {s['failed_samples']} failed samples, "
          f"{s['load_errors']} load errors) -> {cfg.out}")
    return 1 if (s["failed_samples"] or s["load_errors"]) else 0


def _run_preview(args: argparse.Namespace) -> int:
    cfg = _build_config(args, "classify" if args.scheme == "grid" else "segment")
    if not cfg.input:
        raise ValueError("--input is required")
    if not cfg.out:
        raise ValueError("--out is required")
    image = load_image(cfg.input)
    h, w = image.shape[:2]

    if args.scheme == "grid":
        points = schemes.nine_point_grid(w, h, cfg.kp)
        length = schemes.displacement_length(w, h, cfg.kp, cfg.kl)
        phi0, step = cfg.phi0, 360.0 * cfg.ks
        directions = schemes.direction_count(cfg.ks)
    else:
        if not cfg.masks:
            raise ValueError("contour preview requires --masks with the mask PNG")
        region = largest_region(load_mask(cfg.masks))
        points = contour_handles(region, cfg.contour)
        length = cfg.contour.k_l * min(region.bbox.w, region.bbox.h)
        phi0, step = cfg.contour.phi0, cfg.contour.phi_step
        directions = cfg.contour.direction_count

    patterns = schemes.enumerate_patterns(len(points), directions,
                                          args.variant + 1)
    displaced = schemes.displace_points(points, patterns[args.variant],
                                        length, phi0, step)
    handles = HandleSet(sources=displaced, targets=points, alpha=cfg.alpha)
    preview_render(image, handles, cfg.out, spacing=cfg.grid)
    print(f"preview ({args.scheme}, pattern {args.variant}) -> {cfg.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "preview":
            return _run_preview(args)
        return _run_batch(args, args.command)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
