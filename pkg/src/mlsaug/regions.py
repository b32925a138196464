"""Mask geometry: connected regions, barycenters, contours, and contour handles.

The contour handle scheme anchors a warp on the object itself: probe rays are
cast from the region's gray-weighted barycenter, each ray picks the contour
point that matches its angle, and every picked point becomes a movable anchor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .boxes import BBox, bbox_from_mask
from .errors import DegenerateRegionError, EmptyMaskError, NoIntersectionError
from .raster import check_mask

__all__ = [
    "ContourConfig",
    "RegionModel",
    "connected_components",
    "barycenter",
    "trace_contour",
    "largest_region",
    "ray_intersections",
    "contour_handles",
    "contour_target",
]

_EIGHT = np.ones((3, 3), dtype=bool)

# clockwise Moore neighborhood in (dx, dy), screen coordinates (y grows down)
_RING = ((0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1))
_RING_INDEX = {d: i for i, d in enumerate(_RING)}


@dataclass(frozen=True)
class ContourConfig:
    """Parameters of the contour handle scheme.

    ``ray_angles`` are the probe directions in degrees (screen convention,
    y down); ``xi`` is the angular tolerance for matching contour points;
    ``k_l`` scales the move length by the smaller box extent; moves go along
    ``phi0 + i*phi_step``; picked points closer than ``dedupe_dist`` to an
    already accepted one are merged.
    """

    ray_angles: tuple[float, ...] = (0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0)
    xi: float = 3.0
    k_l: float = 0.14
    phi0: float = 45.0
    phi_step: float = 90.0
    dedupe_dist: float = 1.5

    def __post_init__(self):
        if len(self.ray_angles) == 0:
            raise ValueError("at least one probe ray is required")
        if not all(math.isfinite(a) for a in self.ray_angles):
            raise ValueError("ray angles must be finite")
        if not self.xi > 0.0:
            raise ValueError(f"xi must be > 0 degrees, got {self.xi}")
        if not 0.0 < self.k_l < 1.0:
            raise ValueError(f"k_l must lie strictly in (0, 1), got {self.k_l}")
        if not 0.0 < self.phi_step <= 360.0:
            raise ValueError(f"phi_step must lie in (0, 360], got {self.phi_step}")
        if self.dedupe_dist < 0.0:
            raise ValueError("dedupe_dist must be non-negative")
        object.__setattr__(self, "ray_angles", tuple(float(a) for a in self.ray_angles))

    @property
    def direction_count(self) -> int:
        return int(math.floor(360.0 / self.phi_step))


@dataclass(frozen=True)
class RegionModel:
    """One 8-connected foreground region.

    ``omega`` is its boolean pixel set on the full mask frame; ``barycenter``
    and ``contour`` stay ``None`` until filled by :func:`barycenter` /
    :func:`trace_contour` (or use :func:`largest_region`).
    """

    omega: np.ndarray
    count: int
    bbox: BBox
    barycenter: np.ndarray | None = None
    contour: np.ndarray | None = None


def connected_components(mask: np.ndarray) -> list[RegionModel]:
    """8-connected foreground regions, largest first (ties keep scan order)."""
    m = check_mask(mask) > 0
    labels, n = ndimage.label(m, structure=_EIGHT)
    regions = []
    for lab in range(1, n + 1):
        omega = labels == lab
        omega.flags.writeable = False
        count = int(omega.sum())
        regions.append(RegionModel(omega=omega, count=count,
                                   bbox=bbox_from_mask(omega)))
    regions.sort(key=lambda r: -r.count)
    return regions


def barycenter(region: RegionModel, mask: np.ndarray) -> np.ndarray:
    """Gray-weighted centroid (x, y): each pixel weighted by its mask value."""
    m = check_mask(mask)
    if m.shape != region.omega.shape:
        raise ValueError("mask and region shapes differ")
    ys, xs = np.nonzero(region.omega)
    w = m[ys, xs].astype(np.float64)
    total = w.sum()
    if total <= 0:
        raise EmptyMaskError("region has zero total weight")
    return np.array([(w * xs).sum() / total, (w * ys).sum() / total])


def trace_contour(region: RegionModel) -> np.ndarray:
    """Ordered outer boundary via Moore-neighbor tracing, shape (m, 2).

    Starts at the first foreground pixel in row-major order and walks the
    boundary clockwise (screen coordinates), stopping when the start pixel is
    re-entered from the starting direction.  A single-pixel region yields a
    length-1 contour.  Every listed pixel is foreground with at least one
    background 4-neighbor.
    """
    omega = region.omega
    ys, xs = np.nonzero(omega)
    if xs.size == 0:
        raise EmptyMaskError("region is empty")
    h, w = omega.shape

    def fg(x: int, y: int) -> bool:
        return 0 <= x < w and 0 <= y < h and bool(omega[y, x])

    sy = int(ys.min())
    start = (int(xs[ys == sy].min()), sy)

    # The walk is a deterministic function of (pixel, backtrack); stop when a
    # state repeats, which provably terminates and closes the boundary cycle.
    contour = [start]
    state = (start, (start[0] - 1, start[1]))  # entered scanning the row, so west
    seen = set()
    while state not in seen:
        seen.add(state)
        cur, back = state
        bi = _RING_INDEX[(back[0] - cur[0], back[1] - cur[1])]
        nxt = None
        for k in range(1, 9):
            dx, dy = _RING[(bi + k) % 8]
            cand = (cur[0] + dx, cur[1] + dy)
            if fg(*cand):
                nxt = cand
                break
            back = cand
        if nxt is None:
            break  # isolated pixel
        state = (nxt, back)
        if state not in seen:
            contour.append(nxt)
    return np.array(contour, dtype=np.float64)


def largest_region(mask: np.ndarray) -> RegionModel:
    """Largest component with barycenter and contour filled in."""
    regions = connected_components(mask)
    if not regions:
        raise EmptyMaskError("mask has no foreground pixels")
    region = regions[0]
    return replace(region, barycenter=barycenter(region, mask),
                   contour=trace_contour(region))


def _wrap_angle(deg):
    return (np.asarray(deg) + 180.0) % 360.0 - 180.0


def ray_intersections(region: RegionModel, beta: float, xi: float) -> np.ndarray:
    """Contour point hit by a ray at angle ``beta`` from the barycenter.

    Candidates are contour points whose direction from the barycenter lies
    within ``xi`` degrees of ``beta``; of those, the one farthest from the
    barycenter is returned, so non-convex shapes resolve to their outer rim.
    Raises :class:`NoIntersectionError` when no contour point matches.
    """
    if region.contour is None or region.barycenter is None:
        raise ValueError("region needs barycenter and contour (see largest_region)")
    rel = region.contour - region.barycenter
    ang = np.degrees(np.arctan2(rel[:, 1], rel[:, 0]))
    match = np.abs(_wrap_angle(ang - beta)) <= xi
    if not match.any():
        raise NoIntersectionError(f"no contour point within {xi} deg of {beta} deg")
    dist = np.hypot(rel[:, 0], rel[:, 1])
    k = int(np.argmax(np.where(match, dist, -1.0)))
    return region.contour[k].copy()


def contour_handles(region: RegionModel, cfg: ContourConfig) -> np.ndarray:
    """Warp anchors on the region contour, one per matching probe ray.

    Rays that miss are dropped; points within ``dedupe_dist`` of an accepted
    one are merged.  Fewer than 3 surviving anchors raise
    :class:`DegenerateRegionError` (the warp would be under-constrained).
    """
    picked: list[np.ndarray] = []
    for beta in cfg.ray_angles:
        try:
            pt = ray_intersections(region, beta, cfg.xi)
        except NoIntersectionError:
            continue
        if any(math.hypot(*(pt - q)) < cfg.dedupe_dist for q in picked):
            continue
        picked.append(pt)
    if len(picked) < 3:
        raise DegenerateRegionError(
            f"only {len(picked)} contour handles found (need >= 3)")
    return np.array(picked, dtype=np.float64)


def contour_target(point, region: RegionModel, cfg: ContourConfig, i: int) -> np.ndarray:
    """Handle moved along direction i: p + L*(cos phi_i, sin phi_i).

    L = k_l * min(box width, box height); phi_i = phi0 + i*phi_step.
    """
    d = cfg.direction_count
    if not 0 <= i < d:
        raise ValueError(f"direction index {i} out of range for {d} directions")
    p = np.asarray(point, dtype=np.float64).reshape(2)
    length = cfg.k_l * min(region.bbox.w, region.bbox.h)
    phi = math.radians(cfg.phi0 + i * cfg.phi_step)
    return p + length * np.array([math.cos(phi), math.sin(phi)])
