"""Handle placement on a proportional 3x3 grid, and move-pattern enumeration.

The grid scheme needs no mask: nine anchor points are placed at the pairwise
products of {k_p, 1/2, 1 - k_p} of the image dimensions.  A variant moves a
small subset of anchors, each along one of D = floor(1/k_s) evenly spaced
directions, by a length proportional to the image size.  Enumeration is
deterministic and level-ordered: every 1-anchor pattern, then every 2-anchor
pattern, and so on, truncated at the requested count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator

import numpy as np

from .errors import PatternSpaceExhausted

__all__ = [
    "GridConfig",
    "MovePattern",
    "nine_point_grid",
    "direction_count",
    "displacement_length",
    "displaced_target",
    "pattern_space_size",
    "iter_patterns",
    "enumerate_patterns",
    "displace_points",
]


@dataclass(frozen=True)
class GridConfig:
    """Coefficients of the grid scheme.

    k_p places the outer anchors, k_l scales the move length, k_s sets the
    angular step (direction count D = floor(1/k_s)), phi0 is the first move
    direction in degrees.
    """

    k_p: float = 0.23
    k_l: float = 0.14
    k_s: float = 0.25
    phi0: float = 45.0

    def __post_init__(self):
        for name in ("k_p", "k_l", "k_s"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and 0.0 < val < 1.0):
                raise ValueError(f"{name} must lie strictly in (0, 1), got {val}")
        if self.k_p == 0.5:
            raise ValueError("k_p = 0.5 collapses the grid onto the center lines")
        if not (isinstance(self.phi0, (int, float)) and math.isfinite(self.phi0)):
            raise ValueError(f"phi0 must be a finite angle in degrees, got {self.phi0}")


def nine_point_grid(width: float, height: float, k_p: float) -> np.ndarray:
    """The nine anchor points, row-major (x varies fastest), shape (9, 2)."""
    if width <= 0 or height <= 0:
        raise ValueError(f"dims must be positive, got {width}x{height}")
    if not 0.0 < k_p < 1.0:
        raise ValueError(f"k_p must lie in (0, 1), got {k_p}")
    if k_p == 0.5:
        raise ValueError("k_p = 0.5 collapses the grid onto the center lines")
    xs = (k_p * width, width / 2.0, (1.0 - k_p) * width)
    ys = (k_p * height, height / 2.0, (1.0 - k_p) * height)
    return np.array([(x, y) for y in ys for x in xs], dtype=np.float64)


def direction_count(k_s: float) -> int:
    """Number of evenly spaced move directions, D = floor(1/k_s)."""
    if not 0.0 < k_s < 1.0:
        raise ValueError(f"k_s must lie in (0, 1), got {k_s}")
    return int(math.floor(1.0 / k_s))


def displacement_length(width: float, height: float, k_p: float, k_l: float) -> float:
    """Move length L = k_l * min(k_p*(width - 0.5), k_p*(height - 0.5)).

    With k_l < 1 this stays strictly below the anchor-to-border margin, so a
    moved anchor cannot cross the image edge.
    """
    if not 0.0 < k_l < 1.0:
        raise ValueError(f"k_l must lie in (0, 1), got {k_l}")
    if not 0.0 < k_p < 1.0:
        raise ValueError(f"k_p must lie in (0, 1), got {k_p}")
    return k_l * min(k_p * (width - 0.5), k_p * (height - 0.5))


def displaced_target(point, length: float, phi0: float, k_s: float, j: int) -> np.ndarray:
    """Anchor moved along direction j: p + L*(cos phi_j, sin phi_j), phi_j = phi0 + 360*j*k_s."""
    d = direction_count(k_s)
    if not 0 <= j < d:
        raise ValueError(f"direction index {j} out of range for D={d}")
    p = np.asarray(point, dtype=np.float64).reshape(2)
    phi = math.radians(phi0 + 360.0 * j * k_s)
    return p + length * np.array([math.cos(phi), math.sin(phi)])


@dataclass(frozen=True)
class MovePattern:
    """Which anchors move, and along which direction index each one moves.

    ``moves`` is a tuple of (anchor_index, direction_index) pairs sorted by
    anchor index; unmoved anchors keep their position.
    """

    moves: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.moves:
            raise ValueError("a move pattern must move at least one anchor")
        idx = [m[0] for m in self.moves]
        if sorted(set(idx)) != idx:
            raise ValueError("anchor indices must be strictly increasing")
        if any(m[0] < 0 or m[1] < 0 for m in self.moves):
            raise ValueError("indices must be non-negative")

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(m[0] for m in self.moves)

    @property
    def directions(self) -> tuple[int, ...]:
        return tuple(m[1] for m in self.moves)


def pattern_space_size(handle_count: int, directions: int) -> int:
    """Total distinct patterns: sum over m>=1 of C(n, m)*D^m = (1+D)^n - 1."""
    return (1 + directions) ** handle_count - 1


def iter_patterns(handle_count: int, directions: int) -> Iterator[MovePattern]:
    """All patterns, level-ordered: 1-anchor first, combos and directions lexicographic."""
    if handle_count < 1 or directions < 1:
        raise ValueError("need at least one anchor and one direction")
    for level in range(1, handle_count + 1):
        for combo in combinations(range(handle_count), level):
            for dirs in product(range(directions), repeat=level):
                yield MovePattern(tuple(zip(combo, dirs)))


def enumerate_patterns(handle_count: int, directions: int, count: int) -> list[MovePattern]:
    """First ``count`` patterns of the level ordering.

    Raises :class:`PatternSpaceExhausted` when ``count`` exceeds the space.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    total = pattern_space_size(handle_count, directions)
    if count > total:
        raise PatternSpaceExhausted(
            f"{count} variants requested but only {total} distinct patterns "
            f"exist for {handle_count} anchors x {directions} directions")
    out = []
    for pat in iter_patterns(handle_count, directions):
        out.append(pat)
        if len(out) == count:
            break
    return out


def displace_points(points: np.ndarray, pattern: MovePattern, length: float,
                    phi0: float, step_degrees: float) -> np.ndarray:
    """Apply a move pattern: moved anchors shift by L along phi0 + j*step."""
    pts = np.array(points, dtype=np.float64, copy=True)
    for idx, j in pattern.moves:
        if idx >= len(pts):
            raise ValueError(f"pattern moves anchor {idx} but only {len(pts)} exist")
        phi = math.radians(phi0 + j * step_degrees)
        pts[idx, 0] += length * math.cos(phi)
        pts[idx, 1] += length * math.sin(phi)
    return pts
