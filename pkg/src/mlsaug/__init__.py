"""Deterministic label-preserving image augmentation via rigid MLS warps."""

from .boxes import Annotation, BBox, bbox_from_mask, bbox_from_points, propagate
from .errors import (DegenerateRegionError, EmptyMaskError, NoIntersectionError,
                     PatternSpaceExhausted)
from .mls import (HandleSet, PrecomputedBasis, WarpField, build_warp_field,
                  compute_weights, field_to_maps, precompute_basis, rigid_transform,
                  sample_image, transform_lattice, transform_point, warp_image,
                  warp_image_with_handles, warp_mask, weighted_centroids)
from .pipeline import LabeledSample, RunConfig, load_dataset, render_from_record, run_augmentation
from .preview import preview_render
from .regions import (ContourConfig, RegionModel, barycenter, connected_components,
                      contour_handles, contour_target, largest_region,
                      ray_intersections, trace_contour)
from .schemes import (GridConfig, MovePattern, direction_count, displaced_target,
                      displacement_length, displace_points, enumerate_patterns,
                      iter_patterns, nine_point_grid, pattern_space_size)

__version__ = "0.1.0"
