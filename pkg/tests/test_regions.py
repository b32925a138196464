import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from conftest import make_disk
from mlsaug.errors import (DegenerateRegionError, EmptyMaskError,
                           NoIntersectionError)
from mlsaug.regions import (ContourConfig, barycenter, connected_components,
                            contour_handles, contour_target, largest_region,
                            ray_intersections, trace_contour)
from reference import boundary_pixels, flood_components, gray_barycenter

small_masks = hnp.arrays(np.uint8, hnp.array_shapes(min_dims=2, max_dims=2,
                                                    min_side=1, max_side=12),
                         elements=st.sampled_from([0, 0, 0, 255, 9]))


def region_pixels(region):
    ys, xs = np.nonzero(region.omega)
    return set(zip(xs.tolist(), ys.tolist()))


class TestComponents:
    def test_two_blobs_largest_first(self):
        m = np.zeros((10, 10), np.uint8)
        m[1:3, 1:3] = 255          # 4 px
        m[5:9, 5:9] = 255          # 16 px
        regs = connected_components(m)
        assert [r.count for r in regs] == [16, 4]
        assert regs[0].bbox.x == 5 and regs[0].bbox.w == 3

    def test_diagonal_connectivity(self):
        m = np.zeros((4, 4), np.uint8)
        m[0, 0] = m[1, 1] = m[2, 2] = 1
        assert len(connected_components(m)) == 1

    def test_empty_mask(self):
        assert connected_components(np.zeros((5, 5), np.uint8)) == []
        with pytest.raises(EmptyMaskError):
            largest_region(np.zeros((5, 5), np.uint8))

    @given(small_masks)
    @settings(max_examples=80, deadline=None)
    def test_matches_flood_fill(self, mask):
        got = sorted((region_pixels(r) for r in connected_components(mask)),
                     key=lambda s: sorted(s))
        want = sorted(flood_components(mask.tolist()), key=lambda s: sorted(s))
        assert got == want


class TestBarycenter:
    def test_uniform_square(self):
        m = np.zeros((9, 9), np.uint8)
        m[2:5, 3:6] = 255
        r = connected_components(m)[0]
        assert barycenter(r, m) == pytest.approx([4.0, 3.0])

    def test_gray_weighting(self):
        m = np.zeros((3, 5), np.uint8)
        m[1, 1] = 100
        m[1, 2] = 200
        r = connected_components(m)[0]
        assert barycenter(r, m) == pytest.approx([(1 * 100 + 2 * 200) / 300, 1.0])

    @given(small_masks)
    @settings(max_examples=60, deadline=None)
    def test_matches_loop_reference(self, mask):
        for r in connected_components(mask):
            want = gray_barycenter(mask.tolist(), region_pixels(r))
            assert barycenter(r, mask) == pytest.approx(want, abs=1e-9)


class TestContour:
    def test_square_boundary(self):
        m = np.zeros((8, 8), np.uint8)
        m[2:5, 3:6] = 255
        c = trace_contour(connected_components(m)[0])
        assert len(c) == 8                       # 3x3 square minus its center
        assert {tuple(p) for p in c.tolist()} == \
            {(x, y) for x in (3, 4, 5) for y in (2, 3, 4)} - {(4, 3)}

    def test_single_pixel(self):
        m = np.zeros((4, 4), np.uint8)
        m[2, 1] = 255
        c = trace_contour(connected_components(m)[0])
        assert c.tolist() == [[1.0, 2.0]]

    def test_disk_near_ideal_circle(self):
        m = make_disk(64, (32, 32), 20)
        c = trace_contour(connected_components(m)[0])
        rad = np.hypot(c[:, 0] - 32, c[:, 1] - 32)
        assert np.all(np.abs(rad - 20.0) < 1.0)

    @given(small_masks)
    @settings(max_examples=80, deadline=None)
    def test_boundary_property(self, mask):
        for r in connected_components(mask):
            c = trace_contour(r)
            pix = region_pixels(r)
            border = boundary_pixels(mask.tolist(), pix)
            for x, y in c.tolist():
                assert (x, y) in pix
                assert (x, y) in border


class TestRays:
    def test_disk_cardinal(self):
        r = largest_region(make_disk(64, (32, 32), 20))
        p = ray_intersections(r, 0.0, 3.0)
        assert p == pytest.approx([52.0, 32.0])
        p = ray_intersections(r, 90.0, 3.0)   # y grows downward
        assert p == pytest.approx([32.0, 52.0])

    def test_square_diagonal_hits_corner(self):
        m = np.zeros((32, 32), np.uint8)
        m[8:25, 8:25] = 255
        r = largest_region(m)
        p = ray_intersections(r, 45.0, 3.0)
        assert p == pytest.approx([24.0, 24.0])

    def test_no_match_raises(self):
        r = largest_region(make_disk(64, (32, 32), 3))
        with pytest.raises(NoIntersectionError):
            ray_intersections(r, 22.5, 0.05)

    def test_farthest_wins_on_nonconvex(self):
        # rectangle with a 1-px slot cut from the right edge toward the middle:
        # the 0-deg window holds slot-wall pixels at many radii plus the outer
        # rim; the outer rim must win
        m = np.zeros((21, 41), np.uint8)
        m[3:18, 3:38] = 255
        m[10, 20:38] = 0
        r = largest_region(m)
        p = ray_intersections(r, 0.0, 6.0)
        assert p[0] == 37.0 and p[1] in (9.0, 11.0)


class TestContourHandles:
    def test_disk_eight_handles(self):
        r = largest_region(make_disk(64, (32, 32), 20))
        pts = contour_handles(r, ContourConfig())
        assert len(pts) == 8
        for beta, p in zip(range(0, 360, 45), pts):
            want = (32 + 20 * math.cos(math.radians(beta)),
                    32 + 20 * math.sin(math.radians(beta)))
            assert math.hypot(p[0] - want[0], p[1] - want[1]) < 1.0

    def test_dedupe_merges_close_picks(self):
        r = largest_region(make_disk(64, (32, 32), 20))
        cfg = ContourConfig(ray_angles=(0.0, 1.0, 45.0, 90.0, 180.0, 270.0))
        pts = contour_handles(r, cfg)
        assert len(pts) == 5  # rays at 0 and 1 deg pick the same pixel

    def test_degenerate_region(self):
        m = np.zeros((10, 10), np.uint8)
        m[5, 5] = 255
        with pytest.raises(DegenerateRegionError):
            contour_handles(largest_region(m), ContourConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ContourConfig(xi=0.0)
        with pytest.raises(ValueError):
            ContourConfig(ray_angles=())
        with pytest.raises(ValueError):
            ContourConfig(k_l=1.0)


class TestContourTarget:
    def test_frozen_example(self):
        m = np.zeros((80, 80), np.uint8)
        m[10:71, 20:61] = 255   # box extent 40 x 60
        r = largest_region(m)
        assert r.bbox.w == 40 and r.bbox.h == 60
        cfg = ContourConfig(k_l=0.1, phi0=45.0, phi_step=90.0)
        q = contour_target((30.0, 30.0), r, cfg, 0)
        assert q == pytest.approx([32.8284271247, 32.8284271247], abs=1e-9)

    def test_opposite_directions_reflect(self):
        r = largest_region(make_disk(64, (32, 32), 20))
        cfg = ContourConfig()
        p = (40.0, 32.0)
        q0 = contour_target(p, r, cfg, 0)
        q2 = contour_target(p, r, cfg, 2)
        assert q0 + q2 == pytest.approx([2 * p[0], 2 * p[1]], abs=1e-12)

    def test_direction_range(self):
        r = largest_region(make_disk(64, (32, 32), 20))
        with pytest.raises(ValueError):
            contour_target((0.0, 0.0), r, ContourConfig(), 4)
