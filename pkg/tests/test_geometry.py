"""Tests for the immersed geometry generators."""

import numpy as np
import pytest

from ibflow.geometry import (
    LagrangianMesh,
    arc_length,
    compute_curvatures,
    make_circle,
    make_heart_states,
    make_swimmer,
)


class TestCircle:
    def test_four_points_on_axes(self):
        mesh = make_circle((0.0, 0.0), 1.0, 4)
        expected = [(1, 0), (0, 1), (-1, 0), (0, -1)]
        np.testing.assert_allclose(mesh.points, expected, atol=1e-15)

    def test_points_on_radius(self):
        mesh = make_circle((0.3, -0.2), 0.7, 57)
        r = np.linalg.norm(mesh.points - [0.3, -0.2], axis=1)
        assert np.max(np.abs(r - 0.7)) <= 1e-12

    def test_fine_circle_spacing(self):
        mesh = make_circle((0.0, 0.0), 0.1, 360)
        target = 2 * np.pi * 0.1 / 360
        np.testing.assert_allclose(mesh.spacing(), target, rtol=1e-4)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            make_circle((0, 0), -1.0, 16)
        with pytest.raises(ValueError):
            make_circle((0, 0), 1.0, 2)


class TestCurvature:
    def test_straight_chain_is_flat(self):
        pts = np.column_stack([np.linspace(0, 5, 11), np.linspace(1, 3, 11)])
        np.testing.assert_allclose(compute_curvatures(pts), 0.0, atol=1e-12)

    def test_three_point_example(self):
        c = compute_curvatures([(0.0, 0.0), (1.0, 0.0), (2.0, 1.0)])
        np.testing.assert_allclose(c, [(0.0, 1.0)])

    def test_count_is_n_minus_2(self):
        pts = np.random.default_rng(0).standard_normal((37, 2))
        assert compute_curvatures(pts).shape == (35, 2)

    def test_circle_top_second_difference(self):
        # triple centered on the top of the circle: C_y = 2r(cos(dtheta) - 1),
        # which is -r dtheta^2 up to a dtheta^4 correction
        r, n = 0.5, 100
        mesh = make_circle((0.0, 0.0), r, n)
        dtheta = 2 * np.pi / n
        c = compute_curvatures(mesh.points)
        top = n // 4  # point at angle pi/2; its triple is row top-1
        assert c[top - 1, 1] == pytest.approx(-r * dtheta**2, rel=1e-3)
        assert c[top - 1, 0] == pytest.approx(0.0, abs=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((12, 2))
        y = rng.standard_normal((12, 2))
        lhs = compute_curvatures(2.5 * x - 1.25 * y)
        rhs = 2.5 * compute_curvatures(x) - 1.25 * compute_curvatures(y)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_affine_image_of_line_is_flat(self):
        t = np.linspace(0, 1, 9)
        base = np.column_stack([t, np.zeros_like(t)])
        ang = 0.7
        rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
        pts = base @ rot.T + [3.0, -2.0]
        np.testing.assert_allclose(compute_curvatures(pts), 0.0, atol=1e-12)

    def test_too_short(self):
        with pytest.raises(ValueError):
            compute_curvatures([(0.0, 0.0), (1.0, 1.0)])


class TestSwimmer:
    def test_phases_share_straight_portion(self):
        m1, m2 = make_swimmer(1.0, 1.0 / 32)
        straight = m1.points[:, 1] == 0.0
        assert straight.sum() >= 2
        np.testing.assert_array_equal(m1.points[straight], m2.points[straight])

    def test_tail_is_mirrored(self):
        m1, m2 = make_swimmer(1.0, 1.0 / 32)
        np.testing.assert_array_equal(m1.points[:, 0], m2.points[:, 0])
        np.testing.assert_allclose(m2.points[:, 1], -m1.points[:, 1], atol=0)

    def test_total_arc_length_near_body_length(self):
        for length, ds in [(1.0, 1.0 / 32), (1.0, 1.0 / 64), (2.0, 1.0 / 32)]:
            m1, _ = make_swimmer(length, ds)
            assert arc_length(m1.points) == pytest.approx(length, rel=0.02)

    def test_tail_span_and_split(self):
        length = 1.0
        m1, _ = make_swimmer(length, 1.0 / 64)
        x = m1.points[:, 0]
        # head at the largest x, tail reaching one tenth of the body length
        assert x[0] == pytest.approx(0.28 * length, abs=1.0 / 64)
        assert -x.min() == pytest.approx(0.1 * length, rel=0.05)
        tail_arc = arc_length(m1.points[x <= 0.0])
        assert tail_arc == pytest.approx(0.72 * length, rel=0.03)

    def test_spacing_within_tolerance(self):
        m1, _ = make_swimmer(1.0, 1.0 / 64)
        gaps = m1.spacing()
        assert np.all(np.abs(gaps - m1.ds) <= 0.2 * m1.ds)

    def test_head_is_first_point(self):
        m1, _ = make_swimmer(1.0, 1.0 / 32)
        assert m1.points[0, 0] == np.max(m1.points[:, 0])

    def test_bad_spacing(self):
        with pytest.raises(ValueError):
            make_swimmer(1.0, 1.5)


class TestHeart:
    def test_states_share_shape_and_ordering(self):
        mesh_a, pts_b = make_heart_states((0.5, 0.5), 0.5, 0.8, 1.0 / 32)
        assert mesh_a.points.shape == pts_b.shape
        # contraction about the shared center maps state A onto state B
        ca = mesh_a.points.mean(axis=0)
        cb = pts_b.mean(axis=0)
        np.testing.assert_allclose(ca, cb, atol=1e-9)
        np.testing.assert_allclose((pts_b - cb) / 0.8, mesh_a.points - ca, atol=1e-3)

    def test_gap_present(self):
        mesh_a, _ = make_heart_states((0.0, 0.0), 0.5, 0.8, 1.0 / 32, gap_fraction=0.1)
        gap = np.linalg.norm(mesh_a.points[0] - mesh_a.points[-1])
        # the outline must stay open wide enough for fluid to pass
        assert gap > 1.5 * mesh_a.ds
        wider, _ = make_heart_states((0.0, 0.0), 0.5, 0.8, 1.0 / 32, gap_fraction=0.2)
        assert np.linalg.norm(wider.points[0] - wider.points[-1]) > gap

    def test_spacing_within_tolerance(self):
        mesh_a, _ = make_heart_states((0.0, 0.0), 0.5, 0.8, 1.0 / 64)
        gaps = mesh_a.spacing()
        assert np.all(np.abs(gaps - mesh_a.ds) <= 0.2 * mesh_a.ds)

    def test_bad_contraction(self):
        with pytest.raises(ValueError):
            make_heart_states((0, 0), 0.5, 1.2, 1.0 / 32)


class TestMesh:
    def test_requires_enough_points(self):
        with pytest.raises(ValueError):
            LagrangianMesh(points=np.zeros((2, 2)), ds=0.1)

    def test_closed_spacing_wraps(self):
        mesh = make_circle((0, 0), 1.0, 10)
        assert mesh.spacing().size == 10
