import math

import numpy as np
import pytest

from cpfsim.exceptions import CurvatureBoundExceeded, DegenerateSpline, ProjectionAmbiguous
from cpfsim.paths import (CirclePath, LinePath, SplinePath, waypoints_from_lonlat,
                          wrap_angle)

from conftest import HIL_LONLAT, HIL_WAYPOINTS
from oracles import brute_force_projection


def test_wrap_angle_half_open():
    assert wrap_angle(math.pi) == -math.pi
    assert wrap_angle(-math.pi) == -math.pi
    assert wrap_angle(0.0) == 0.0
    assert abs(wrap_angle(3.0 * math.pi / 2.0) - (-math.pi / 2.0)) < 1e-12
    for x in np.linspace(-20.0, 20.0, 1001):
        w = wrap_angle(float(x))
        assert -math.pi <= w < math.pi


class TestCircle:
    def test_anchor_points(self, circle):
        x, y = circle.point_at(0.0)
        assert (x, y) == pytest.approx((1000.0, 0.0), abs=1e-9)
        # half circumference is 1000*pi for r = 1000
        x, y = circle.point_at(1000.0 * math.pi)
        assert (x, y) == pytest.approx((-1000.0, 0.0), abs=1e-6)
        x, y = circle.point_at(500.0 * math.pi)  # quarter
        assert (x, y) == pytest.approx((0.0, 1000.0), abs=1e-6)

    def test_closure(self, circle):
        for s in (0.0, 123.4, 5000.0):
            a = circle.point_at(s)
            b = circle.point_at(s + circle.total_length)
            assert a == pytest.approx(b, abs=1e-6)

    def test_curvature_sign(self, circle):
        for s in np.linspace(0, circle.total_length, 17):
            assert circle.curvature_at(float(s)) == pytest.approx(0.001)
        cw = CirclePath((0.0, 0.0), 1000.0, "cw", kappa_bound=0.002)
        assert cw.curvature_at(100.0) == pytest.approx(-0.001)

    def test_projection_interior_point(self, circle):
        pr = circle.project((600.0, 0.0))
        assert pr.s == pytest.approx(0.0, abs=1e-9)
        assert pr.point == pytest.approx((1000.0, 0.0))
        assert pr.rho == pytest.approx(400.0)  # interior of a ccw circle is its left
        assert pr.tangent_angle == pytest.approx(math.pi / 2.0)

    def test_projection_on_path(self, circle):
        assert circle.project((1000.0, 0.0)).rho == pytest.approx(0.0, abs=1e-12)

    def test_projection_center_ambiguous(self, circle):
        with pytest.raises(ProjectionAmbiguous):
            circle.project((0.0, 0.0))

    def test_round_trip(self, circle):
        for s in np.linspace(0.0, circle.total_length, 400, endpoint=False):
            pr = circle.project(circle.point_at(float(s)))
            assert abs(pr.s - s) < 1e-6

    def test_rejects_overtight_curvature(self):
        with pytest.raises(CurvatureBoundExceeded):
            CirclePath((0.0, 0.0), 400.0, "ccw", kappa_bound=0.002)

    def test_arc_distance(self, circle):
        L = 1000.0 * math.pi / 3.0
        assert circle.arc_distance(0.0, L) == pytest.approx(1047.1975511965976)
        assert circle.arc_distance(77.0, 77.0) == 0.0
        C = circle.total_length
        assert circle.arc_distance(C - 1.0, 1.0) == pytest.approx(2.0)


class TestLine:
    def test_geometry(self):
        line = LinePath((0.0, 0.0), 0.0)
        assert line.point_at(3.0) == pytest.approx((3.0, 0.0))
        assert line.curvature_at(10.0) == 0.0
        pr = line.project((3.0, -2.0))
        assert pr.s == pytest.approx(3.0)
        assert pr.rho == pytest.approx(-2.0)  # right of the direction of travel

    def test_arc_distance_signed(self):
        line = LinePath((0.0, 0.0), 0.5)
        assert line.arc_distance(10.0, 4.0) == pytest.approx(-6.0)


class TestSpline:
    def test_starts_at_first_waypoint(self, hil_spline):
        assert hil_spline.point_at(0.0) == pytest.approx((0.0, 0.0), abs=1e-9)

    def test_curvature_bound_dense_oracle(self, hil_spline):
        # independent finite-difference scan at 0.1 m resolution
        s = np.arange(0.0, hil_spline.total_length, 0.1)
        pts = np.array([hil_spline.point_at(float(v)) for v in s])
        d1 = np.gradient(pts, s, axis=0)
        d2 = np.gradient(d1, s, axis=0)
        speed = np.hypot(d1[:, 0], d1[:, 1])
        kappa_fd = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed ** 3
        assert np.abs(kappa_fd[5:-5]).max() < 0.002
        kappa_lib = np.array([hil_spline.curvature_at(float(v)) for v in s])
        assert np.abs(kappa_lib - kappa_fd)[5:-5].max() < 1e-4

    def test_rejects_curvature_violation(self):
        with pytest.raises(CurvatureBoundExceeded):
            SplinePath(HIL_WAYPOINTS, kappa_bound=0.001)

    def test_degenerate_spline(self):
        with pytest.raises(DegenerateSpline):
            SplinePath([(0.0, 0.0)] * 4, kappa_bound=0.002)
        with pytest.raises(DegenerateSpline):
            SplinePath([(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (100.0, 0.0)],
                       kappa_bound=0.002)

    def test_tangent_consistent_with_points(self, hil_spline):
        h = 0.05
        for s in np.linspace(10.0, hil_spline.total_length - 10.0, 60):
            x0, y0 = hil_spline.point_at(float(s) - h)
            x1, y1 = hil_spline.point_at(float(s) + h)
            fd = math.atan2(y1 - y0, x1 - x0)
            assert abs(wrap_angle(fd - hil_spline.tangent_angle_at(float(s)))) < 1e-3
            # unit-speed parameterization: chord over arc close to 1
            assert math.hypot(x1 - x0, y1 - y0) / (2 * h) == pytest.approx(1.0, abs=1e-3)

    def test_round_trip(self, hil_spline):
        for s in np.linspace(0.0, hil_spline.total_length, 300):
            pr = hil_spline.project(hil_spline.point_at(float(s)))
            assert abs(pr.s - s) < 1e-6

    def test_warm_start_round_trip(self, hil_spline):
        for s in np.linspace(5.0, hil_spline.total_length - 5.0, 100):
            pr = hil_spline.project(hil_spline.point_at(float(s)), hint_s=float(s) + 4.0)
            assert abs(pr.s - s) < 1e-6

    def test_projection_optimality_vs_brute_force(self, hil_spline):
        rng = np.random.default_rng(7)
        for _ in range(60):
            s = rng.uniform(0.0, hil_spline.total_length)
            rho = rng.uniform(-480.0, 480.0)
            x, y = hil_spline.point_at(s)
            ta = hil_spline.tangent_angle_at(s)
            q = (x - rho * math.sin(ta), y + rho * math.cos(ta))
            pr = hil_spline.project(q)
            found = math.hypot(pr.x - q[0], pr.y - q[1])
            assert found <= brute_force_projection(hil_spline, q) + 1e-4

    def test_projection_orthogonality(self, hil_spline):
        rng = np.random.default_rng(11)
        for _ in range(200):
            q = (rng.uniform(-500.0, 12500.0), rng.uniform(-2500.0, 2500.0))
            pr = hil_spline.project(q)
            tx, ty = math.cos(pr.tangent_angle), math.sin(pr.tangent_angle)
            ex, ey = q[0] - pr.x, q[1] - pr.y
            norm = math.hypot(ex, ey)
            if norm > 1e-9:
                assert abs(ex * tx + ey * ty) <= 1e-9 * norm

    def test_ambiguous_far_point_on_symmetry_axis(self):
        valley = SplinePath([(0.0, 2000.0), (1000.0, 600.0), (2000.0, 0.0),
                             (3000.0, 600.0), (4000.0, 2000.0)], kappa_bound=0.002)
        with pytest.raises(ProjectionAmbiguous):
            valley.project((2000.0, 2500.0))
        # off-axis points stay unique
        assert valley.project((2100.0, 2500.0)).rho != 0.0

    def test_extrapolation_beyond_ends(self, hil_spline):
        x0, y0 = hil_spline.point_at(0.0)
        xm, ym = hil_spline.point_at(-50.0)
        ta = hil_spline.tangent_angle_at(-1.0)
        assert (xm, ym) == pytest.approx((x0 - 50.0 * math.cos(ta),
                                          y0 - 50.0 * math.sin(ta)), abs=1e-6)
        assert hil_spline.curvature_at(-1.0) == 0.0
        pr = hil_spline.project(hil_spline.point_at(hil_spline.total_length + 40.0))
        assert pr.s == pytest.approx(hil_spline.total_length + 40.0, abs=1e-6)


def test_lonlat_conversion_matches_table():
    wps = waypoints_from_lonlat(HIL_LONLAT, origin=HIL_LONLAT[0])
    assert wps[0] == pytest.approx((0.0, 0.0), abs=1e-9)
    for (x, y), (xt, yt) in zip(wps[1:], HIL_WAYPOINTS[1:]):
        assert x == pytest.approx(xt, rel=5e-3)
        assert y == pytest.approx(yt, rel=5e-3, abs=15.0)
