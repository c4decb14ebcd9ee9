import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vtouch.core import ScreenSpec
from vtouch.sources import (
    AmbiguousSpot,
    CalibrationCorners,
    DegenerateQuad,
    FingertipSample,
    Frame,
    Homography,
    ImuCalibration,
    LeapCalibration,
    ProjectionAtInfinity,
    ZeroSpan,
    calibrate_homography,
    calibrate_imu,
    detect_laser_spot,
    fingertip_to_screen,
    imu_to_screen,
    project_to_screen,
)

SPEC = ScreenSpec(1024, 768, 0.42, 650.0)


def render_gaussian(width, height, cx, cy, sigma, peak, background=10):
    """Synthetic-frame oracle: a Gaussian spot on a flat background."""
    ys, xs = np.mgrid[0:height, 0:width]
    spot = peak * np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2 * sigma ** 2))
    img = np.clip(np.maximum(spot, background), 0, 255).astype(np.uint8)
    return Frame(width, height, img)


class TestLaserSpot:
    def test_gaussian_centroid(self):
        frame = render_gaussian(64, 48, 20.0, 10.0, 1.5, 255)
        pt = detect_laser_spot(frame, 128)
        assert pt is not None
        assert math.hypot(pt[0] - 20.0, pt[1] - 10.0) < 0.5

    def test_uniform_frame_no_spot(self):
        frame = Frame(64, 48, np.full((48, 64), 10, dtype=np.uint8))
        assert detect_laser_spot(frame, 128) is None

    def test_two_equal_spots_ambiguous(self):
        img = np.full((48, 64), 10, dtype=np.uint8)
        img[10, 10] = 255
        img[30, 50] = 255
        with pytest.raises(AmbiguousSpot):
            detect_laser_spot(Frame(64, 48, img), 128)

    def test_dim_second_spot_ok(self):
        img = np.full((48, 64), 10, dtype=np.uint8)
        img[10, 10] = 255
        img[30, 50] = 150  # below the 80% ambiguity bound
        pt = detect_laser_spot(Frame(64, 48, img), 128)
        assert pt == pytest.approx((10.0, 10.0))

    @settings(max_examples=40, deadline=None)
    @given(
        cx=st.floats(min_value=12.0, max_value=52.0),
        cy=st.floats(min_value=12.0, max_value=36.0),
        sigma=st.floats(min_value=0.8, max_value=3.0),
        peak=st.integers(min_value=160, max_value=255),
    )
    def test_subpixel_recovery_property(self, cx, cy, sigma, peak):
        # peak >= 2x the 80-threshold keeps a symmetric region above it
        frame = render_gaussian(64, 48, cx, cy, sigma, peak)
        pt = detect_laser_spot(frame, 80)
        assert pt is not None
        assert math.hypot(pt[0] - cx, pt[1] - cy) < 0.5


class TestPgm:
    def test_round_trip(self):
        frame = render_gaussian(32, 24, 15.5, 11.5, 2.0, 200)
        again = Frame.from_pgm(frame.to_pgm())
        assert again.width == 32 and again.height == 24
        assert np.array_equal(again.pixels, frame.pixels)

    def test_comments_in_header(self):
        data = b"P5\n# a comment\n2 2\n255\n" + bytes([0, 50, 100, 200])
        frame = Frame.from_pgm(data)
        assert frame.pixels.tolist() == [[0, 50], [100, 200]]

    def test_wrong_magic(self):
        with pytest.raises(ValueError):
            Frame.from_pgm(b"P2\n2 2\n255\n0 0 0 0")


UNIT = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
CAM = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]
SCR = [(0.0, 0.0), (1024.0, 0.0), (1024.0, 768.0), (0.0, 768.0)]


class TestHomography:
    def test_identity_calibration(self):
        h = calibrate_homography(UNIT, UNIT)
        assert np.allclose(h.m, np.eye(3), atol=1e-9)
        pt = project_to_screen(h, (0.5, 0.5), SPEC)
        assert (pt.x_px, pt.y_px) == pytest.approx((0.5, 0.5))

    def test_scaling_midpoint(self):
        h = calibrate_homography(CAM, SCR)
        pt = project_to_screen(h, (1.0, 1.0), SPEC)
        assert (pt.x_px, pt.y_px) == pytest.approx((512.0, 384.0))
        assert pt.in_bounds

    def test_maps_pairs_within_tolerance(self):
        cam = [(3.1, 4.2), (120.5, 9.7), (118.0, 88.8), (5.5, 92.1)]
        h = calibrate_homography(cam, SCR)
        for c, s in zip(cam, SCR):
            pt = project_to_screen(h, c, SPEC)
            assert math.hypot(pt.raw_x_px - s[0], pt.raw_y_px - s[1]) < 1e-6

    def test_collinear_camera_quad(self):
        with pytest.raises(DegenerateQuad) as exc:
            calibrate_homography([(0, 0), (1, 1), (2, 2), (0, 2)], SCR)
        assert exc.value.which == "camera"

    def test_collinear_screen_quad(self):
        with pytest.raises(DegenerateQuad) as exc:
            calibrate_homography(CAM, [(0, 0), (1, 0), (2, 0), (0, 2)])
        assert exc.value.which == "screen"

    def test_boundary_corner_in_bounds(self):
        h = calibrate_homography(CAM, SCR)
        pt = project_to_screen(h, (2.0, 1.0), SPEC)
        assert (pt.x_px, pt.y_px) == pytest.approx((1024.0, 384.0))
        assert pt.in_bounds

    def test_clamped_out_of_bounds(self):
        h = calibrate_homography(CAM, SCR)
        pt = project_to_screen(h, (3.0, 1.0), SPEC)
        assert (pt.x_px, pt.y_px) == pytest.approx((1024.0, 384.0))
        assert not pt.in_bounds
        assert pt.raw_x_px == pytest.approx(1536.0)

    def test_projection_at_infinity(self):
        h = Homography(np.array([[1.0, 0, 0], [0, 1.0, 0], [-1.0, 0, 1.0]]))
        with pytest.raises(ProjectionAtInfinity):
            project_to_screen(h, (1.0, 0.5), SPEC)

    @settings(max_examples=50, deadline=None)
    @given(
        x=st.floats(min_value=-1.0, max_value=3.0),
        y=st.floats(min_value=-1.0, max_value=3.0),
    )
    def test_round_trip_property(self, x, y):
        cam = [(0.0, 0.0), (2.0, 0.1), (2.3, 2.0), (-0.1, 1.9)]
        h = calibrate_homography(cam, SCR)
        fwd = project_to_screen(h, (x, y), SPEC)
        back = project_to_screen(h.inverse(), (fwd.raw_x_px, fwd.raw_y_px), SPEC)
        assert math.hypot(back.raw_x_px - x, back.raw_y_px - y) < 1e-6


CORNERS = CalibrationCorners(((20.0, 15.0), (-20.0, 14.0), (-21.0, -15.0), (21.0, -14.0)))
SYM = ImuCalibration(yaw_LL=30.0, yaw_RL=-30.0, pitch_TL=20.0, pitch_BL=-20.0)


class TestImu:
    def test_calibration_limits(self):
        cal = calibrate_imu(CORNERS)
        assert cal == ImuCalibration(yaw_LL=21.0, yaw_RL=-21.0,
                                     pitch_TL=14.0, pitch_BL=-14.0)

    def test_identical_corners_zero_span(self):
        with pytest.raises(ZeroSpan):
            calibrate_imu(CalibrationCorners(((1.0, 2.0),) * 4))

    def test_symmetric_corners(self):
        cal = calibrate_imu(CalibrationCorners(
            ((30.0, 20.0), (-30.0, 20.0), (-30.0, -20.0), (30.0, -20.0))))
        assert cal == SYM

    def test_top_left_anchor(self):
        pt = imu_to_screen(SYM, 30.0, 20.0, SPEC)
        assert (pt.x_px, pt.y_px) == (0.0, 0.0)
        assert pt.in_bounds

    def test_midpoint(self):
        pt = imu_to_screen(SYM, 0.0, 0.0, SPEC)
        assert (pt.x_px, pt.y_px) == pytest.approx((512.0, 384.0))

    def test_far_corner_clamped(self):
        pt = imu_to_screen(SYM, -30.0, -20.0, SPEC)
        assert (pt.x_px, pt.y_px) == (1023.0, 767.0)
        assert not pt.in_bounds
        assert (pt.raw_x_px, pt.raw_y_px) == pytest.approx((1024.0, 768.0))

    def test_all_corners_anchor_exactly(self):
        # the calibration quad maps to the screen corners before clamping
        expected = [(0.0, 0.0), (1024.0, 0.0), (1024.0, 768.0), (0.0, 768.0)]
        angles = [(SYM.yaw_LL, SYM.pitch_TL), (SYM.yaw_RL, SYM.pitch_TL),
                  (SYM.yaw_RL, SYM.pitch_BL), (SYM.yaw_LL, SYM.pitch_BL)]
        for (yaw, pitch), (ex, ey) in zip(angles, expected):
            pt = imu_to_screen(SYM, yaw, pitch, SPEC)
            assert abs(pt.raw_x_px - ex) < 1e-9
            assert abs(pt.raw_y_px - ey) < 1e-9

    @given(st.floats(min_value=-29.0, max_value=29.0),
           st.floats(min_value=-29.0, max_value=29.0))
    def test_x_decreasing_in_yaw(self, yaw_a, yaw_b):
        if abs(yaw_a - yaw_b) < 1e-6:
            return
        lo, hi = sorted((yaw_a, yaw_b))
        x_lo = imu_to_screen(SYM, lo, 0.0, SPEC).raw_x_px
        x_hi = imu_to_screen(SYM, hi, 0.0, SPEC).raw_x_px
        assert x_hi < x_lo  # LL > RL: x decreases as yaw grows


class TestFingertip:
    def test_x_at_negative_a(self):
        cal = LeapCalibration(a=-100.0, w=400.0)
        pt = fingertip_to_screen(cal, FingertipSample(100.0, 0.0, 0.0), SPEC)
        assert pt.x_px == 0.0

    def test_x_midscreen(self):
        cal = LeapCalibration(a=-100.0, w=400.0)
        pt = fingertip_to_screen(cal, FingertipSample(300.0, 0.0, 0.0), SPEC)
        assert pt.x_px == pytest.approx(512.0)

    def test_y_projection(self):
        cal = LeapCalibration(b=-50.0, c=1.0, d=0.5, h=300.0, w=400.0, a=-100.0)
        pt = fingertip_to_screen(cal, FingertipSample(100.0, 200.0, 100.0), SPEC)
        assert pt.y_px == pytest.approx(256.0)

    def test_nonpositive_w_rejected(self):
        with pytest.raises(ValueError):
            LeapCalibration(w=0.0)

    @given(st.floats(min_value=-200.0, max_value=200.0),
           st.floats(min_value=-200.0, max_value=200.0),
           st.floats(min_value=0.1, max_value=2.0))
    def test_linear_in_x(self, x1, x2, lam):
        cal = LeapCalibration(a=-100.0, w=400.0, h=300.0)
        def raw(x):
            return fingertip_to_screen(cal, FingertipSample(x, 0.0, 0.0), SPEC).raw_x_px
        mixed = raw(lam * x1 + (1 - lam) * x2)
        assert mixed == pytest.approx(lam * raw(x1) + (1 - lam) * raw(x2), abs=1e-6)

    @given(st.floats(min_value=-200.0, max_value=200.0),
           st.floats(min_value=-200.0, max_value=200.0))
    def test_linear_in_y_and_z(self, y, z):
        cal = LeapCalibration(b=-50.0, c=1.0, d=0.5, h=300.0, w=400.0)
        base = fingertip_to_screen(cal, FingertipSample(0.0, 0.0, 0.0), SPEC).raw_y_px
        only_y = fingertip_to_screen(cal, FingertipSample(0.0, y, 0.0), SPEC).raw_y_px
        only_z = fingertip_to_screen(cal, FingertipSample(0.0, 0.0, z), SPEC).raw_y_px
        both = fingertip_to_screen(cal, FingertipSample(0.0, y, z), SPEC).raw_y_px
        assert both - base == pytest.approx((only_y - base) + (only_z - base), abs=1e-6)
