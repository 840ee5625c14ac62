"""Camera pose, rotation conventions, and the pinhole projection."""

import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp
from hypothesis import strategies as st

from aerogen.camera import (BehindCameraError, CameraPose, Intrinsics,
                            camera_to_world, pixel_ray, project,
                            rotation_camera_to_world, rotation_world_to_camera,
                            world_to_camera)
from aerogen.errors import ConfigError

angles = st.floats(-360.0, 720.0, allow_nan=False)
pitches = st.floats(-90.0, 90.0, allow_nan=False)


def pose_at(x=0.0, y=0.0, z=50.0, yaw=0.0, pitch=0.0, roll=0.0):
    return CameraPose((x, y, z), yaw=yaw, pitch=pitch, roll=roll)


class TestPose:
    def test_negative_altitude_rejected(self):
        with pytest.raises(ConfigError):
            pose_at(z=-1.0)

    def test_pitch_range_enforced(self):
        with pytest.raises(ConfigError):
            pose_at(pitch=90.5)
        with pytest.raises(ConfigError):
            pose_at(pitch=-91.0)

    def test_yaw_normalized(self):
        assert pose_at(yaw=-90.0).yaw == 270.0
        assert pose_at(yaw=450.0).yaw == 90.0
        assert pose_at(yaw=360.0).yaw == 0.0

    def test_altitude_property(self):
        assert pose_at(z=37.5).altitude == 37.5


class TestIntrinsics:
    def test_size_validated(self):
        with pytest.raises(ConfigError):
            Intrinsics(0, 10)
        with pytest.raises(ConfigError):
            Intrinsics(10, 10, horizontal_fov=180.0)

    def test_focal_puts_fov_edge_at_image_edge(self):
        intr = Intrinsics(256, 256)
        # A ray at half the horizontal fov from the axis lands on u = 0.
        x = -math.tan(math.radians(intr.horizontal_fov / 2))
        u, v, z = project(intr, (x * 10.0, 0.0, 10.0))
        assert abs(u - 0.0) < 1e-9
        assert v == intr.cy

    def test_scaled_keeps_fov(self):
        intr = Intrinsics(640, 360)
        big = intr.scaled(2)
        assert (big.width, big.height) == (1280, 720)
        assert big.focal_px == pytest.approx(2 * intr.focal_px)
        assert big.horizontal_fov == intr.horizontal_fov


class TestRotationConventions:
    def test_yaw_zero_looks_north(self):
        # pitch 0, yaw 0: forward is +Y, right is +X, down is -Z.
        R = rotation_camera_to_world(pose_at())
        np.testing.assert_allclose(R[:, 0], [1, 0, 0], atol=1e-12)
        np.testing.assert_allclose(R[:, 1], [0, 0, -1], atol=1e-12)
        np.testing.assert_allclose(R[:, 2], [0, 1, 0], atol=1e-12)

    def test_yaw_90_looks_east(self):
        R = rotation_camera_to_world(pose_at(yaw=90.0))
        np.testing.assert_allclose(R[:, 2], [1, 0, 0], atol=1e-12)
        np.testing.assert_allclose(R[:, 0], [0, -1, 0], atol=1e-12)

    def test_pitch_90_looks_straight_down(self):
        R = rotation_camera_to_world(pose_at(pitch=90.0))
        np.testing.assert_allclose(R[:, 2], [0, 0, -1], atol=1e-12)
        # camera-down now points against world +Y (away from the heading)
        np.testing.assert_allclose(R[:, 1], [0, -1, 0], atol=1e-12)

    def test_roll_rotates_right_toward_down(self):
        R = rotation_camera_to_world(pose_at(roll=90.0))
        R0 = rotation_camera_to_world(pose_at())
        np.testing.assert_allclose(R[:, 0], R0[:, 1], atol=1e-12)
        np.testing.assert_allclose(R[:, 1], -R0[:, 0], atol=1e-12)

    @hyp(max_examples=60, deadline=None)
    @given(yaw=angles, pitch=pitches, roll=angles)
    def test_rotation_is_orthonormal(self, yaw, pitch, roll):
        R = rotation_camera_to_world(pose_at(yaw=yaw, pitch=pitch, roll=roll))
        np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-9)
        assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-9)

    def test_world_to_camera_inverse(self):
        pose = pose_at(x=3.0, y=-2.0, z=40.0, yaw=31.0, pitch=55.0, roll=-4.0)
        pts = np.random.default_rng(0).uniform(-100, 100, size=(20, 3))
        back = camera_to_world(pose, world_to_camera(pose, pts))
        np.testing.assert_allclose(back, pts, atol=1e-9)


class TestProjection:
    def test_point_under_camera_hits_principal_point(self):
        pose = pose_at(z=50.0, pitch=90.0)
        intr = Intrinsics(256, 256)
        u, v, z = project(intr, world_to_camera(pose, (0.0, 0.0, 0.0)))
        assert (u, v) == (intr.cx, intr.cy)
        assert z == pytest.approx(50.0)

    def test_point_ahead_hits_principal_point(self):
        pose = pose_at(z=50.0)
        intr = Intrinsics(640, 360)
        u, v, z = project(intr, world_to_camera(pose, (0.0, 30.0, 50.0)))
        assert (u, v) == (intr.cx, intr.cy)
        assert z == pytest.approx(30.0)

    def test_right_and_up_directions(self):
        pose = pose_at(z=50.0)
        intr = Intrinsics(640, 360)
        u_r, v_r, _ = project(intr, world_to_camera(pose, (5.0, 30.0, 50.0)))
        assert u_r > intr.cx  # east of the view axis: to the right
        u_a, v_a, _ = project(intr, world_to_camera(pose, (0.0, 30.0, 60.0)))
        assert v_a < intr.cy  # above the view axis: up the image

    def test_behind_camera_raises(self):
        intr = Intrinsics(640, 360)
        with pytest.raises(BehindCameraError):
            project(intr, (0.0, 0.0, 0.0))
        with pytest.raises(BehindCameraError):
            project(intr, (0.0, 0.0, -5.0))

    @hyp(max_examples=60, deadline=None)
    @given(x=st.floats(-50, 50), y=st.floats(-50, 50),
           z=st.floats(0.5, 200.0))
    def test_pixel_ray_inverts_projection(self, x, y, z):
        intr = Intrinsics(640, 360)
        u, v, depth = project(intr, (x, y, z))
        ray = pixel_ray(intr, u, v)
        assert ray[2] == 1.0
        np.testing.assert_allclose(ray * depth, [x, y, z],
                                   rtol=1e-9, atol=1e-9)
