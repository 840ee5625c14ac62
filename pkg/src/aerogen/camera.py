"""UAV camera model: pose conventions, pinhole projection, view transforms.

Conventions (the single source of truth, also used by exported metadata):

* World: right-handed, z-up, meters.
* Yaw is compass-style about world Z: 0 faces +Y, 90 faces +X.
* Pitch tilts the optical axis down: 0 = horizontal, 90 = straight down.
* Roll spins about the optical axis; 0 keeps the horizon level.
* Rotation order is intrinsic yaw -> pitch -> roll.
* Camera frame: +x right, +y down, +z forward along the optical axis.

All functions here are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

DEFAULT_HFOV_DEG = 60.0


class BehindCameraError(ValueError):
    """Projection was asked for a point at or behind the camera plane."""


@dataclass(frozen=True)
class CameraPose:
    position: tuple[float, float, float]  # z = altitude above ground (m)
    yaw: float    # degrees in [0, 360)
    pitch: float  # degrees in [-90, 90]
    roll: float   # degrees

    def __post_init__(self):
        if self.position[2] < 0:
            raise ConfigError(f"negative altitude {self.position[2]}")
        if not -90.0 <= self.pitch <= 90.0:
            raise ConfigError(f"pitch {self.pitch} outside [-90, 90]")
        object.__setattr__(self, "yaw", float(self.yaw) % 360.0)

    @property
    def altitude(self) -> float:
        return self.position[2]


@dataclass(frozen=True)
class Intrinsics:
    width: int
    height: int
    horizontal_fov: float = DEFAULT_HFOV_DEG  # degrees

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ConfigError(f"non-positive image size {self.width}x{self.height}")
        if not 0.0 < self.horizontal_fov < 180.0:
            raise ConfigError(f"horizontal fov {self.horizontal_fov} outside (0, 180)")

    @property
    def focal_px(self) -> float:
        return (self.width / 2.0) / math.tan(math.radians(self.horizontal_fov) / 2.0)

    @property
    def cx(self) -> float:
        return self.width / 2.0

    @property
    def cy(self) -> float:
        return self.height / 2.0

    def scaled(self, k: int) -> "Intrinsics":
        """Same field of view at k-times the pixel resolution."""
        return Intrinsics(self.width * k, self.height * k, self.horizontal_fov)


def rotation_camera_to_world(pose: CameraPose) -> np.ndarray:
    """3x3 matrix whose columns are the camera right/down/forward axes in
    world coordinates."""
    yaw = math.radians(pose.yaw)
    pitch = math.radians(pose.pitch)
    roll = math.radians(pose.roll)

    fwd_h = np.array([math.sin(yaw), math.cos(yaw), 0.0])
    right = np.array([math.cos(yaw), -math.sin(yaw), 0.0])
    z_up = np.array([0.0, 0.0, 1.0])

    fwd = math.cos(pitch) * fwd_h - math.sin(pitch) * z_up
    down = -math.cos(pitch) * z_up - math.sin(pitch) * fwd_h

    right_r = math.cos(roll) * right + math.sin(roll) * down
    down_r = -math.sin(roll) * right + math.cos(roll) * down

    return np.column_stack([right_r, down_r, fwd])


def rotation_world_to_camera(pose: CameraPose) -> np.ndarray:
    return rotation_camera_to_world(pose).T


def world_to_camera(pose: CameraPose, point) -> np.ndarray:
    """Map world point(s) into the camera frame.  Accepts (3,) or (N, 3)."""
    p = np.asarray(point, dtype=np.float64)
    return (p - np.asarray(pose.position)) @ rotation_camera_to_world(pose)


def camera_to_world(pose: CameraPose, cam_point) -> np.ndarray:
    """Inverse of world_to_camera."""
    c = np.asarray(cam_point, dtype=np.float64)
    return c @ rotation_world_to_camera(pose) + np.asarray(pose.position)


def project(intr: Intrinsics, cam_point) -> tuple[float, float, float]:
    """Pinhole projection of a camera-frame point to (u, v, depth).

    Depth is the forward (z) distance in meters.  Raises BehindCameraError
    for z <= 0; the caller is expected to cull such points.
    """
    x, y, z = (float(v) for v in cam_point)
    if z <= 0.0:
        raise BehindCameraError(f"point at z={z} is not in front of the camera")
    f = intr.focal_px
    return (intr.cx + f * x / z, intr.cy + f * y / z, z)


def pixel_ray(intr: Intrinsics, u: float, v: float) -> np.ndarray:
    """Camera-frame ray direction through pixel (u, v), normalized so the
    forward component is 1 (ray parameter t then equals z-depth)."""
    f = intr.focal_px
    return np.array([(u - intr.cx) / f, (v - intr.cy) / f, 1.0])
