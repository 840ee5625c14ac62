"""Frame rendering: scene assembly, projection, z-buffer fill, shading.

The pipeline rasterizes at ``supersample`` times the output resolution,
shades the supersampled winner buffer, then box-averages color down to the
output size.  Depth and instance buffers are kept at the supersampled
resolution because annotations are derived from them.  Quality only changes
the color pass; depth and instance content is byte-identical across
quality settings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels, meshes
from .camera import CameraPose, Intrinsics
from .camera import rotation_camera_to_world
from .errors import ConfigError
from .world import BIOMES, WEATHER_STATES, WorldState

QUALITY_LEVELS = ("low", "high")
BIOME_INDEX = {name: i for i, name in enumerate(BIOMES)}
NEAR_PLANE = kernels.NEAR_PLANE

# Solar day anchors: sunrise 06:00, noon 12:00, sunset 18:00.
SUNRISE = 21600.0
DAY_SECONDS = 43200.0

# Per-weather color multiplier and fog extinction coefficient (1/m).
WEATHER_PARAMS = {
    "clear": ((1.00, 1.00, 1.00), 2.0e-5),
    "overcast": ((0.75, 0.78, 0.82), 5.0e-5),
    "rain": ((0.62, 0.66, 0.74), 2.0e-4),
    "fog": ((0.80, 0.82, 0.85), 2.0e-3),
}

GRAIN_AMPLITUDE = 0.035


@dataclass(frozen=True)
class RenderSettings:
    """Output geometry and color-pass options."""

    width: int = 640
    height: int = 360
    supersample: int = 2
    quality: str = "high"
    grain_seed: int = 0

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ConfigError("output size must be positive")
        if self.supersample < 1:
            raise ConfigError("supersample must be >= 1")
        if self.quality not in QUALITY_LEVELS:
            raise ConfigError(f"quality must be one of {QUALITY_LEVELS}")

    @property
    def buffer_width(self) -> int:
        return self.width * self.supersample

    @property
    def buffer_height(self) -> int:
        return self.height * self.supersample

    def intrinsics(self) -> Intrinsics:
        return Intrinsics(self.width, self.height)

    def buffer_intrinsics(self) -> Intrinsics:
        return Intrinsics(self.buffer_width, self.buffer_height)


@dataclass
class Scene:
    """Flattened world geometry ready for the kernels.

    Triangles are stored contiguously: terrain first, then each object in
    ascending id order.  ``inst`` holds the owning object id per triangle
    (0 for terrain); groups give per-entity ranges plus bounding spheres
    for the ray-cast path (radius squared < 0 disables the sphere test).
    """

    verts: np.ndarray          # (T, 3, 3) world-space f8
    inst: np.ndarray           # (T,) i4 owning object id, 0 = terrain
    rgb: np.ndarray            # (T, 3) f4 base color in [0, 1]
    nrm: np.ndarray            # (T, 3) f8 unit face normal
    group_start: np.ndarray    # (G,) i8
    group_end: np.ndarray      # (G,) i8
    group_center: np.ndarray   # (G, 3) f8
    group_r2: np.ndarray       # (G,) f8
    group_inst: np.ndarray     # (G,) i4
    class_of_id: dict = field(default_factory=dict)
    biome: str = "pasture"
    clock: float = 43200.0
    weather: str = "clear"

    def object_triangles(self, object_id: int) -> np.ndarray:
        """World triangles belonging to one object."""
        for g in range(self.group_start.shape[0]):
            if self.group_inst[g] == object_id:
                return self.verts[self.group_start[g]:self.group_end[g]]
        raise KeyError(f"object id {object_id} not in scene")


@dataclass
class Frame:
    """One rendered capture."""

    color: np.ndarray      # (height, width, 3) u1 at output resolution
    depth: np.ndarray      # (buffer_h, buffer_w) f4, +inf where empty
    instance: np.ndarray   # (buffer_h, buffer_w) i4, 0 where no object
    settings: RenderSettings
    pose: CameraPose


def sun_elevation_deg(clock: float) -> float:
    """Solar elevation in degrees, clamped to 0 at night."""
    elev = 90.0 * math.sin(math.pi * (clock - SUNRISE) / DAY_SECONDS)
    return elev if elev > 0.0 else 0.0


def daylight_factor(clock: float) -> float:
    """0 at night, 1 at local noon."""
    return math.sin(math.radians(sun_elevation_deg(clock)))


def sun_direction(clock: float) -> np.ndarray:
    """Unit vector pointing toward the sun (east at dawn, west at dusk)."""
    elev = math.radians(sun_elevation_deg(clock))
    arc = math.pi * (clock - SUNRISE) / DAY_SECONDS
    return np.array([
        math.cos(arc) * math.cos(elev),
        -math.sin(arc) * math.cos(elev),
        math.sin(elev),
    ])


def _face_normals(tris: np.ndarray) -> np.ndarray:
    n = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    length = np.linalg.norm(n, axis=1, keepdims=True)
    length[length == 0.0] = 1.0
    return n / length


def build_scene(world: WorldState) -> Scene:
    """Flatten a world snapshot into kernel-ready triangle arrays."""
    if world.weather not in WEATHER_PARAMS:
        raise ConfigError(f"unknown weather {world.weather!r}")
    chunks = [meshes.terrain_triangles(world.area)]
    inst = [np.zeros(2, dtype=np.int32)]
    base = _terrain_base_color(world.biome)
    rgb = [np.tile(np.asarray(base, dtype=np.float32), (2, 1))]
    nrm = [np.tile(np.array([0.0, 0.0, 1.0]), (2, 1))]
    starts, ends, centers, radii, group_inst = [0], [2], [[0.0, 0.0, 0.0]], [-1.0], [0]
    class_of_id = {}
    cursor = 2
    for oid in sorted(world.objects):
        obj = world.objects[oid]
        placed = meshes.place_mesh(
            meshes.mesh_for(obj.cls), obj.position, obj.heading)
        n_tri = placed.shape[0]
        shades = meshes.face_shades(placed)
        palette = np.asarray(obj.cls.palette, dtype=np.float64) / 255.0
        chunks.append(placed)
        inst.append(np.full(n_tri, oid, dtype=np.int32))
        rgb.append((shades[:, None] * palette[None, :]).astype(np.float32))
        nrm.append(_face_normals(placed))
        pts = placed.reshape(-1, 3)
        center = (pts.min(axis=0) + pts.max(axis=0)) / 2.0
        r = math.sqrt(((pts - center) ** 2).sum(axis=1).max())
        starts.append(cursor)
        cursor += n_tri
        ends.append(cursor)
        centers.append(center.tolist())
        radii.append((r + 1e-6) ** 2)
        group_inst.append(oid)
        class_of_id[oid] = obj.cls.name
    return Scene(
        verts=np.ascontiguousarray(np.concatenate(chunks)),
        inst=np.concatenate(inst),
        rgb=np.concatenate(rgb),
        nrm=np.ascontiguousarray(np.concatenate(nrm)),
        group_start=np.array(starts, dtype=np.int64),
        group_end=np.array(ends, dtype=np.int64),
        group_center=np.array(centers, dtype=np.float64),
        group_r2=np.array(radii, dtype=np.float64),
        group_inst=np.array(group_inst, dtype=np.int32),
        class_of_id=class_of_id,
        biome=world.biome,
        clock=float(world.clock),
        weather=world.weather,
    )


def _terrain_base_color(biome: str) -> tuple:
    if biome == "urban":
        return (0.37, 0.37, 0.40)
    if biome == "water":
        return (0.11, 0.27, 0.47)
    return (0.27, 0.48, 0.22)


def clip_near(verts_cam: np.ndarray, near: float = NEAR_PLANE):
    """Clip camera-space triangles against the z = near plane.

    Returns (clipped (T', 3, 3), source index (T',)).  Fully inside
    triangles keep their order; partially clipped ones are appended.
    """
    z = verts_cam[:, :, 2]
    inside = z >= near
    n_in = inside.sum(axis=1)
    full = n_in == 3
    out_verts = [verts_cam[full]]
    out_src = [np.flatnonzero(full)]
    for t in np.flatnonzero((n_in == 1) | (n_in == 2)):
        tri = verts_cam[t]
        poly = []
        for i in range(3):
            a = tri[i]
            b = tri[(i + 1) % 3]
            a_in = a[2] >= near
            b_in = b[2] >= near
            if a_in:
                poly.append(a)
            if a_in != b_in:
                s = (near - a[2]) / (b[2] - a[2])
                poly.append(a + s * (b - a))
        if len(poly) == 3:
            fans = [(0, 1, 2)]
        elif len(poly) == 4:
            fans = [(0, 1, 2), (0, 2, 3)]
        else:
            continue
        for fan in fans:
            out_verts.append(np.stack([poly[i] for i in fan])[None])
            out_src.append(np.array([t]))
    return np.concatenate(out_verts), np.concatenate(out_src)


def project_triangles(verts_world: np.ndarray, pose: CameraPose,
                      intr: Intrinsics):
    """World triangles -> screen coords plus per-triangle raster bounds.

    Returns (uv, inv_z, row_min, row_max, col_min, col_max, src) where src
    maps each near-clipped triangle back to its input index.  Bounds are
    clamped to the buffer; empty ranges have min > max.
    """
    rot = rotation_camera_to_world(pose)
    flat = verts_world.reshape(-1, 3) - np.asarray(pose.position, dtype=np.float64)
    cam = (flat @ rot).reshape(-1, 3, 3)
    clipped, src = clip_near(cam)
    if clipped.shape[0] == 0:
        empty_i = np.empty(0, dtype=np.int64)
        return (np.empty((0, 3, 2)), np.empty((0, 3)), empty_i, empty_i,
                empty_i, empty_i, src)
    z = clipped[:, :, 2]
    u = intr.cx + intr.focal_px * (clipped[:, :, 0] / z)
    v = intr.cy + intr.focal_px * (clipped[:, :, 1] / z)
    uv = np.stack([u, v], axis=2)
    inv_z = 1.0 / z
    col_min = np.clip(np.ceil(u.min(axis=1) - 0.5), 0, intr.width - 1)
    col_max = np.clip(np.floor(u.max(axis=1) - 0.5), -1, intr.width - 1)
    row_min = np.clip(np.ceil(v.min(axis=1) - 0.5), 0, intr.height - 1)
    row_max = np.clip(np.floor(v.max(axis=1) - 0.5), -1, intr.height - 1)
    return (np.ascontiguousarray(uv), np.ascontiguousarray(inv_z),
            row_min.astype(np.int64), row_max.astype(np.int64),
            col_min.astype(np.int64), col_max.astype(np.int64), src)


def _downsample_color(buf: np.ndarray, ss: int) -> np.ndarray:
    if ss == 1:
        return buf
    h = buf.shape[0] // ss
    w = buf.shape[1] // ss
    total = buf.reshape(h, ss, w, ss, 3).sum(axis=(1, 3), dtype=np.uint32)
    # round-half-up block mean, computed exactly in integers
    n = ss * ss
    return ((2 * total + n) // (2 * n)).astype(np.uint8)


def render(scene: Scene, pose: CameraPose,
           settings: RenderSettings) -> Frame:
    """Rasterize and shade one frame."""
    intr = settings.buffer_intrinsics()
    uv, inv_z, row_min, row_max, col_min, col_max, src = project_triangles(
        scene.verts, pose, intr)
    inst_of_tri = (scene.inst[src] if src.shape[0]
                   else np.empty(0, dtype=np.int32))
    depth, tri, instance = kernels.rasterize(
        uv, inv_z, inst_of_tri, row_min, row_max, col_min, col_max,
        intr.height, intr.width)

    tint, fog_density = WEATHER_PARAMS[scene.weather]
    face_rgb = scene.rgb[src] if src.shape[0] else np.empty((0, 3), np.float32)
    face_nrm = scene.nrm[src] if src.shape[0] else np.empty((0, 3))
    rot = rotation_camera_to_world(pose)
    color_ss = kernels.shade(
        tri, instance, depth, face_rgb, face_nrm,
        np.asarray(pose.position, dtype=np.float64),
        np.ascontiguousarray(rot[:, 0]), np.ascontiguousarray(rot[:, 1]),
        np.ascontiguousarray(rot[:, 2]),
        intr.focal_px, intr.cx, intr.cy,
        BIOME_INDEX[scene.biome],
        QUALITY_LEVELS.index(settings.quality),
        sun_direction(scene.clock), daylight_factor(scene.clock),
        np.asarray(tint, dtype=np.float64), fog_density,
        GRAIN_AMPLITUDE, settings.grain_seed, scene.clock * 0.13)

    return Frame(
        color=_downsample_color(color_ss, settings.supersample),
        depth=depth.astype(np.float32),
        instance=instance,
        settings=settings,
        pose=pose,
    )


def raycast_instance(scene: Scene, pose: CameraPose,
                     settings: RenderSettings):
    """Independent per-pixel instance and depth buffers by ray casting.

    Shares no projection state with render(); used as the annotation
    oracle.  Returns (depth f8 with +inf empty, instance i4).
    """
    intr = settings.buffer_intrinsics()
    rot = rotation_camera_to_world(pose)
    t_buf, tri = kernels.raycast(
        scene.verts, scene.group_start, scene.group_end,
        scene.group_center, scene.group_r2,
        np.asarray(pose.position, dtype=np.float64),
        np.ascontiguousarray(rot[:, 0]), np.ascontiguousarray(rot[:, 1]),
        np.ascontiguousarray(rot[:, 2]),
        intr.focal_px, intr.cx, intr.cy,
        intr.height, intr.width, NEAR_PLANE)
    hit = tri >= 0
    instance = np.where(hit, scene.inst[np.where(hit, tri, 0)], 0)
    return t_buf, instance.astype(np.int32)
