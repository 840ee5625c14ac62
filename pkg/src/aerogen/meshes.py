"""Triangle meshes for the object catalog and terrain.

Every class is a composite of axis-aligned boxes and vertical cylinders
scaled to its footprint, built in a local frame with +Y the forward (length)
axis, +X the right (width) axis, and z measured up from the ground contact.
Realism is deliberately minimal; annotation geometry is what matters.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .world import ObjectClass, Rect

CYLINDER_SIDES = 8

# How far beyond the scenario area the ground quad extends (visual horizon).
TERRAIN_EXTENT = 6000.0


def _box(x0, x1, y0, y1, z0, z1) -> np.ndarray:
    """12 triangles of an axis-aligned box, outward winding."""
    v = np.array([
        [x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
        [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1],
    ])
    quads = [
        (0, 3, 2, 1),  # bottom (-z)
        (4, 5, 6, 7),  # top (+z)
        (0, 1, 5, 4),  # -y
        (2, 3, 7, 6),  # +y
        (1, 2, 6, 5),  # +x
        (3, 0, 4, 7),  # -x
    ]
    tris = []
    for a, b, c, d in quads:
        tris.append([v[a], v[b], v[c]])
        tris.append([v[a], v[c], v[d]])
    return np.array(tris)


def _cylinder(cx, cy, z0, z1, r, n=CYLINDER_SIDES) -> np.ndarray:
    """Vertical prism approximating a cylinder: n side quads plus end caps."""
    ang = np.arange(n) * (2.0 * math.pi / n)
    bx = cx + r * np.cos(ang)
    by = cy + r * np.sin(ang)
    tris = []
    for i in range(n):
        j = (i + 1) % n
        b_i = [bx[i], by[i], z0]
        b_j = [bx[j], by[j], z0]
        t_i = [bx[i], by[i], z1]
        t_j = [bx[j], by[j], z1]
        tris.append([b_i, b_j, t_j])
        tris.append([b_i, t_j, t_i])
        tris.append([[cx, cy, z1], t_i, t_j])   # top cap
        tris.append([[cx, cy, z0], b_j, b_i])   # bottom cap
    return np.array(tris)


def _boat_hull(length, width, height) -> list[np.ndarray]:
    hull = _box(-width / 2, width / 2, -length / 2, length * 0.30, 0, height * 0.55)
    bow = _box(-width * 0.30, width * 0.30, length * 0.30, length / 2, 0, height * 0.45)
    cabin = _box(-width * 0.38, width * 0.38, -length * 0.30, length * 0.05,
                 height * 0.55, height)
    return [hull, bow, cabin]


def _build_mesh(cls: ObjectClass) -> np.ndarray:
    length, width, height = cls.footprint
    hw, hl = width / 2, length / 2
    name = cls.name
    parts: list[np.ndarray]

    if name == "people":
        parts = [
            _cylinder(0, 0, 0, height * 0.78, width * 0.42),
            _cylinder(0, 0, height * 0.78, height, width * 0.30),
        ]
    elif name in ("bicycle", "motor"):
        parts = [
            _box(-width * 0.18, width * 0.18, -hl, hl, 0, height * 0.62),
            _box(-hw, hw, -length * 0.22, length * 0.22, height * 0.45, height),
        ]
    elif name == "car":
        parts = [
            _box(-hw, hw, -hl, hl, 0, height * 0.60),
            _box(-hw * 0.86, hw * 0.86, -length * 0.31, length * 0.21,
                 height * 0.60, height),
        ]
    elif name == "truck":
        parts = [
            _box(-hw, hw, hl - length * 0.25, hl, 0, height * 0.80),  # cab
            _box(-hw, hw, -hl, hl - length * 0.28, 0, height),        # cargo
        ]
    elif name == "van":
        parts = [
            _box(-hw, hw, -hl, hl, 0, height * 0.75),
            _box(-hw * 0.90, hw * 0.90, -hl * 0.70, hl * 0.70,
                 height * 0.75, height),
        ]
    elif name == "bus":
        parts = [
            _box(-hw, hw, -hl, hl, 0, height * 0.55),
            _box(-hw * 0.92, hw * 0.92, -hl * 0.95, hl * 0.95,
                 height * 0.55, height),
        ]
    elif name == "swimmer":
        parts = [
            _box(-hw, hw, -hl, length * 0.25, 0, height * 0.65),
            _cylinder(0, length * 0.36, 0, height, width * 0.38),
        ]
    elif name == "floater":
        r = min(length, width) / 2
        parts = [
            _cylinder(0, 0, 0, height * 0.55, r),
            _box(-width * 0.22, width * 0.22, -length * 0.26, length * 0.26,
                 height * 0.55, height),
        ]
    elif name == "swimmer-on-boat":
        parts = _boat_hull(length, width, height * 0.62)
        parts.append(_cylinder(0, length * 0.12, height * 0.62 * 0.55, height,
                               width * 0.14))
    elif name == "floater-on-boat":
        parts = _boat_hull(length, width, height * 0.70)
        parts.append(_cylinder(0, length * 0.12, height * 0.70 * 0.55, height,
                               width * 0.22))
    elif name == "boat":
        parts = _boat_hull(length, width, height)
    elif name == "cow":
        body = _box(-hw, hw, -length * 0.34, length * 0.34,
                    height * 0.42, height * 0.90)
        head = _box(-width * 0.28, width * 0.28, length * 0.32, length * 0.50,
                    height * 0.55, height * 0.88)
        leg_r = width * 0.10
        leg_x = hw - leg_r
        leg_y = length * 0.30
        legs = [_cylinder(sx * leg_x, sy * leg_y, 0, height * 0.46, leg_r, n=6)
                for sx in (-1, 1) for sy in (-1, 1)]
        parts = [body, head] + legs
    else:
        parts = [_box(-hw, hw, -hl, hl, 0, height)]

    return np.concatenate(parts, axis=0)


@lru_cache(maxsize=None)
def mesh_for(cls: ObjectClass) -> np.ndarray:
    """Local-frame triangle array (T, 3, 3) for any class, cached.

    Classes outside the catalog get the fallback box of their footprint.
    """
    mesh = _build_mesh(cls)
    mesh.setflags(write=False)
    return mesh


def class_mesh(name: str) -> np.ndarray:
    """Local-frame triangle array (T, 3, 3) for a catalog class, cached."""
    from .world import get_class
    return mesh_for(get_class(name))


def face_shades(tris: np.ndarray) -> np.ndarray:
    """Baked per-face brightness multiplier from the local-frame normal,
    giving low-quality renders faceted definition without any lighting."""
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    n = np.cross(e1, e2)
    norm = np.linalg.norm(n, axis=1)
    norm[norm == 0] = 1.0
    n = n / norm[:, None]
    return (0.58 + 0.36 * np.clip(n[:, 2], 0, 1) + 0.06 * np.abs(n[:, 0])
            ).astype(np.float64)


def place_mesh(tris: np.ndarray, position, heading_deg: float) -> np.ndarray:
    """Rotate a local mesh about Z by a compass heading and translate it."""
    psi = math.radians(heading_deg)
    c, s = math.cos(psi), math.sin(psi)
    x, y = tris[..., 0], tris[..., 1]
    out = np.empty_like(tris)
    out[..., 0] = x * c + y * s + position[0]
    out[..., 1] = -x * s + y * c + position[1]
    out[..., 2] = tris[..., 2] + position[2]
    return out


def terrain_triangles(area: Rect) -> np.ndarray:
    """Two huge ground triangles at z=0 covering the area plus horizon."""
    r = area.expanded(TERRAIN_EXTENT)
    v00 = [r.x_min, r.y_min, 0.0]
    v10 = [r.x_max, r.y_min, 0.0]
    v11 = [r.x_max, r.y_max, 0.0]
    v01 = [r.x_min, r.y_max, 0.0]
    return np.array([[v00, v10, v11], [v00, v11, v01]])
