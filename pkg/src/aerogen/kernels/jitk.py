"""Numba-compiled hot loops: triangle fill, ray casting, shading, mask stats.

Everything here is branch-heavy per-pixel work; IEEE semantics are kept
strict (no fastmath) so buffers are bit-reproducible and the rasterizer and
the ray-casting oracle agree exactly away from degenerate geometry.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

# Shared with the raster path: triangles nearer than this are clipped first.
NEAR_PLANE = 0.1

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def _hash01(ix, iy, seed):
    """Deterministic lattice hash -> [0, 1)."""
    h = np.uint64(ix) * np.uint64(0x9E3779B97F4A7C15)
    h ^= np.uint64(iy) * np.uint64(0xC2B2AE3D27D4EB4F)
    h ^= np.uint64(seed) * np.uint64(0xD6E8FEB86659FD93)
    h ^= h >> np.uint64(29)
    h *= np.uint64(0xBF58476D1CE4E5B9)
    h ^= h >> np.uint64(32)
    return np.float64(h & np.uint64(0xFFFFFF)) / 16777216.0


@njit(**_JIT)
def _vnoise(x, y, seed):
    """Smooth value noise on a unit lattice."""
    ix = np.int64(np.floor(x))
    iy = np.int64(np.floor(y))
    fx = x - np.floor(x)
    fy = y - np.floor(y)
    sx = fx * fx * (3.0 - 2.0 * fx)
    sy = fy * fy * (3.0 - 2.0 * fy)
    n00 = _hash01(ix, iy, seed)
    n10 = _hash01(ix + 1, iy, seed)
    n01 = _hash01(ix, iy + 1, seed)
    n11 = _hash01(ix + 1, iy + 1, seed)
    a = n00 + (n10 - n00) * sx
    b = n01 + (n11 - n01) * sx
    return a + (b - a) * sy


@njit(parallel=True, **_JIT)
def rasterize(uv, inv_z, inst_of_tri, row_min, row_max, col_min, col_max,
              height, width):
    """Z-buffered fill of projected triangles.

    uv: (T, 3, 2) screen coords, inv_z: (T, 3) reciprocal depth per vertex,
    inst_of_tri: (T,) owning object id, row/col ranges: per-triangle pixel
    bounds already clamped to the buffer.  Returns (depth f8 +inf empty,
    tri_index i4 -1 empty, instance i4 0 empty).  Ties keep the lowest
    triangle index (strict less-than testing in index order).
    """
    depth = np.full((height, width), np.inf, dtype=np.float64)
    tri = np.full((height, width), -1, dtype=np.int32)
    inst = np.zeros((height, width), dtype=np.int32)
    n_tri = uv.shape[0]
    for y in prange(height):
        py = y + 0.5
        for t in range(n_tri):
            if y < row_min[t] or y > row_max[t]:
                continue
            ax = uv[t, 0, 0]
            ay = uv[t, 0, 1]
            bx = uv[t, 1, 0]
            by = uv[t, 1, 1]
            cx = uv[t, 2, 0]
            cy = uv[t, 2, 1]
            area2 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            if area2 == 0.0:
                continue
            iz0 = inv_z[t, 0]
            iz1 = inv_z[t, 1]
            iz2 = inv_z[t, 2]
            inv_area = 1.0 / area2
            pos = area2 > 0.0
            for x in range(col_min[t], col_max[t] + 1):
                px = x + 0.5
                w0 = (bx - px) * (cy - py) - (by - py) * (cx - px)
                w1 = (cx - px) * (ay - py) - (cy - py) * (ax - px)
                w2 = (ax - px) * (by - py) - (ay - py) * (bx - px)
                if pos:
                    if w0 < 0.0 or w1 < 0.0 or w2 < 0.0:
                        continue
                elif w0 > 0.0 or w1 > 0.0 or w2 > 0.0:
                    continue
                izp = (w0 * iz0 + w1 * iz1 + w2 * iz2) * inv_area
                if izp <= 0.0:
                    continue
                zp = 1.0 / izp
                if zp < depth[y, x]:
                    depth[y, x] = zp
                    tri[y, x] = t
                    inst[y, x] = inst_of_tri[t]
    return depth, tri, inst


@njit(parallel=True, **_JIT)
def coverage_count(uv, row_min, row_max, col_min, col_max,
                   y0, y1, x0, x1):
    """Number of pixel centers inside [y0, y1] x [x0, x1] covered by any of
    the given triangles.  Uses the identical inside test as rasterize."""
    h = y1 - y0 + 1
    w = x1 - x0 + 1
    covered = np.zeros((h, w), dtype=np.uint8)
    n_tri = uv.shape[0]
    for yy in prange(h):
        y = y0 + yy
        py = y + 0.5
        for t in range(n_tri):
            if y < row_min[t] or y > row_max[t]:
                continue
            ax = uv[t, 0, 0]
            ay = uv[t, 0, 1]
            bx = uv[t, 1, 0]
            by = uv[t, 1, 1]
            cx = uv[t, 2, 0]
            cy = uv[t, 2, 1]
            area2 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            if area2 == 0.0:
                continue
            pos = area2 > 0.0
            lo = col_min[t]
            hi = col_max[t]
            if lo < x0:
                lo = x0
            if hi > x1:
                hi = x1
            for x in range(lo, hi + 1):
                if covered[yy, x - x0] != 0:
                    continue
                px = x + 0.5
                w0 = (bx - px) * (cy - py) - (by - py) * (cx - px)
                w1 = (cx - px) * (ay - py) - (cy - py) * (ax - px)
                w2 = (ax - px) * (by - py) - (ay - py) * (bx - px)
                if pos:
                    if w0 < 0.0 or w1 < 0.0 or w2 < 0.0:
                        continue
                elif w0 > 0.0 or w1 > 0.0 or w2 > 0.0:
                    continue
                covered[yy, x - x0] = 1
    total = 0
    for yy in range(h):
        for xx in range(w):
            total += covered[yy, xx]
    return total


@njit(**_JIT)
def mask_stats(inst, slot_of_id, n_slots):
    """Per-id pixel count and tight bounds from an instance buffer.

    slot_of_id maps id -> dense slot (or -1).  Returns
    (count, x_min, x_max, y_min, y_max) arrays indexed by slot.
    """
    height, width = inst.shape
    count = np.zeros(n_slots, dtype=np.int64)
    x_min = np.full(n_slots, width, dtype=np.int64)
    x_max = np.full(n_slots, -1, dtype=np.int64)
    y_min = np.full(n_slots, height, dtype=np.int64)
    y_max = np.full(n_slots, -1, dtype=np.int64)
    for y in range(height):
        for x in range(width):
            oid = inst[y, x]
            if oid <= 0:
                continue
            s = slot_of_id[oid]
            if s < 0:
                continue
            count[s] += 1
            if x < x_min[s]:
                x_min[s] = x
            if x > x_max[s]:
                x_max[s] = x
            if y < y_min[s]:
                y_min[s] = y
            if y > y_max[s]:
                y_max[s] = y
    return count, x_min, x_max, y_min, y_max


@njit(parallel=True, **_JIT)
def raycast(verts, group_start, group_end, group_center, group_r2,
            origin, cam_right, cam_down, cam_fwd, focal, cx, cy,
            height, width, near):
    """Per-pixel nearest triangle by Moller-Trumbore intersection.

    Triangles are grouped contiguously (terrain and one group per object);
    a conservative bounding-sphere test skips whole groups.  The ray through
    each pixel has unit forward component, so the hit parameter equals
    camera z-depth.  Returns (t f8 +inf empty, tri_index i4 -1 empty).
    """
    t_buf = np.full((height, width), np.inf, dtype=np.float64)
    tri = np.full((height, width), -1, dtype=np.int32)
    n_groups = group_start.shape[0]
    for y in prange(height):
        py = (y + 0.5 - cy) / focal
        for x in range(width):
            px = (x + 0.5 - cx) / focal
            dx = cam_right[0] * px + cam_down[0] * py + cam_fwd[0]
            dy = cam_right[1] * px + cam_down[1] * py + cam_fwd[1]
            dz = cam_right[2] * px + cam_down[2] * py + cam_fwd[2]
            d2 = dx * dx + dy * dy + dz * dz
            best_t = np.inf
            best_tri = -1
            for g in range(n_groups):
                if group_r2[g] >= 0.0:
                    ox = group_center[g, 0] - origin[0]
                    oy = group_center[g, 1] - origin[1]
                    oz = group_center[g, 2] - origin[2]
                    # squared distance of the sphere center to the ray line
                    cxx = dy * oz - dz * oy
                    cyy = dz * ox - dx * oz
                    czz = dx * oy - dy * ox
                    if cxx * cxx + cyy * cyy + czz * czz > group_r2[g] * d2:
                        continue
                for t in range(group_start[g], group_end[g]):
                    v0x = verts[t, 0, 0]
                    v0y = verts[t, 0, 1]
                    v0z = verts[t, 0, 2]
                    e1x = verts[t, 1, 0] - v0x
                    e1y = verts[t, 1, 1] - v0y
                    e1z = verts[t, 1, 2] - v0z
                    e2x = verts[t, 2, 0] - v0x
                    e2y = verts[t, 2, 1] - v0y
                    e2z = verts[t, 2, 2] - v0z
                    pvx = dy * e2z - dz * e2y
                    pvy = dz * e2x - dx * e2z
                    pvz = dx * e2y - dy * e2x
                    det = e1x * pvx + e1y * pvy + e1z * pvz
                    if det == 0.0:
                        continue
                    inv_det = 1.0 / det
                    tvx = origin[0] - v0x
                    tvy = origin[1] - v0y
                    tvz = origin[2] - v0z
                    u = (tvx * pvx + tvy * pvy + tvz * pvz) * inv_det
                    if u < 0.0 or u > 1.0:
                        continue
                    qvx = tvy * e1z - tvz * e1y
                    qvy = tvz * e1x - tvx * e1z
                    qvz = tvx * e1y - tvy * e1x
                    v = (dx * qvx + dy * qvy + dz * qvz) * inv_det
                    if v < 0.0 or u + v > 1.0:
                        continue
                    hit_t = (e2x * qvx + e2y * qvy + e2z * qvz) * inv_det
                    if hit_t < near:
                        continue
                    if hit_t < best_t:
                        best_t = hit_t
                        best_tri = t
            t_buf[y, x] = best_t
            tri[y, x] = best_tri
    return t_buf, tri


@njit(parallel=True, **_JIT)
def shade(tri_idx, inst, depth, face_rgb, face_nrm,
          origin, cam_right, cam_down, cam_fwd, focal, cx, cy,
          biome, quality, sun_dir, daylight, tint, fog_density,
          grain_amp, grain_seed, water_phase):
    """Color pass over the winning-triangle buffer.

    quality 0 = low (flat per-face colors, no textures/fog/grain),
    quality 1 = high (Lambert sun shading, procedural terrain textures,
    distance fog, film grain).  biome: 0 urban, 1 water, 2 pasture.
    Never touches depth or instance content.
    """
    height, width = tri_idx.shape
    out = np.empty((height, width, 3), dtype=np.uint8)
    brightness = 0.10 + 0.90 * daylight
    sky_day = 0.06 + 0.94 * daylight
    # weather-tinted fog/horizon color
    fog_r = 0.72 * tint[0] * sky_day
    fog_g = 0.78 * tint[1] * sky_day
    fog_b = 0.86 * tint[2] * sky_day
    for y in prange(height):
        py = (y + 0.5 - cy) / focal
        for x in range(width):
            px = (x + 0.5 - cx) / focal
            dx = cam_right[0] * px + cam_down[0] * py + cam_fwd[0]
            dy = cam_right[1] * px + cam_down[1] * py + cam_fwd[1]
            dz = cam_right[2] * px + cam_down[2] * py + cam_fwd[2]
            t = tri_idx[y, x]
            if t < 0:
                # sky
                elev = dz / np.sqrt(dx * dx + dy * dy + dz * dz)
                if quality == 0:
                    r = 0.55 * sky_day
                    g = 0.70 * sky_day
                    b = 0.92 * sky_day
                else:
                    k = elev if elev > 0.0 else 0.0
                    r = (0.74 - 0.42 * k) * sky_day
                    g = (0.82 - 0.34 * k) * sky_day
                    b = (0.94 - 0.12 * k) * sky_day
            else:
                if inst[y, x] == 0:
                    # terrain; reconstruct the ground point for texturing
                    tz = depth[y, x]
                    wx = origin[0] + tz * dx
                    wy = origin[1] + tz * dy
                    if quality == 0 or biome == 0:
                        if biome == 0:
                            r, g, b = 0.37, 0.37, 0.40
                        elif biome == 1:
                            r, g, b = 0.11, 0.27, 0.47
                        else:
                            r, g, b = 0.27, 0.48, 0.22
                        if quality == 1 and biome == 0:
                            mx = wx % 100.0
                            my = wy % 100.0
                            on_road_x = mx < 9.0 or mx > 91.0
                            on_road_y = my < 9.0 or my > 91.0
                            if on_road_x or on_road_y:
                                r, g, b = 0.20, 0.20, 0.22
                                if (on_road_x and (mx < 0.4 or mx > 99.6)) or \
                                   (on_road_y and (my < 0.4 or my > 99.6)):
                                    r, g, b = 0.80, 0.78, 0.70
                            else:
                                n = _vnoise(wx * 0.05, wy * 0.05, 11)
                                r += 0.08 * n
                                g += 0.08 * n
                                b += 0.08 * n
                    elif biome == 1:
                        w1 = np.sin(0.9 * wx + 0.55 * wy + water_phase)
                        w2 = np.sin(0.23 * wx - 0.31 * wy + 1.7 * water_phase)
                        ripple = 0.5 + 0.25 * w1 + 0.25 * w2
                        n = _vnoise(wx * 0.35, wy * 0.35, 7)
                        r = 0.09 + 0.10 * ripple + 0.03 * n
                        g = 0.24 + 0.12 * ripple + 0.04 * n
                        b = 0.44 + 0.14 * ripple + 0.05 * n
                    else:
                        n1 = _vnoise(wx * 0.02, wy * 0.02, 3)
                        n2 = _vnoise(wx * 0.23, wy * 0.23, 5)
                        r = 0.22 + 0.12 * n1 + 0.06 * n2
                        g = 0.42 + 0.14 * n1 + 0.07 * n2
                        b = 0.16 + 0.08 * n1 + 0.05 * n2
                        if n1 > 0.82:  # dirt patch
                            r += 0.16
                            g += 0.04
                            b -= 0.04
                    if quality == 1:
                        # flat ground lit by sun elevation
                        lam = 0.30 + 0.70 * (sun_dir[2] if sun_dir[2] > 0.0 else 0.0)
                        r *= lam
                        g *= lam
                        b *= lam
                else:
                    r = face_rgb[t, 0]
                    g = face_rgb[t, 1]
                    b = face_rgb[t, 2]
                    if quality == 1:
                        ndl = (face_nrm[t, 0] * sun_dir[0]
                               + face_nrm[t, 1] * sun_dir[1]
                               + face_nrm[t, 2] * sun_dir[2])
                        if ndl < 0.0:
                            ndl = 0.0
                        lam = 0.30 + 0.70 * ndl
                        r *= lam
                        g *= lam
                        b *= lam
                r *= brightness
                g *= brightness
                b *= brightness
                if quality == 1:
                    fog = 1.0 - np.exp(-depth[y, x] * fog_density)
                    r += (fog_r - r) * fog
                    g += (fog_g - g) * fog
                    b += (fog_b - b) * fog
            r *= tint[0]
            g *= tint[1]
            b *= tint[2]
            if quality == 1 and grain_amp > 0.0:
                gn = (_hash01(np.int64(x), np.int64(y), grain_seed) - 0.5) * grain_amp
                r += gn
                g += gn
                b += gn
            ir = np.int64(r * 255.0 + 0.5)
            ig = np.int64(g * 255.0 + 0.5)
            ib = np.int64(b * 255.0 + 0.5)
            if ir < 0:
                ir = 0
            elif ir > 255:
                ir = 255
            if ig < 0:
                ig = 0
            elif ig > 255:
                ig = 255
            if ib < 0:
                ib = 0
            elif ib > 255:
                ib = 255
            out[y, x, 0] = ir
            out[y, x, 1] = ig
            out[y, x, 2] = ib
    return out
