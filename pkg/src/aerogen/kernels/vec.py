"""Pure-numpy fallbacks for the compiled kernels.

Same contracts and tie rules as kernels.jitk: triangles are visited in index
order with a strict less-than depth test, so winner buffers are bit-identical
across backends.  Color shading mirrors the compiled math; transcendental
library differences can move individual channels by one count at most.
"""

from __future__ import annotations

import numpy as np

NEAR_PLANE = 0.1

_H1 = np.uint64(0x9E3779B97F4A7C15)
_H2 = np.uint64(0xC2B2AE3D27D4EB4F)
_H3 = np.uint64(0xD6E8FEB86659FD93)
_H4 = np.uint64(0xBF58476D1CE4E5B9)


def _hash01(ix, iy, seed):
    ix = np.asarray(ix, dtype=np.int64).astype(np.uint64)
    iy = np.asarray(iy, dtype=np.int64).astype(np.uint64)
    with np.errstate(over="ignore"):
        h = ix * _H1
        h = h ^ (iy * _H2)
        h = h ^ (np.uint64(seed) * _H3)
        h = h ^ (h >> np.uint64(29))
        h = h * _H4
        h = h ^ (h >> np.uint64(32))
    return (h & np.uint64(0xFFFFFF)).astype(np.float64) / 16777216.0


def _vnoise(x, y, seed):
    ix = np.floor(x)
    iy = np.floor(y)
    fx = x - ix
    fy = y - iy
    sx = fx * fx * (3.0 - 2.0 * fx)
    sy = fy * fy * (3.0 - 2.0 * fy)
    ix = ix.astype(np.int64)
    iy = iy.astype(np.int64)
    n00 = _hash01(ix, iy, seed)
    n10 = _hash01(ix + 1, iy, seed)
    n01 = _hash01(ix, iy + 1, seed)
    n11 = _hash01(ix + 1, iy + 1, seed)
    a = n00 + (n10 - n00) * sx
    b = n01 + (n11 - n01) * sx
    return a + (b - a) * sy


def _edge_weights(uv, t, xs, ys):
    """Edge-function weights of pixel centers (xs, ys) against triangle t."""
    ax, ay = uv[t, 0, 0], uv[t, 0, 1]
    bx, by = uv[t, 1, 0], uv[t, 1, 1]
    cx, cy = uv[t, 2, 0], uv[t, 2, 1]
    px = xs + 0.5
    py = ys + 0.5
    w0 = (bx - px) * (cy - py) - (by - py) * (cx - px)
    w1 = (cx - px) * (ay - py) - (cy - py) * (ax - px)
    w2 = (ax - px) * (by - py) - (ay - py) * (bx - px)
    area2 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return w0, w1, w2, area2


def rasterize(uv, inv_z, inst_of_tri, row_min, row_max, col_min, col_max,
              height, width):
    depth = np.full((height, width), np.inf, dtype=np.float64)
    tri = np.full((height, width), -1, dtype=np.int32)
    inst = np.zeros((height, width), dtype=np.int32)
    for t in range(uv.shape[0]):
        r0, r1 = row_min[t], row_max[t]
        c0, c1 = col_min[t], col_max[t]
        if r0 > r1 or c0 > c1:
            continue
        ys, xs = np.mgrid[r0:r1 + 1, c0:c1 + 1]
        w0, w1, w2, area2 = _edge_weights(uv, t, xs, ys)
        if area2 == 0.0:
            continue
        if area2 > 0.0:
            inside = (w0 >= 0.0) & (w1 >= 0.0) & (w2 >= 0.0)
        else:
            inside = (w0 <= 0.0) & (w1 <= 0.0) & (w2 <= 0.0)
        inv_area = 1.0 / area2
        izp = (w0 * inv_z[t, 0] + w1 * inv_z[t, 1] + w2 * inv_z[t, 2]) * inv_area
        inside &= izp > 0.0
        if not inside.any():
            continue
        with np.errstate(divide="ignore"):
            zp = 1.0 / izp
        win = depth[r0:r1 + 1, c0:c1 + 1]
        upd = inside & (zp < win)
        win[upd] = zp[upd]
        tri[r0:r1 + 1, c0:c1 + 1][upd] = t
        inst[r0:r1 + 1, c0:c1 + 1][upd] = inst_of_tri[t]
    return depth, tri, inst


def coverage_count(uv, row_min, row_max, col_min, col_max, y0, y1, x0, x1):
    covered = np.zeros((y1 - y0 + 1, x1 - x0 + 1), dtype=bool)
    for t in range(uv.shape[0]):
        r0 = max(row_min[t], y0)
        r1 = min(row_max[t], y1)
        c0 = max(col_min[t], x0)
        c1 = min(col_max[t], x1)
        if r0 > r1 or c0 > c1:
            continue
        ys, xs = np.mgrid[r0:r1 + 1, c0:c1 + 1]
        w0, w1, w2, area2 = _edge_weights(uv, t, xs, ys)
        if area2 == 0.0:
            continue
        if area2 > 0.0:
            inside = (w0 >= 0.0) & (w1 >= 0.0) & (w2 >= 0.0)
        else:
            inside = (w0 <= 0.0) & (w1 <= 0.0) & (w2 <= 0.0)
        covered[r0 - y0:r1 - y0 + 1, c0 - x0:c1 - x0 + 1] |= inside
    return int(covered.sum())


def mask_stats(inst, slot_of_id, n_slots):
    count = np.zeros(n_slots, dtype=np.int64)
    x_min = np.full(n_slots, inst.shape[1], dtype=np.int64)
    x_max = np.full(n_slots, -1, dtype=np.int64)
    y_min = np.full(n_slots, inst.shape[0], dtype=np.int64)
    y_max = np.full(n_slots, -1, dtype=np.int64)
    ys, xs = np.nonzero(inst > 0)
    if ys.size == 0:
        return count, x_min, x_max, y_min, y_max
    slots = slot_of_id[inst[ys, xs]]
    keep = slots >= 0
    ys, xs, slots = ys[keep], xs[keep], slots[keep]
    if slots.size == 0:
        return count, x_min, x_max, y_min, y_max
    count += np.bincount(slots, minlength=n_slots)
    order = np.argsort(slots, kind="stable")
    ss, yo, xo = slots[order], ys[order], xs[order]
    starts = np.flatnonzero(np.diff(ss, prepend=ss[0] - 1))
    uniq = ss[starts]
    x_min[uniq] = np.minimum.reduceat(xo, starts)
    x_max[uniq] = np.maximum.reduceat(xo, starts)
    y_min[uniq] = np.minimum.reduceat(yo, starts)
    y_max[uniq] = np.maximum.reduceat(yo, starts)
    return count, x_min, x_max, y_min, y_max


def _pixel_dirs(cam_right, cam_down, cam_fwd, focal, cx, cy, height, width):
    px = (np.arange(width) + 0.5 - cx) / focal
    py = (np.arange(height) + 0.5 - cy) / focal
    gx, gy = np.meshgrid(px, py)
    dirs = (gx[..., None] * cam_right[None, None, :]
            + gy[..., None] * cam_down[None, None, :]
            + cam_fwd[None, None, :])
    return dirs


def raycast(verts, group_start, group_end, group_center, group_r2,
            origin, cam_right, cam_down, cam_fwd, focal, cx, cy,
            height, width, near):
    dirs = _pixel_dirs(cam_right, cam_down, cam_fwd, focal, cx, cy,
                       height, width).reshape(-1, 3)
    dx, dy, dz = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    d2 = dx * dx + dy * dy + dz * dz
    best_t = np.full(dirs.shape[0], np.inf)
    best_tri = np.full(dirs.shape[0], -1, dtype=np.int32)
    for g in range(group_start.shape[0]):
        if group_r2[g] >= 0.0:
            ox = group_center[g, 0] - origin[0]
            oy = group_center[g, 1] - origin[1]
            oz = group_center[g, 2] - origin[2]
            cxx = dy * oz - dz * oy
            cyy = dz * ox - dx * oz
            czz = dx * oy - dy * ox
            sel = np.flatnonzero(
                cxx * cxx + cyy * cyy + czz * czz <= group_r2[g] * d2)
            if sel.size == 0:
                continue
        else:
            sel = slice(None)
        sdx, sdy, sdz = dx[sel], dy[sel], dz[sel]
        for t in range(group_start[g], group_end[g]):
            v0 = verts[t, 0]
            e1 = verts[t, 1] - v0
            e2 = verts[t, 2] - v0
            pvx = sdy * e2[2] - sdz * e2[1]
            pvy = sdz * e2[0] - sdx * e2[2]
            pvz = sdx * e2[1] - sdy * e2[0]
            det = e1[0] * pvx + e1[1] * pvy + e1[2] * pvz
            tvx = origin[0] - v0[0]
            tvy = origin[1] - v0[1]
            tvz = origin[2] - v0[2]
            with np.errstate(divide="ignore", invalid="ignore"):
                inv_det = 1.0 / det
                u = (tvx * pvx + tvy * pvy + tvz * pvz) * inv_det
                qvx = tvy * e1[2] - tvz * e1[1]
                qvy = tvz * e1[0] - tvx * e1[2]
                qvz = tvx * e1[1] - tvy * e1[0]
                v = (sdx * qvx + sdy * qvy + sdz * qvz) * inv_det
                hit_t = (e2[0] * qvx + e2[1] * qvy + e2[2] * qvz) * inv_det
            ok = ((det != 0.0) & (u >= 0.0) & (u <= 1.0)
                  & (v >= 0.0) & (u + v <= 1.0) & (hit_t >= near))
            bt = best_t[sel]
            upd = ok & (hit_t < bt)
            if not upd.any():
                continue
            bt[upd] = hit_t[upd]
            best_t[sel] = bt
            btri = best_tri[sel]
            btri[upd] = t
            best_tri[sel] = btri
    return (best_t.reshape(height, width),
            best_tri.reshape(height, width))


def shade(tri_idx, inst, depth, face_rgb, face_nrm,
          origin, cam_right, cam_down, cam_fwd, focal, cx, cy,
          biome, quality, sun_dir, daylight, tint, fog_density,
          grain_amp, grain_seed, water_phase):
    height, width = tri_idx.shape
    dirs = _pixel_dirs(cam_right, cam_down, cam_fwd, focal, cx, cy,
                       height, width)
    dx, dy, dz = dirs[..., 0], dirs[..., 1], dirs[..., 2]
    brightness = 0.10 + 0.90 * daylight
    sky_day = 0.06 + 0.94 * daylight
    fog_col = np.array([0.72 * tint[0], 0.78 * tint[1], 0.86 * tint[2]])
    fog_col *= sky_day

    r = np.empty((height, width))
    g = np.empty((height, width))
    b = np.empty((height, width))

    sky = tri_idx < 0
    if quality == 0:
        r[sky] = 0.55 * sky_day
        g[sky] = 0.70 * sky_day
        b[sky] = 0.92 * sky_day
    else:
        elev = dz[sky] / np.sqrt(dx[sky] ** 2 + dy[sky] ** 2 + dz[sky] ** 2)
        k = np.maximum(elev, 0.0)
        r[sky] = (0.74 - 0.42 * k) * sky_day
        g[sky] = (0.82 - 0.34 * k) * sky_day
        b[sky] = (0.94 - 0.12 * k) * sky_day

    ground = (~sky) & (inst == 0)
    if ground.any():
        tz = depth[ground]
        wx = origin[0] + tz * dx[ground]
        wy = origin[1] + tz * dy[ground]
        if biome == 0:
            gr = np.full(wx.shape, 0.37)
            gg = np.full(wx.shape, 0.37)
            gb = np.full(wx.shape, 0.40)
            if quality == 1:
                mx = wx % 100.0
                my = wy % 100.0
                on_rx = (mx < 9.0) | (mx > 91.0)
                on_ry = (my < 9.0) | (my > 91.0)
                road = on_rx | on_ry
                gr[road], gg[road], gb[road] = 0.20, 0.20, 0.22
                line = ((on_rx & ((mx < 0.4) | (mx > 99.6)))
                        | (on_ry & ((my < 0.4) | (my > 99.6))))
                gr[line], gg[line], gb[line] = 0.80, 0.78, 0.70
                block = ~road
                n = _vnoise(wx[block] * 0.05, wy[block] * 0.05, 11)
                gr[block] += 0.08 * n
                gg[block] += 0.08 * n
                gb[block] += 0.08 * n
        elif biome == 1:
            if quality == 0:
                gr = np.full(wx.shape, 0.11)
                gg = np.full(wx.shape, 0.27)
                gb = np.full(wx.shape, 0.47)
            else:
                w1 = np.sin(0.9 * wx + 0.55 * wy + water_phase)
                w2 = np.sin(0.23 * wx - 0.31 * wy + 1.7 * water_phase)
                ripple = 0.5 + 0.25 * w1 + 0.25 * w2
                n = _vnoise(wx * 0.35, wy * 0.35, 7)
                gr = 0.09 + 0.10 * ripple + 0.03 * n
                gg = 0.24 + 0.12 * ripple + 0.04 * n
                gb = 0.44 + 0.14 * ripple + 0.05 * n
        else:
            if quality == 0:
                gr = np.full(wx.shape, 0.27)
                gg = np.full(wx.shape, 0.48)
                gb = np.full(wx.shape, 0.22)
            else:
                n1 = _vnoise(wx * 0.02, wy * 0.02, 3)
                n2 = _vnoise(wx * 0.23, wy * 0.23, 5)
                gr = 0.22 + 0.12 * n1 + 0.06 * n2
                gg = 0.42 + 0.14 * n1 + 0.07 * n2
                gb = 0.16 + 0.08 * n1 + 0.05 * n2
                dirt = n1 > 0.82
                gr[dirt] += 0.16
                gg[dirt] += 0.04
                gb[dirt] -= 0.04
        if quality == 1:
            lam = 0.30 + 0.70 * max(sun_dir[2], 0.0)
            gr = gr * lam
            gg = gg * lam
            gb = gb * lam
        r[ground], g[ground], b[ground] = gr, gg, gb

    obj = (~sky) & (inst != 0)
    if obj.any():
        t_obj = tri_idx[obj]
        orr = face_rgb[t_obj, 0].astype(np.float64)
        org = face_rgb[t_obj, 1].astype(np.float64)
        orb = face_rgb[t_obj, 2].astype(np.float64)
        if quality == 1:
            ndl = (face_nrm[t_obj, 0] * sun_dir[0]
                   + face_nrm[t_obj, 1] * sun_dir[1]
                   + face_nrm[t_obj, 2] * sun_dir[2])
            lam = 0.30 + 0.70 * np.maximum(ndl, 0.0)
            orr *= lam
            org *= lam
            orb *= lam
        r[obj], g[obj], b[obj] = orr, org, orb

    lit = ~sky
    r[lit] *= brightness
    g[lit] *= brightness
    b[lit] *= brightness
    if quality == 1:
        fog = 1.0 - np.exp(-depth[lit] * fog_density)
        r[lit] += (fog_col[0] - r[lit]) * fog
        g[lit] += (fog_col[1] - g[lit]) * fog
        b[lit] += (fog_col[2] - b[lit]) * fog

    r *= tint[0]
    g *= tint[1]
    b *= tint[2]
    if quality == 1 and grain_amp > 0.0:
        xi, yi = np.meshgrid(np.arange(width, dtype=np.int64),
                             np.arange(height, dtype=np.int64))
        gn = (_hash01(xi, yi, grain_seed) - 0.5) * grain_amp
        r += gn
        g += gn
        b += gn

    out = np.empty((height, width, 3), dtype=np.uint8)
    for i, ch in enumerate((r, g, b)):
        q = np.trunc(ch * 255.0 + 0.5)
        np.clip(q, 0, 255, out=q)
        out[..., i] = q.astype(np.uint8)
    return out
