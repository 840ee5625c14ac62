"""Pixel-exact annotations from instance buffers, plus a ray-cast oracle.

Boxes are measured on the supersampled instance buffer and mapped to output
pixels with floor/ceil so the output box always contains every covered
supersampled pixel.  Visibility compares against a solo coverage pass of the
object's own triangles under the identical inside test the rasterizer uses,
so visible pixels are a strict subset of solo pixels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels, renderer
from .camera import CameraPose
from .errors import IntegrityError
from .renderer import Frame, RenderSettings, Scene
from .world import WorldState

# Objects whose visible supersampled pixel count falls below this are not
# annotated.
MIN_PIXELS = 16


@dataclass(frozen=True)
class Annotation:
    """One labeled object in one frame.

    The box is half-open in output-resolution pixels:
    x_min <= x < x_max, y_min <= y < y_max.
    """

    object_id: int
    class_name: str
    x_min: int
    y_min: int
    x_max: int
    y_max: int
    visible_pixels: int     # supersampled count
    visibility: float       # visible / solo-render coverage, in (0, 1]
    truncated: bool         # supersampled mask touches the buffer border

    @property
    def bbox(self) -> tuple:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


def _bbox_to_output(x0: int, x1: int, y0: int, y1: int, ss: int,
                    out_w: int, out_h: int) -> tuple:
    """Inclusive supersampled bounds -> half-open output-pixel box."""
    ox0 = x0 // ss
    oy0 = y0 // ss
    ox1 = min((x1 + ss) // ss, out_w)
    oy1 = min((y1 + ss) // ss, out_h)
    return ox0, oy0, ox1, oy1


def _stats_by_id(instance: np.ndarray, known_ids) -> dict:
    """Pixel count and inclusive bounds keyed by object id.

    Raises IntegrityError if the buffer contains an id the scene does not.
    """
    present = np.unique(instance)
    present = present[present > 0]
    known = set(int(i) for i in known_ids)
    unknown = [int(i) for i in present if int(i) not in known]
    if unknown:
        raise IntegrityError(
            f"instance buffer contains unknown object ids {unknown}")
    if present.size == 0:
        return {}
    max_id = int(present.max())
    slot_of_id = np.full(max_id + 1, -1, dtype=np.int64)
    for slot, oid in enumerate(present):
        slot_of_id[int(oid)] = slot
    count, x_min, x_max, y_min, y_max = kernels.mask_stats(
        instance, slot_of_id, present.size)
    return {
        int(oid): (int(count[s]), int(x_min[s]), int(x_max[s]),
                   int(y_min[s]), int(y_max[s]))
        for s, oid in enumerate(present)
    }


def _solo_coverage(scene: Scene, pose: CameraPose,
                   settings: RenderSettings, object_id: int) -> int:
    """Supersampled pixels the object alone would cover, same camera."""
    intr = settings.buffer_intrinsics()
    tris = scene.object_triangles(object_id)
    uv, _, row_min, row_max, col_min, col_max, _ = renderer.project_triangles(
        tris, pose, intr)
    valid = (row_min <= row_max) & (col_min <= col_max)
    if not valid.any():
        return 0
    y0 = int(row_min[valid].min())
    y1 = int(row_max[valid].max())
    x0 = int(col_min[valid].min())
    x1 = int(col_max[valid].max())
    return int(kernels.coverage_count(
        uv, row_min, row_max, col_min, col_max, y0, y1, x0, x1))


def extract_annotations(frame: Frame, scene: Scene) -> list:
    """Annotations for every sufficiently visible object, ascending id."""
    settings = frame.settings
    buf_w = settings.buffer_width
    buf_h = settings.buffer_height
    stats = _stats_by_id(frame.instance, scene.class_of_id)
    out = []
    for oid in sorted(stats):
        visible, x0, x1, y0, y1 = stats[oid]
        if visible < MIN_PIXELS:
            continue
        solo = _solo_coverage(scene, frame.pose, settings, oid)
        if solo < visible:
            raise IntegrityError(
                f"object {oid}: solo coverage {solo} below visible "
                f"pixel count {visible}")
        bbox = _bbox_to_output(x0, x1, y0, y1, settings.supersample,
                               settings.width, settings.height)
        out.append(Annotation(
            object_id=oid,
            class_name=scene.class_of_id[oid],
            x_min=bbox[0], y_min=bbox[1], x_max=bbox[2], y_max=bbox[3],
            visible_pixels=visible,
            visibility=visible / solo,
            truncated=(x0 == 0 or y0 == 0 or x1 == buf_w - 1
                       or y1 == buf_h - 1),
        ))
    return out


def bbox_oracle(scene: Scene, pose: CameraPose,
                settings: RenderSettings) -> dict:
    """Output-pixel boxes via per-pixel ray casting, keyed by object id.

    Completely independent of the raster path: world-space triangle
    intersection per pixel, then the same bound/threshold bookkeeping.
    Objects below MIN_PIXELS are omitted, matching extract_annotations.
    """
    _, instance = renderer.raycast_instance(scene, pose, settings)
    stats = _stats_by_id(instance, scene.class_of_id)
    out = {}
    for oid in sorted(stats):
        visible, x0, x1, y0, y1 = stats[oid]
        if visible < MIN_PIXELS:
            continue
        out[oid] = _bbox_to_output(x0, x1, y0, y1, settings.supersample,
                                   settings.width, settings.height)
    return out


def capture(world: WorldState, pose: CameraPose,
            settings: RenderSettings):
    """Convenience: build the scene, render, annotate.

    Returns (frame, annotations, scene).
    """
    scene = renderer.build_scene(world)
    frame = renderer.render(scene, pose, settings)
    return frame, extract_annotations(frame, scene), scene
