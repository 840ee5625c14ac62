"""Dataset export: images, normalized label files, metadata, manifest.

Layout under one root directory::

    manifest.json        config echo, config hash, classes, splits
    meta.csv             one row per frame (pose, clock, weather, counts)
    images/000123.png
    labels/000123.txt    "<class_index> <cx> <cy> <w> <h>" normalized, 6 dp
    meta/000123.json     full per-frame record including per-object boxes

Label and meta files are written with fixed formatting and key order, so a
given config reproduces them byte-for-byte.  Box centers are computed as
(x_min + x_max) / (2 * width) on the half-open output-pixel box; any client
re-deriving labels must mirror that expression and the 6-decimal rounding.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from . import annotate, renderer
from .errors import ConfigError, IntegrityError
from .scenario import ScenarioConfig, ScenarioFrame, iter_scenario
from .world import CLASS_CATALOG

FORMAT_VERSION = 1

# Stable class indexing used by label files and clients.
CLASS_NAMES_SORTED = tuple(sorted(CLASS_CATALOG))
CLASS_INDEX = {name: i for i, name in enumerate(CLASS_NAMES_SORTED)}

META_CSV_COLUMNS = (
    "frame_id", "clock", "weather", "biome", "quality",
    "pos_x", "pos_y", "altitude", "yaw", "pitch", "roll", "n_objects",
)


def frame_stem(index: int) -> str:
    return f"{index:06d}"


def image_path(root: str, index: int) -> str:
    return os.path.join(root, "images", frame_stem(index) + ".png")


def label_path(root: str, index: int) -> str:
    return os.path.join(root, "labels", frame_stem(index) + ".txt")


def meta_path(root: str, index: int) -> str:
    return os.path.join(root, "meta", frame_stem(index) + ".json")


def label_lines(annotations, width: int, height: int,
                class_index: dict = CLASS_INDEX) -> list:
    """Normalized label rows for one frame, in annotation order."""
    lines = []
    for ann in annotations:
        idx = class_index[ann.class_name]
        cx = (ann.x_min + ann.x_max) / (2 * width)
        cy = (ann.y_min + ann.y_max) / (2 * height)
        bw = (ann.x_max - ann.x_min) / width
        bh = (ann.y_max - ann.y_min) / height
        lines.append(f"{idx} {cx:.6f} {cy:.6f} {bw:.6f} {bh:.6f}")
    return lines


def parse_label_file(path: str) -> list:
    """Rows of (class_index, cx, cy, w, h) from one label file."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 5:
                raise IntegrityError(f"{path}:{ln}: expected 5 fields")
            rows.append((int(parts[0]), *[float(p) for p in parts[1:]]))
    return rows


def meta_record(sf: ScenarioFrame, annotations, quality: str) -> dict:
    """Per-frame metadata dict with deterministic content."""
    pose = sf.pose
    return {
        "frame_id": sf.index,
        "clock": sf.clock,
        "weather": sf.weather,
        "biome": sf.world.biome,
        "quality": quality,
        "pose": {
            "position": [pose.position[0], pose.position[1], pose.position[2]],
            "yaw": pose.yaw,
            "pitch": pose.pitch,
            "roll": pose.roll,
        },
        "objects": [
            {
                "id": a.object_id,
                "class": a.class_name,
                "bbox": [a.x_min, a.y_min, a.x_max, a.y_max],
                "visible_pixels": a.visible_pixels,
                "visibility": round(a.visibility, 6),
                "truncated": a.truncated,
            }
            for a in annotations
        ],
    }


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_frame(root: str, index: int, frame, annotations,
                meta: dict, write_image: bool = True) -> None:
    """Write the image/label/meta triple for one frame."""
    if write_image:
        Image.fromarray(frame.color).save(image_path(root, index))
    lines = label_lines(annotations, frame.settings.width,
                        frame.settings.height)
    _write_text(label_path(root, index),
                "".join(line + "\n" for line in lines))
    _write_text(meta_path(root, index),
                json.dumps(meta, sort_keys=True, separators=(",", ":")) + "\n")


def encode_png(color: np.ndarray) -> bytes:
    """RGB array -> PNG bytes (used by the frame protocol)."""
    buf = io.BytesIO()
    Image.fromarray(color).save(buf, format="PNG")
    return buf.getvalue()


def config_hash(config: ScenarioConfig) -> str:
    """Stable hash of the full scenario configuration."""
    canon = json.dumps(config.to_dict(), sort_keys=True,
                       separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def split_frames(n_frames: int, fractions: dict, seed: int) -> dict:
    """Disjoint frame-id splits by seeded permutation.

    Split sizes come from cumulative rounding, so they always sum to
    n_frames; ids within each split are sorted.
    """
    total = sum(fractions.values())
    if abs(total - 1.0) > 1e-9:
        raise ConfigError(f"split fractions sum to {total}, expected 1")
    if any(f < 0 for f in fractions.values()):
        raise ConfigError("split fractions must be non-negative")
    order = np.random.default_rng(seed).permutation(n_frames)
    out = {}
    cum = 0.0
    taken = 0
    for name, frac in fractions.items():
        cum += frac
        upto = int(round(cum * n_frames))
        out[name] = sorted(int(i) for i in order[taken:upto])
        taken = upto
    return out


def write_manifest(root: str, config: ScenarioConfig, splits: dict) -> dict:
    manifest = {
        "format_version": FORMAT_VERSION,
        "config": config.to_dict(),
        "config_hash": config_hash(config),
        "image_size": [config.image_width, config.image_height],
        "supersample": config.supersample,
        "classes": list(CLASS_NAMES_SORTED),
        "frame_count": config.frame_count,
        "splits": {k: list(v) for k, v in splits.items()},
    }
    _write_text(os.path.join(root, "manifest.json"),
                json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    return manifest


def read_manifest(root: str) -> dict:
    path = os.path.join(root, "manifest.json")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise IntegrityError(f"missing manifest: {path}") from exc


def write_meta_csv(root: str, rows: list) -> None:
    """rows: per-frame dicts as produced by meta_record."""
    path = os.path.join(root, "meta.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(META_CSV_COLUMNS)
        for rec in rows:
            pose = rec["pose"]
            writer.writerow([
                rec["frame_id"],
                f"{rec['clock']:.6f}",
                rec["weather"],
                rec["biome"],
                rec["quality"],
                f"{pose['position'][0]:.6f}",
                f"{pose['position'][1]:.6f}",
                f"{pose['position'][2]:.6f}",
                f"{pose['yaw']:.6f}",
                f"{pose['pitch']:.6f}",
                f"{pose['roll']:.6f}",
                len(rec["objects"]),
            ])


@dataclass
class GenerateResult:
    root: str
    frame_count: int
    object_boxes: int
    splits: dict


def generate_dataset(config: ScenarioConfig, root: str, *,
                     val_fraction: float = 0.2, write_images: bool = True,
                     progress=None) -> GenerateResult:
    """Run the scenario end to end and write the dataset to ``root``."""
    for sub in ("images", "labels", "meta"):
        os.makedirs(os.path.join(root, sub), exist_ok=True)
    settings = renderer.RenderSettings(
        width=config.image_width, height=config.image_height,
        supersample=config.supersample, quality=config.quality)
    meta_rows = []
    n_boxes = 0
    for sf in iter_scenario(config):
        frame_settings = renderer.RenderSettings(
            width=settings.width, height=settings.height,
            supersample=settings.supersample, quality=settings.quality,
            grain_seed=sf.index)
        frame, anns, _ = annotate.capture(sf.world, sf.pose, frame_settings)
        rec = meta_record(sf, anns, config.quality)
        write_frame(root, sf.index, frame, anns, rec,
                    write_image=write_images)
        meta_rows.append(rec)
        n_boxes += len(anns)
        if progress is not None:
            progress(sf.index, config.frame_count)
    write_meta_csv(root, meta_rows)
    splits = split_frames(config.frame_count,
                          {"train": 1.0 - val_fraction, "val": val_fraction},
                          config.seed)
    write_manifest(root, config, splits)
    return GenerateResult(root=root, frame_count=config.frame_count,
                          object_boxes=n_boxes, splits=splits)


def verify_dataset(root: str) -> dict:
    """Check structural integrity; raises IntegrityError on the first
    violation.  Returns summary counts."""
    manifest = read_manifest(root)
    n = manifest["frame_count"]
    splits = manifest["splits"]
    all_ids = sorted(i for ids in splits.values() for i in ids)
    if all_ids != list(range(n)):
        raise IntegrityError("splits do not partition the frame range")
    csv_path = os.path.join(root, "meta.csv")
    if not os.path.exists(csv_path):
        raise IntegrityError("missing meta.csv")
    with open(csv_path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != META_CSV_COLUMNS:
            raise IntegrityError("meta.csv header mismatch")
        rows = list(reader)
    if len(rows) != n:
        raise IntegrityError(
            f"meta.csv has {len(rows)} rows, expected {n}")
    n_boxes = 0
    for i in range(n):
        for path in (label_path(root, i), meta_path(root, i)):
            if not os.path.exists(path):
                raise IntegrityError(f"missing {path}")
        n_boxes += len(parse_label_file(label_path(root, i)))
    return {"frame_count": n, "object_boxes": n_boxes,
            "config_hash": manifest["config_hash"]}
