#!/usr/bin/env python3
"""Regenerate the golden fixtures consumed by the frontend client tests.

The Python side is the reference implementation of the wire format and
the label derivation; these fixtures freeze its behavior so the client
can assert byte-for-byte compatibility without a live server.  Output is
deterministic: rerunning produces identical files.

Usage: python3 tools/make_fixtures.py [--out frontend/fixtures]
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from aerogen.annotate import Annotation
from aerogen.dataset_io import CLASS_NAMES_SORTED, label_lines
from aerogen.protocol import encode_message


def _write(path: str, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"wrote {path}")


def protocol_cases() -> list:
    """Named messages; the client test reconstructs each by name and must
    produce identical bytes."""
    cases = {
        "ping": {"cmd": "ping"},
        "pose": {"cmd": "set_camera_pose",
                 "position": [0.0, 0.0, 50.0],
                 "yaw": 0.0, "pitch": 90.0, "roll": 0.0},
        "clock_float": {"cmd": "set_clock", "clock": 43200.0},
        "clock_int": {"cmd": "set_clock", "clock": 7},
        "spawn": {"cmd": "spawn", "class": "cow",
                  "position": [1.5, -2.25], "heading": 270.0},
        "scenario_cattle": {
            "cmd": "start_scenario", "preset": "cattle",
            "overrides": {"frame_count": 10,
                          "image": {"width": 640, "height": 360}}},
        "unicode": {"cmd": "note",
                    "text": "café ☂ \U0001F600 tab\tnl\n "
                            "q\" bs\\ del\x7f"},
        "numbers": {"cmd": "n",
                    "values": [0.1, 0.3333333333333333, 1e16, 1e-05,
                               1.5e-07, -0.0, 2.0, 123456.789, 5e-324],
                    "ints": [0, -7, 50, 9007199254740992],
                    "big": 2**70},
        "nested": {"a": [[], {}, [1, [2, [3]]]],
                   "b": {"y": {"x": None}, "Z": True, "0": False}},
        "empty": {},
        "reply_error": {"ok": False, "error": "unknown command 'x'"},
        "frame_head": {
            "ok": True, "event": "frame", "frame_id": 3,
            "width": 640, "height": 360, "payload_bytes": 12345,
            "annotations": [
                {"id": 7, "class": "cow", "bbox": [10, 20, 30, 44],
                 "visible_pixels": 961, "visibility": 0.657321,
                 "truncated": False},
                {"id": 9, "class": "swimmer-on-boat", "bbox": [0, 0, 5, 5],
                 "visible_pixels": 25, "visibility": 1.0,
                 "truncated": True},
            ],
            "meta": {"clock": 43200.0, "weather": "clear",
                     "biome": "pasture", "quality": "high",
                     "pose": {"position": [12.5, -3.75, 50.0],
                              "yaw": 0.0, "pitch": 90.0, "roll": 0.0}}},
    }
    return [{"name": name, "hex": encode_message(obj).hex()}
            for name, obj in sorted(cases.items())]


def format_cases() -> list:
    values = [
        0.0, 1.0, 0.5, 0.25, 1.0 / 3.0, 2.0 / 3.0,
        # odd/128 values sit exactly on a 6-decimal rounding tie
        1 / 128, 3 / 128, 5 / 128, 7 / 128, 9 / 128, 127 / 128,
        0.1, 0.2, 0.3, 0.7, 0.9999995, 0.99999949999,
        1e-7, -1e-7, -0.0, -0.25, -1.5,
        2.675, 1.0000005, 123.4567894999, 7.0,
    ]
    rng = np.random.default_rng(60601)
    values += [float(v) for v in rng.random(400)]
    values += [float(int(rng.integers(0, 2**n)) / 2**n)
               for n in range(1, 21) for _ in range(5)]
    return [[v, f"{v:.6f}"] for v in values]


def label_cases() -> list:
    def case(name, width, height, raw):
        anns = [Annotation(object_id=i + 1, class_name=cls,
                           x_min=b[0], y_min=b[1], x_max=b[2], y_max=b[3],
                           visible_pixels=64, visibility=1.0, truncated=False)
                for i, (cls, b) in enumerate(raw)]
        return {
            "name": name, "width": width, "height": height,
            "annotations": [{"class": cls, "bbox": list(b)}
                            for cls, b in raw],
            "expected_lines": label_lines(anns, width, height),
        }

    rng = np.random.default_rng(424242)
    random_raw = []
    for _ in range(30):
        cls = CLASS_NAMES_SORTED[int(rng.integers(len(CLASS_NAMES_SORTED)))]
        x0 = int(rng.integers(0, 600))
        y0 = int(rng.integers(0, 320))
        random_raw.append((cls, (x0, y0,
                                 x0 + int(rng.integers(1, 640 - x0 + 1)),
                                 y0 + int(rng.integers(1, 360 - y0 + 1)))))
    return [
        case("rounding_tie", 640, 360, [("cow", (4, 0, 6, 10))]),
        case("full_frame", 640, 360, [("boat", (0, 0, 640, 360))]),
        case("empty", 640, 360, []),
        case("all_classes", 512, 512,
             [(cls, (i * 7, i * 11, i * 7 + 31 + i, i * 11 + 17 + 2 * i))
              for i, cls in enumerate(CLASS_NAMES_SORTED)]),
        case("random_640x360", 640, 360, random_raw),
    ]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=os.path.join(
        os.path.dirname(__file__), "..", "frontend", "fixtures"))
    args = parser.parse_args(argv)
    out = os.path.abspath(args.out)
    os.makedirs(out, exist_ok=True)
    _write(os.path.join(out, "class_names.json"), list(CLASS_NAMES_SORTED))
    _write(os.path.join(out, "protocol_messages.json"), protocol_cases())
    _write(os.path.join(out, "format_cases.json"), format_cases())
    _write(os.path.join(out, "label_cases.json"), label_cases())
    return 0


if __name__ == "__main__":
    sys.exit(main())
