"""Dataset writer: labels, metadata, splits, manifest, verification."""

import json
import os

import numpy as np
import pytest

from aerogen.annotate import Annotation
from aerogen.dataset_io import (CLASS_INDEX, CLASS_NAMES_SORTED,
                                META_CSV_COLUMNS, config_hash, encode_png,
                                frame_stem, generate_dataset, image_path,
                                label_lines, label_path, meta_path,
                                parse_label_file, read_manifest, split_frames,
                                verify_dataset)
from aerogen.errors import ConfigError, IntegrityError
from aerogen.scenario import ScenarioConfig
from aerogen.world import CLASS_CATALOG


def tiny_config(**overrides):
    raw = {
        "biome": "pasture",
        "area": [-300.0, -300.0, 300.0, 300.0],
        "seed": 9,
        "frame_count": 3,
        "altitude_range": [12.0, 25.0],
        "pitch_range": [60.0, 90.0],
        "spawn_rules": ["3xcow@2s"],
        "spawn_forward_range": [5.0, 40.0],
        "spawn_lateral_range": [-20.0, 20.0],
        "clock_policy": {"mode": "fixed", "value": 43200.0},
        "quality": "low",
        "image": {"width": 160, "height": 90, "supersample": 2},
    }
    raw.update(overrides)
    return ScenarioConfig.from_dict(raw)


def ann(x0, y0, x1, y1, cls="cow"):
    return Annotation(1, cls, x0, y0, x1, y1, 100, 1.0, False)


class TestClassIndex:
    def test_sorted_alphabetically(self):
        assert CLASS_NAMES_SORTED == tuple(sorted(CLASS_CATALOG))
        for i, name in enumerate(CLASS_NAMES_SORTED):
            assert CLASS_INDEX[name] == i

    def test_stable_known_positions(self):
        ordered = sorted(CLASS_CATALOG)
        assert CLASS_INDEX["bicycle"] == ordered.index("bicycle")
        assert CLASS_INDEX["cow"] == ordered.index("cow")


class TestLabelLines:
    def test_format_matches_manual(self):
        lines = label_lines([ann(10, 20, 30, 60)], 160, 90)
        cx = (10 + 30) / 320
        cy = (20 + 60) / 180
        w = 20 / 160
        h = 40 / 90
        idx = CLASS_INDEX["cow"]
        assert lines == [f"{idx} {cx:.6f} {cy:.6f} {w:.6f} {h:.6f}"]

    def test_half_even_rounding(self):
        # cx = 10/1280 = 0.0078125 rounds to even: "0.007812"
        lines = label_lines([ann(4, 0, 6, 10)], 640, 360)
        assert lines[0].split()[1] == "0.007812"

    def test_six_decimals_everywhere(self):
        lines = label_lines([ann(1, 2, 3, 4)], 640, 360)
        for field in lines[0].split()[1:]:
            whole, frac = field.split(".")
            assert len(frac) == 6

    def test_empty(self):
        assert label_lines([], 640, 360) == []


class TestPaths:
    def test_stems_and_paths(self):
        assert frame_stem(7) == "000007"
        assert image_path("/d", 7).endswith(os.path.join("images", "000007.png"))
        assert label_path("/d", 7).endswith(os.path.join("labels", "000007.txt"))
        assert meta_path("/d", 7).endswith(os.path.join("meta", "000007.json"))


class TestParseLabels:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "x.txt"
        p.write_text("3 0.500000 0.250000 0.100000 0.200000\n")
        assert parse_label_file(str(p)) == [(3, 0.5, 0.25, 0.1, 0.2)]

    def test_bad_field_count(self, tmp_path):
        p = tmp_path / "x.txt"
        p.write_text("3 0.5 0.25\n")
        with pytest.raises(IntegrityError):
            parse_label_file(str(p))


class TestSplits:
    def test_partition(self):
        splits = split_frames(100, {"train": 0.8, "val": 0.2}, seed=1)
        assert sorted(splits["train"] + splits["val"]) == list(range(100))
        assert len(splits["val"]) == 20
        assert splits["train"] == sorted(splits["train"])

    def test_deterministic(self):
        a = split_frames(50, {"train": 0.8, "val": 0.2}, seed=5)
        b = split_frames(50, {"train": 0.8, "val": 0.2}, seed=5)
        assert a == b
        c = split_frames(50, {"train": 0.8, "val": 0.2}, seed=6)
        assert a != c

    def test_fractions_must_sum_to_one(self):
        with pytest.raises(ConfigError):
            split_frames(10, {"train": 0.5, "val": 0.2}, seed=0)

    def test_rounding_never_loses_frames(self):
        splits = split_frames(7, {"a": 1 / 3, "b": 1 / 3, "c": 1 / 3}, seed=2)
        assert sum(len(v) for v in splits.values()) == 7


class TestConfigHash:
    def test_stable_and_sensitive(self):
        a = config_hash(tiny_config())
        b = config_hash(tiny_config())
        c = config_hash(tiny_config(seed=10))
        assert a == b
        assert a != c
        assert len(a) == 64  # sha-256 hex


class TestEncodePng:
    def test_round_trips_through_pillow(self):
        from PIL import Image
        import io
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, size=(12, 17, 3), dtype=np.uint8)
        blob = encode_png(img)
        back = np.asarray(Image.open(io.BytesIO(blob)))
        assert np.array_equal(back, img)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = str(tmp_path_factory.mktemp("ds"))
    cfg = tiny_config()
    result = generate_dataset(cfg, root)
    return root, cfg, result


class TestGenerate:
    def test_layout(self, dataset):
        root, cfg, result = dataset
        assert result.frame_count == 3
        for i in range(3):
            assert os.path.exists(image_path(root, i))
            assert os.path.exists(label_path(root, i))
            assert os.path.exists(meta_path(root, i))
        assert os.path.exists(os.path.join(root, "meta.csv"))
        assert os.path.exists(os.path.join(root, "manifest.json"))

    def test_manifest_contents(self, dataset):
        root, cfg, _ = dataset
        manifest = read_manifest(root)
        assert manifest["frame_count"] == 3
        assert manifest["image_size"] == [160, 90]
        assert manifest["supersample"] == 2
        assert manifest["classes"] == list(CLASS_NAMES_SORTED)
        assert manifest["config_hash"] == config_hash(cfg)
        assert ScenarioConfig.from_dict(manifest["config"]) == cfg

    def test_meta_csv_well_formed(self, dataset):
        root, _, _ = dataset
        with open(os.path.join(root, "meta.csv")) as fh:
            lines = fh.read().splitlines()
        assert lines[0] == ",".join(META_CSV_COLUMNS)
        assert len(lines) == 4

    def test_meta_json_matches_pose_ranges(self, dataset):
        root, cfg, _ = dataset
        for i in range(3):
            with open(meta_path(root, i)) as fh:
                rec = json.load(fh)
            assert rec["frame_id"] == i
            alt = rec["pose"]["position"][2]
            assert cfg.altitude_range[0] <= alt <= cfg.altitude_range[1]
            assert rec["quality"] == "low"

    def test_verify_passes(self, dataset):
        root, _, result = dataset
        summary = verify_dataset(root)
        assert summary["frame_count"] == 3
        assert summary["object_boxes"] == result.object_boxes

    def test_labels_parse_and_normalized(self, dataset):
        root, _, _ = dataset
        n = 0
        for i in range(3):
            for ci, cx, cy, w, h in parse_label_file(label_path(root, i)):
                assert 0 <= ci < len(CLASS_NAMES_SORTED)
                assert 0.0 <= cx <= 1.0 and 0.0 <= cy <= 1.0
                assert 0.0 < w <= 1.0 and 0.0 < h <= 1.0
                n += 1
        assert n > 0  # cows near a low camera must produce boxes

    def test_meta_only_skips_images(self, tmp_path):
        root = str(tmp_path / "noimg")
        generate_dataset(tiny_config(), root, write_images=False)
        assert not os.path.exists(image_path(root, 0))
        assert os.path.exists(label_path(root, 0))
        verify_dataset(root)


class TestVerifyCatchesDamage:
    def make(self, tmp_path):
        root = str(tmp_path / "ds")
        generate_dataset(tiny_config(), root, write_images=False)
        return root

    def test_missing_label(self, tmp_path):
        root = self.make(tmp_path)
        os.remove(label_path(root, 1))
        with pytest.raises(IntegrityError):
            verify_dataset(root)

    def test_header_mismatch(self, tmp_path):
        root = self.make(tmp_path)
        path = os.path.join(root, "meta.csv")
        with open(path) as fh:
            rows = fh.read().splitlines()
        rows[0] = "bogus,header"
        with open(path, "w") as fh:
            fh.write("\n".join(rows) + "\n")
        with pytest.raises(IntegrityError):
            verify_dataset(root)

    def test_row_count_mismatch(self, tmp_path):
        root = self.make(tmp_path)
        path = os.path.join(root, "meta.csv")
        with open(path) as fh:
            rows = fh.read().splitlines()
        with open(path, "w") as fh:
            fh.write("\n".join(rows[:-1]) + "\n")
        with pytest.raises(IntegrityError):
            verify_dataset(root)
