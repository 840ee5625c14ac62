"""Metadata-distribution alignment between generated and reference sets.

Alignment is a binned bootstrap: put both distributions into bins, then
resample source frames with replacement so bin masses match the target.
Target mass in bins the source cannot cover is redistributed over covered
bins proportionally (with a warning); if no bin overlaps at all the
alignment fails.  An angle filter keeps frames whose camera pitch is within
a threshold of a target angle.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, fields

import numpy as np

from .errors import AlignmentError, ConfigError, IntegrityError

DAY_LENGTH = 86400.0
CLOCK_BINS = 24
ALTITUDE_BIN_M = 10.0


class CoverageWarning(UserWarning):
    """Some target mass fell in bins the source cannot supply."""


@dataclass
class MetaTable:
    """Columnar view of per-frame metadata (one row per frame)."""

    frame_id: np.ndarray
    clock: np.ndarray
    weather: np.ndarray
    biome: np.ndarray
    quality: np.ndarray
    pos_x: np.ndarray
    pos_y: np.ndarray
    altitude: np.ndarray
    yaw: np.ndarray
    pitch: np.ndarray
    roll: np.ndarray
    n_objects: np.ndarray

    def __len__(self) -> int:
        return int(self.frame_id.shape[0])

    def select(self, indices) -> "MetaTable":
        """Row subset/resample in the given order."""
        idx = np.asarray(indices, dtype=np.int64)
        return MetaTable(**{
            f.name: getattr(self, f.name)[idx] for f in fields(self)})

    @classmethod
    def from_csv(cls, path) -> "MetaTable":
        with open(path, "r", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            rows = list(reader)
        if reader.fieldnames is None:
            raise IntegrityError(f"{path}: empty metadata csv")
        try:
            return cls(
                frame_id=np.array([int(r["frame_id"]) for r in rows]),
                clock=np.array([float(r["clock"]) for r in rows]),
                weather=np.array([r["weather"] for r in rows], dtype=object),
                biome=np.array([r["biome"] for r in rows], dtype=object),
                quality=np.array([r["quality"] for r in rows], dtype=object),
                pos_x=np.array([float(r["pos_x"]) for r in rows]),
                pos_y=np.array([float(r["pos_y"]) for r in rows]),
                altitude=np.array([float(r["altitude"]) for r in rows]),
                yaw=np.array([float(r["yaw"]) for r in rows]),
                pitch=np.array([float(r["pitch"]) for r in rows]),
                roll=np.array([float(r["roll"]) for r in rows]),
                n_objects=np.array([int(r["n_objects"]) for r in rows]),
            )
        except (KeyError, TypeError) as exc:
            raise IntegrityError(f"{path}: malformed metadata csv: {exc}")

    @classmethod
    def from_records(cls, records) -> "MetaTable":
        """Build from per-frame metadata dicts (see dataset_io.meta_record)."""
        recs = list(records)
        return cls(
            frame_id=np.array([r["frame_id"] for r in recs]),
            clock=np.array([float(r["clock"]) for r in recs]),
            weather=np.array([r["weather"] for r in recs], dtype=object),
            biome=np.array([r["biome"] for r in recs], dtype=object),
            quality=np.array([r["quality"] for r in recs], dtype=object),
            pos_x=np.array([r["pose"]["position"][0] for r in recs]),
            pos_y=np.array([r["pose"]["position"][1] for r in recs]),
            altitude=np.array([r["pose"]["position"][2] for r in recs]),
            yaw=np.array([r["pose"]["yaw"] for r in recs]),
            pitch=np.array([r["pose"]["pitch"] for r in recs]),
            roll=np.array([r["pose"]["roll"] for r in recs]),
            n_objects=np.array([len(r["objects"]) for r in recs]),
        )


def clock_bin_edges() -> np.ndarray:
    return np.linspace(0.0, DAY_LENGTH, CLOCK_BINS + 1)


def histogram_weights(values, bin_edges) -> np.ndarray:
    """Normalized occupancy of values over the bins."""
    counts, _ = np.histogram(np.asarray(values, dtype=np.float64),
                             bins=bin_edges)
    total = counts.sum()
    if total == 0:
        raise AlignmentError("empty distribution", uncovered_mass=1.0)
    return counts / total


def bootstrap_align(source_values, target_weights, n: int, seed: int,
                    bin_edges) -> np.ndarray:
    """Resample source rows (with replacement) to match target bin masses.

    Returns row indices into the source, length n.  Target mass in bins
    with no source rows is redistributed proportionally over covered bins
    (CoverageWarning); raises AlignmentError if nothing is covered.
    """
    values = np.asarray(source_values, dtype=np.float64)
    edges = np.asarray(bin_edges, dtype=np.float64)
    n_bins = edges.shape[0] - 1
    weights = np.asarray(target_weights, dtype=np.float64)
    if weights.shape[0] != n_bins:
        raise ConfigError(
            f"{weights.shape[0]} target weights for {n_bins} bins")
    if (weights < 0).any() or weights.sum() <= 0:
        raise ConfigError("target weights must be non-negative, positive sum")
    if n <= 0:
        raise ConfigError("sample size must be positive")
    probs = weights / weights.sum()

    which = np.digitize(values, edges) - 1
    # values exactly on the last edge belong to the last bin
    which[values == edges[-1]] = n_bins - 1
    in_range = (which >= 0) & (which < n_bins)
    members = [np.flatnonzero(in_range & (which == b)) for b in range(n_bins)]
    covered = np.array([m.size > 0 for m in members])

    uncovered_mass = float(probs[~covered].sum())
    if uncovered_mass >= 1.0 - 1e-12:
        raise AlignmentError(
            "no overlap between source and target distributions",
            uncovered_mass=uncovered_mass)
    if uncovered_mass > 0.0:
        warnings.warn(
            f"{uncovered_mass:.3f} of target mass falls in bins with no "
            "source frames; redistributing over covered bins",
            CoverageWarning, stacklevel=2)
        probs = np.where(covered, probs, 0.0)
        probs = probs / probs.sum()

    rng = np.random.default_rng(seed)
    per_bin = rng.multinomial(n, probs)
    picks = []
    for b in range(n_bins):
        if per_bin[b] == 0:
            continue
        picks.append(rng.choice(members[b], size=per_bin[b], replace=True))
    out = np.concatenate(picks) if picks else np.empty(0, dtype=np.int64)
    return rng.permutation(out)


def time_align(source: MetaTable, target, n: int, seed: int) -> np.ndarray:
    """Align on hour-of-day (24 hourly bins).

    ``target`` is either a MetaTable (its clock histogram is used) or a
    sequence of 24 bin weights.  Returns source row indices, length n.
    """
    edges = clock_bin_edges()
    if isinstance(target, MetaTable):
        weights = histogram_weights(target.clock, edges)
    else:
        weights = np.asarray(target, dtype=np.float64)
    return bootstrap_align(source.clock, weights, n, seed, edges)


def altitude_align(source: MetaTable, target, n: int, seed: int,
                   bin_width: float = ALTITUDE_BIN_M) -> np.ndarray:
    """Align on flight altitude using fixed-width bins covering both sets."""
    src = np.asarray(source.altitude, dtype=np.float64)
    if isinstance(target, MetaTable):
        tgt = np.asarray(target.altitude, dtype=np.float64)
    else:
        tgt = np.asarray(target, dtype=np.float64)
    lo = np.floor(min(src.min(), tgt.min()) / bin_width) * bin_width
    hi = np.ceil(max(src.max(), tgt.max()) / bin_width) * bin_width
    if hi <= lo:
        hi = lo + bin_width
    edges = np.arange(lo, hi + bin_width / 2, bin_width)
    weights = histogram_weights(tgt, edges)
    return bootstrap_align(src, weights, n, seed, edges)


def angle_filter(pitch_values, target_deg: float,
                 threshold_deg: float) -> np.ndarray:
    """Indices of frames with |pitch - target| <= threshold, original order.

    Applying the filter to its own output changes nothing.
    """
    if threshold_deg < 0:
        raise ConfigError("threshold must be non-negative")
    pitch = np.asarray(pitch_values, dtype=np.float64)
    return np.flatnonzero(np.abs(pitch - target_deg) <= threshold_deg)


def ks_statistic(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov sup distance."""
    xa = np.sort(np.asarray(a, dtype=np.float64))
    xb = np.sort(np.asarray(b, dtype=np.float64))
    if xa.size == 0 or xb.size == 0:
        raise ConfigError("ks_statistic needs non-empty samples")
    pooled = np.concatenate([xa, xb])
    fa = np.searchsorted(xa, pooled, side="right") / xa.size
    fb = np.searchsorted(xb, pooled, side="right") / xb.size
    return float(np.abs(fa - fb).max())
