"""Scripted capture sessions: agent flight, timed spawns, sampling policies.

A scenario advances in 1-second ticks.  Each tick, in order: periodic
retarget (new flight target, altitude/pitch resample, weather resample),
agent movement, rule-driven spawns ahead of the agent, ambient spawns,
object motion, expiry, clock sampling, then a capture is yielded.  Spawn
offsets never exceed the out-of-area margin, so scripted spawns cannot
fail bounds checks.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .camera import CameraPose
from .errors import ConfigError, SpawnSpecError
from .world import (WEATHER_STATES, Rect, WorldState, get_class)

TICK_SECONDS = 1.0
MAX_OBJECT_AGE = 200.0
DAY_LENGTH = 86400.0
CLOCK_BINS = 24

PRESET_NAMES = ("cattle", "seadronessee", "visdrone")

# "<count>x<class>@<period>s", e.g. "4xcow@2s"
_SPAWN_RE = re.compile(r"^(\d+)x([a-z][a-z-]*)@(\d+)s$")

# Default mix for weather_policy {"mode": "random"} without explicit weights.
DEFAULT_WEATHER_WEIGHTS = {
    "clear": 0.55, "overcast": 0.20, "rain": 0.15, "fog": 0.10,
}


@dataclass(frozen=True)
class SpawnRule:
    """Scheduled spawn: ``count`` objects of one class every ``period`` s."""

    count: int
    class_name: str
    period: int

    def token(self) -> str:
        return f"{self.count}x{self.class_name}@{self.period}s"


def parse_spawn_spec(token: str) -> SpawnRule:
    """Parse a spawn token like ``4xcow@2s``."""
    m = _SPAWN_RE.match(token)
    if not m:
        raise SpawnSpecError(
            token, f"spawn spec {token!r} does not match <count>x<class>@<period>s")
    count, name, period = int(m.group(1)), m.group(2), int(m.group(3))
    if count == 0:
        raise SpawnSpecError(token, f"spawn spec {token!r} has zero count")
    if period == 0:
        raise SpawnSpecError(token, f"spawn spec {token!r} has zero period")
    try:
        get_class(name)
    except ConfigError as exc:
        raise SpawnSpecError(token, str(exc)) from exc
    return SpawnRule(count=count, class_name=name, period=period)


@dataclass(frozen=True)
class AmbientSpawns:
    """Background population: ``count`` class-weighted spawns anywhere in
    the area every ``period`` seconds."""

    period: int
    count: int
    class_weights: dict

    def __post_init__(self):
        if self.period <= 0 or self.count <= 0:
            raise ConfigError("ambient period and count must be positive")
        for name in self.class_weights:
            get_class(name)


def _validate_clock_policy(policy: dict) -> dict:
    mode = policy.get("mode")
    if mode == "uniform":
        extra = set(policy) - {"mode"}
    elif mode == "fixed":
        extra = set(policy) - {"mode", "value"}
        value = policy.get("value")
        if not isinstance(value, (int, float)) or not 0 <= value < DAY_LENGTH:
            raise ConfigError(f"fixed clock value {value!r} outside [0, 86400)")
    elif mode == "distribution":
        extra = set(policy) - {"mode", "weights"}
        weights = policy.get("weights")
        if (not isinstance(weights, (list, tuple))
                or len(weights) != CLOCK_BINS
                or any(w < 0 for w in weights) or sum(weights) <= 0):
            raise ConfigError(
                f"clock distribution needs {CLOCK_BINS} non-negative "
                "weights with positive sum")
    else:
        raise ConfigError(f"unknown clock policy mode {mode!r}")
    if extra:
        raise ConfigError(f"unexpected clock policy keys {sorted(extra)}")
    return dict(policy)


def _validate_weather_policy(policy: dict) -> dict:
    mode = policy.get("mode")
    if mode == "fixed":
        extra = set(policy) - {"mode", "value"}
        if policy.get("value") not in WEATHER_STATES:
            raise ConfigError(f"unknown weather {policy.get('value')!r}")
    elif mode == "random":
        extra = set(policy) - {"mode", "weights"}
        weights = policy.get("weights", DEFAULT_WEATHER_WEIGHTS)
        unknown = set(weights) - set(WEATHER_STATES)
        if unknown:
            raise ConfigError(f"unknown weather states {sorted(unknown)}")
        if any(w < 0 for w in weights.values()) or sum(weights.values()) <= 0:
            raise ConfigError("weather weights must be non-negative with "
                              "positive sum")
    else:
        raise ConfigError(f"unknown weather policy mode {mode!r}")
    if extra:
        raise ConfigError(f"unexpected weather policy keys {sorted(extra)}")
    return dict(policy)


_REQUIRED_KEYS = {
    "biome", "area", "seed", "frame_count", "altitude_range", "pitch_range",
    "spawn_rules", "spawn_forward_range", "spawn_lateral_range",
}
_OPTIONAL_KEYS = {
    "name", "retarget_period", "agent_speed", "ambient", "clock_policy",
    "weather_policy", "quality", "image",
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated description of one capture session."""

    biome: str
    area: Rect
    seed: int
    frame_count: int
    altitude_range: tuple
    pitch_range: tuple
    spawn_rules: tuple
    spawn_forward_range: tuple
    spawn_lateral_range: tuple
    name: str = "custom"
    retarget_period: int = 30
    agent_speed: float = 10.0
    ambient: Optional[AmbientSpawns] = None
    clock_policy: dict = field(default_factory=lambda: {"mode": "uniform"})
    weather_policy: dict = field(
        default_factory=lambda: {"mode": "fixed", "value": "clear"})
    quality: str = "high"
    image_width: int = 640
    image_height: int = 360
    supersample: int = 2

    def __post_init__(self):
        if self.frame_count <= 0:
            raise ConfigError("frame_count must be positive")
        if self.retarget_period <= 0:
            raise ConfigError("retarget_period must be positive")
        if self.agent_speed <= 0:
            raise ConfigError("agent_speed must be positive")
        for label, rng in (("altitude_range", self.altitude_range),
                           ("pitch_range", self.pitch_range),
                           ("spawn_forward_range", self.spawn_forward_range),
                           ("spawn_lateral_range", self.spawn_lateral_range)):
            if len(rng) != 2 or rng[0] > rng[1]:
                raise ConfigError(f"{label} must be [low, high], got {rng}")
        if self.altitude_range[0] < 0:
            raise ConfigError("altitude_range must be non-negative")
        if not (-90 <= self.pitch_range[0] and self.pitch_range[1] <= 90):
            raise ConfigError("pitch_range outside [-90, 90]")
        _validate_clock_policy(self.clock_policy)
        _validate_weather_policy(self.weather_policy)

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        unknown = set(raw) - _REQUIRED_KEYS - _OPTIONAL_KEYS
        if unknown:
            raise ConfigError(f"unknown scenario keys {sorted(unknown)}")
        missing = _REQUIRED_KEYS - set(raw)
        if missing:
            raise ConfigError(f"missing scenario keys {sorted(missing)}")
        area = raw["area"]
        if len(area) != 4:
            raise ConfigError("area must be [x_min, y_min, x_max, y_max]")
        kwargs = dict(
            biome=raw["biome"],
            area=Rect(*[float(v) for v in area]),
            seed=int(raw["seed"]),
            frame_count=int(raw["frame_count"]),
            altitude_range=tuple(float(v) for v in raw["altitude_range"]),
            pitch_range=tuple(float(v) for v in raw["pitch_range"]),
            spawn_rules=tuple(parse_spawn_spec(t) for t in raw["spawn_rules"]),
            spawn_forward_range=tuple(
                float(v) for v in raw["spawn_forward_range"]),
            spawn_lateral_range=tuple(
                float(v) for v in raw["spawn_lateral_range"]),
        )
        if "name" in raw:
            kwargs["name"] = str(raw["name"])
        if "retarget_period" in raw:
            kwargs["retarget_period"] = int(raw["retarget_period"])
        if "agent_speed" in raw:
            kwargs["agent_speed"] = float(raw["agent_speed"])
        if raw.get("ambient") is not None:
            amb = dict(raw["ambient"])
            extra = set(amb) - {"period", "count", "class_weights"}
            if extra:
                raise ConfigError(f"unknown ambient keys {sorted(extra)}")
            kwargs["ambient"] = AmbientSpawns(
                period=int(amb["period"]), count=int(amb["count"]),
                class_weights=dict(amb["class_weights"]))
        if "clock_policy" in raw:
            kwargs["clock_policy"] = dict(raw["clock_policy"])
        if "weather_policy" in raw:
            kwargs["weather_policy"] = dict(raw["weather_policy"])
        if "quality" in raw:
            kwargs["quality"] = str(raw["quality"])
        if "image" in raw:
            img = dict(raw["image"])
            extra = set(img) - {"width", "height", "supersample"}
            if extra:
                raise ConfigError(f"unknown image keys {sorted(extra)}")
            kwargs["image_width"] = int(img["width"])
            kwargs["image_height"] = int(img["height"])
            if "supersample" in img:
                kwargs["supersample"] = int(img["supersample"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "biome": self.biome,
            "area": [self.area.x_min, self.area.y_min,
                     self.area.x_max, self.area.y_max],
            "seed": self.seed,
            "frame_count": self.frame_count,
            "altitude_range": list(self.altitude_range),
            "pitch_range": list(self.pitch_range),
            "spawn_rules": [r.token() for r in self.spawn_rules],
            "spawn_forward_range": list(self.spawn_forward_range),
            "spawn_lateral_range": list(self.spawn_lateral_range),
            "retarget_period": self.retarget_period,
            "agent_speed": self.agent_speed,
            "clock_policy": dict(self.clock_policy),
            "weather_policy": dict(self.weather_policy),
            "quality": self.quality,
            "image": {"width": self.image_width, "height": self.image_height,
                      "supersample": self.supersample},
        }
        if self.ambient is not None:
            out["ambient"] = {
                "period": self.ambient.period,
                "count": self.ambient.count,
                "class_weights": dict(self.ambient.class_weights),
            }
        return out

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def load_preset(name: str, overrides: Optional[dict] = None) -> ScenarioConfig:
    """Load a packaged scenario preset, optionally overriding top-level keys."""
    from importlib import resources
    if name not in PRESET_NAMES:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    raw = json.loads(
        resources.files("aerogen").joinpath(f"presets/{name}.json")
        .read_text(encoding="utf-8"))
    if overrides:
        for key, value in overrides.items():
            if key == "image" and "image" in raw:
                merged = dict(raw["image"])
                merged.update(value)
                raw["image"] = merged
            else:
                raw[key] = value
    return ScenarioConfig.from_dict(raw)


@dataclass
class ScenarioFrame:
    """One capture instant.  ``world`` is the live simulation state and is
    mutated by later ticks; call world.snapshot() to retain it."""

    index: int
    pose: CameraPose
    clock: float
    weather: str
    world: WorldState


def _sample_clock(policy: dict, rng) -> float:
    mode = policy["mode"]
    if mode == "uniform":
        return float(rng.uniform(0.0, DAY_LENGTH))
    if mode == "fixed":
        return float(policy["value"])
    weights = list(policy["weights"])
    total = float(sum(weights))
    u = rng.uniform(0.0, total)
    acc = 0.0
    chosen = CLOCK_BINS - 1
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            chosen = i
            break
    width = DAY_LENGTH / CLOCK_BINS
    return float(chosen * width + rng.uniform(0.0, width))


def _sample_weather(policy: dict, rng) -> str:
    weights = policy.get("weights", DEFAULT_WEATHER_WEIGHTS)
    names = [s for s in WEATHER_STATES if weights.get(s, 0.0) > 0]
    vals = [float(weights[s]) for s in names]
    total = sum(vals)
    u = rng.uniform(0.0, total)
    acc = 0.0
    for name, w in zip(names, vals):
        acc += w
        if u < acc:
            return name
    return names[-1]


def iter_scenario(config: ScenarioConfig) -> Iterator[ScenarioFrame]:
    """Run the scenario, yielding one ScenarioFrame per tick."""
    world = WorldState(config.biome, config.area, config.seed)
    rng = world.rng
    area = config.area
    ax, ay = area.center
    target = (ax, ay)
    yaw = 0.0
    altitude = config.altitude_range[0]
    pitch = config.pitch_range[0]
    if config.weather_policy["mode"] == "fixed":
        world.set_weather(config.weather_policy["value"])

    for t in range(config.frame_count):
        if t % config.retarget_period == 0:
            target = (float(rng.uniform(area.x_min, area.x_max)),
                      float(rng.uniform(area.y_min, area.y_max)))
            altitude = float(rng.uniform(*config.altitude_range))
            pitch = float(rng.uniform(*config.pitch_range))
            if config.weather_policy["mode"] == "random":
                world.set_weather(_sample_weather(config.weather_policy, rng))

        dx = target[0] - ax
        dy = target[1] - ay
        dist = math.hypot(dx, dy)
        if dist > 1e-12:
            yaw = math.degrees(math.atan2(dx, dy)) % 360.0
            step = min(config.agent_speed * TICK_SECONDS, dist)
            ax += dx / dist * step
            ay += dy / dist * step

        yaw_rad = math.radians(yaw)
        fx, fy = math.sin(yaw_rad), math.cos(yaw_rad)
        rx, ry = math.cos(yaw_rad), -math.sin(yaw_rad)
        for rule in config.spawn_rules:
            if t % rule.period == 0:
                cls = get_class(rule.class_name)
                for _ in range(rule.count):
                    fwd = rng.uniform(*config.spawn_forward_range)
                    lat = rng.uniform(*config.spawn_lateral_range)
                    world.spawn_object(
                        cls, (ax + fwd * fx + lat * rx,
                              ay + fwd * fy + lat * ry, 0.0),
                        heading=float(rng.uniform(0.0, 360.0)), now=t)
        if config.ambient is not None and t % config.ambient.period == 0:
            for _ in range(config.ambient.count):
                cls = world.sample_class(config.ambient.class_weights)
                world.spawn_object(
                    cls, (float(rng.uniform(area.x_min, area.x_max)),
                          float(rng.uniform(area.y_min, area.y_max)), 0.0),
                    heading=float(rng.uniform(0.0, 360.0)), now=t)

        world.step_motion(TICK_SECONDS)
        world.despawn_expired(now=t, max_age=MAX_OBJECT_AGE)
        world.set_clock(_sample_clock(config.clock_policy, rng))

        pose = CameraPose(position=(ax, ay, altitude), yaw=yaw,
                          pitch=pitch, roll=0.0)
        yield ScenarioFrame(index=t, pose=pose, clock=world.clock,
                            weather=world.weather, world=world)
