"""Procedural world state: object catalog, spawn/despawn lifecycle, motion.

The world is a flat, z-up, right-handed space measured in meters with the
ground (or water surface) at z = 0.  Objects are classed, mobile entities that
wander between random waypoints; everything random flows through one seeded
generator so a given seed replays bit-identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, OutOfBoundsError

# Objects may spawn/roam this far outside the scenario area rectangle.
SPAWN_MARGIN = 500.0

# New waypoints are drawn within this radius of the current position.
WAYPOINT_RADIUS = 100.0

# Closer than this to the waypoint counts as arrival.
ARRIVAL_RADIUS = 1.0

BIOMES = ("urban", "water", "pasture")
WEATHER_STATES = ("clear", "overcast", "rain", "fog")


@dataclass(frozen=True)
class ObjectClass:
    """A spawnable object category with physical extent and a base color."""

    name: str
    footprint: tuple[float, float, float]  # length, width, height (m)
    palette: tuple[int, int, int]          # base RGB
    speed: float                           # typical travel speed (m/s)

    def __post_init__(self):
        if any(d <= 0 for d in self.footprint):
            raise ConfigError(f"non-positive footprint for class {self.name!r}")


def _catalog(*classes: ObjectClass) -> dict[str, ObjectClass]:
    return {c.name: c for c in classes}


# Traffic, maritime, and agriculture categories exported by the generator.
CLASS_CATALOG: dict[str, ObjectClass] = _catalog(
    ObjectClass("people", (0.5, 0.5, 1.8), (225, 105, 90), 1.4),
    ObjectClass("bicycle", (1.8, 0.6, 1.6), (70, 130, 220), 4.0),
    ObjectClass("car", (4.5, 1.9, 1.5), (190, 60, 55), 8.0),
    ObjectClass("truck", (8.5, 2.5, 3.4), (230, 150, 60), 7.0),
    ObjectClass("van", (5.4, 2.0, 2.3), (170, 170, 175), 7.5),
    ObjectClass("motor", (2.1, 0.8, 1.4), (120, 70, 200), 9.0),
    ObjectClass("bus", (12.0, 2.5, 3.1), (235, 200, 60), 6.5),
    ObjectClass("swimmer", (1.7, 0.6, 0.35), (240, 140, 120), 0.8),
    ObjectClass("floater", (1.4, 1.1, 0.4), (250, 120, 40), 0.3),
    ObjectClass("boat", (6.5, 2.3, 1.8), (245, 245, 240), 4.0),
    ObjectClass("swimmer-on-boat", (6.5, 2.3, 2.6), (210, 180, 150), 4.0),
    ObjectClass("floater-on-boat", (6.5, 2.3, 2.4), (200, 140, 90), 4.0),
    ObjectClass("cow", (2.4, 1.0, 1.5), (110, 72, 50), 0.7),
)

CLASS_NAMES: tuple[str, ...] = tuple(CLASS_CATALOG)


def get_class(name: str) -> ObjectClass:
    try:
        return CLASS_CATALOG[name]
    except KeyError:
        raise ConfigError(f"unknown object class {name!r}") from None


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in world meters."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ConfigError(f"degenerate rectangle {self}")

    def expanded(self, margin: float) -> "Rect":
        return Rect(self.x_min - margin, self.y_min - margin,
                    self.x_max + margin, self.y_max + margin)

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def clamp(self, x: float, y: float) -> tuple[float, float]:
        return (min(max(x, self.x_min), self.x_max),
                min(max(y, self.y_min), self.y_max))

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2, (self.y_min + self.y_max) / 2)


@dataclass
class WorldObject:
    """A placed, mobile entity.  id 0 is reserved for the background."""

    id: int
    cls: ObjectClass
    position: tuple[float, float, float]
    heading: float          # degrees, 0 = +Y, 90 = +X (compass)
    spawn_time: float       # seconds
    waypoint: tuple[float, float]
    speed: float            # m/s

    def age(self, now: float) -> float:
        return now - self.spawn_time


class WorldState:
    """Single mutable world owned by one simulation loop.

    All randomness (waypoints, class sampling) is drawn from ``self.rng`` so
    that one seed fixes every trajectory.
    """

    def __init__(self, biome: str, area: Rect, seed: int,
                 clock: float = 43200.0, weather: str = "clear"):
        if biome not in BIOMES:
            raise ConfigError(f"unknown biome {biome!r}")
        if weather not in WEATHER_STATES:
            raise ConfigError(f"unknown weather {weather!r}")
        self.biome = biome
        self.area = area
        self.bounds = area.expanded(SPAWN_MARGIN)
        self.rng_seed = int(seed)
        self.rng = np.random.default_rng(self.rng_seed)
        self.clock = float(clock) % 86400.0
        self.weather = weather
        self.objects: dict[int, WorldObject] = {}
        self._next_id = 1

    @property
    def total_spawned(self) -> int:
        """Objects ever spawned, including since-despawned ones."""
        return self._next_id - 1

    def set_clock(self, clock: float) -> None:
        self.clock = float(clock) % 86400.0

    def set_weather(self, weather: str) -> None:
        if weather not in WEATHER_STATES:
            raise ConfigError(f"unknown weather {weather!r}")
        self.weather = weather

    def _draw_waypoint(self, x: float, y: float) -> tuple[float, float]:
        ang = self.rng.uniform(0.0, 2.0 * math.pi)
        rad = self.rng.uniform(0.0, WAYPOINT_RADIUS)
        return self.bounds.clamp(x + rad * math.cos(ang), y + rad * math.sin(ang))

    def spawn_object(self, cls: ObjectClass, position: tuple[float, float, float],
                     heading: float, now: float) -> int:
        """Add an object; returns its fresh id.  Ids are never reused."""
        x, y, z = position
        if not self.bounds.contains(x, y):
            raise OutOfBoundsError(
                f"spawn position ({x:.1f}, {y:.1f}) outside area "
                f"expanded by {SPAWN_MARGIN:.0f} m")
        oid = self._next_id
        self._next_id += 1
        self.objects[oid] = WorldObject(
            id=oid, cls=cls, position=(float(x), float(y), float(z)),
            heading=float(heading) % 360.0, spawn_time=float(now),
            waypoint=self._draw_waypoint(x, y), speed=cls.speed)
        return oid

    def despawn_expired(self, now: float, max_age: float = 200.0) -> int:
        """Remove objects with age >= max_age; returns how many."""
        expired = [oid for oid, obj in self.objects.items()
                   if now - obj.spawn_time >= max_age]
        for oid in expired:
            del self.objects[oid]
        return len(expired)

    def step_motion(self, dt: float) -> None:
        """Advance every object toward its waypoint; retarget on arrival."""
        if dt <= 0:
            raise ConfigError(f"dt must be positive, got {dt}")
        for oid in sorted(self.objects):
            obj = self.objects[oid]
            x, y, z = obj.position
            wx, wy = obj.waypoint
            dx, dy = wx - x, wy - y
            dist = math.hypot(dx, dy)
            step = obj.speed * dt
            if dist > 1e-12 and step > 0.0:
                if step >= dist:
                    x, y = wx, wy
                else:
                    x += dx / dist * step
                    y += dy / dist * step
                obj.heading = math.degrees(math.atan2(dx, dy)) % 360.0
                obj.position = (x, y, z)
            if math.hypot(wx - x, wy - y) < ARRIVAL_RADIUS:
                obj.waypoint = self._draw_waypoint(x, y)

    def sample_class(self, weights: dict[str, float]) -> ObjectClass:
        """Draw a class proportionally to the given non-negative weights."""
        return sample_class(weights, self.rng)

    def snapshot(self) -> "WorldState":
        """Read-only copy safe to hand to a renderer while the loop advances."""
        clone = WorldState.__new__(WorldState)
        clone.biome = self.biome
        clone.area = self.area
        clone.bounds = self.bounds
        clone.rng_seed = self.rng_seed
        clone.rng = None  # snapshots never draw randomness
        clone.clock = self.clock
        clone.weather = self.weather
        clone.objects = {oid: replace(obj) for oid, obj in self.objects.items()}
        clone._next_id = self._next_id
        return clone


def sample_class(weights: dict[str, float], rng: np.random.Generator) -> ObjectClass:
    """Draw an ObjectClass with probability proportional to its weight."""
    if not weights:
        raise ConfigError("empty class weights")
    names = sorted(weights)
    w = np.array([weights[n] for n in names], dtype=np.float64)
    if np.any(w < 0):
        raise ConfigError("negative class weight")
    total = w.sum()
    if total <= 0:
        raise ConfigError("all class weights are zero")
    cum = np.cumsum(w / total)
    idx = int(np.searchsorted(cum, rng.random(), side="right"))
    idx = min(idx, len(names) - 1)
    return get_class(names[idx])
