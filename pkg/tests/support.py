"""Seeded builders shared across test modules."""

import numpy as np

from aerogen.camera import CameraPose
from aerogen.renderer import RenderSettings
from aerogen.world import CLASS_NAMES, Rect, WorldState, get_class

AREA = Rect(-200.0, -200.0, 200.0, 200.0)


def make_world(seed, n_objects, biome="pasture", spread=60.0):
    """World with n seeded random objects scattered around the origin."""
    world = WorldState(biome, AREA, seed=seed)
    rng = np.random.default_rng(seed + 1000)
    for _ in range(n_objects):
        cls = get_class(CLASS_NAMES[int(rng.integers(len(CLASS_NAMES)))])
        world.spawn_object(
            cls,
            (float(rng.uniform(-spread, spread)),
             float(rng.uniform(-spread, spread)), 0.0),
            heading=float(rng.uniform(0.0, 360.0)), now=0.0)
    return world


def random_pose(seed):
    """Seeded downward-looking pose near the origin."""
    rng = np.random.default_rng(seed + 2000)
    return CameraPose(
        position=(float(rng.uniform(-30.0, 30.0)),
                  float(rng.uniform(-30.0, 30.0)),
                  float(rng.uniform(15.0, 60.0))),
        yaw=float(rng.uniform(0.0, 360.0)),
        pitch=float(rng.uniform(30.0, 90.0)),
        roll=float(rng.uniform(-10.0, 10.0)))


def small_settings(**overrides):
    """128x128 supersample-2 settings, quality low unless overridden."""
    base = dict(width=128, height=128, supersample=2, quality="low")
    base.update(overrides)
    return RenderSettings(**base)
