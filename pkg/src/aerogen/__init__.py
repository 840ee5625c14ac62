"""Synthetic aerial imagery engine.

Procedurally simulated worlds rendered through a software UAV camera,
with pixel-exact annotations, scripted capture scenarios, a TCP control
protocol, dataset export, metadata alignment, and detection scoring.
"""

from .annotate import Annotation, bbox_oracle, capture, extract_annotations
from .camera import CameraPose, Intrinsics
from .errors import (AerogenError, AlignmentError, ConfigError,
                     DegenerateBoxError, IntegrityError, MessageDecodeError,
                     OutOfBoundsError, ProtocolError, SpawnSpecError)
from .renderer import Frame, RenderSettings, Scene, build_scene, render
from .scenario import (ScenarioConfig, ScenarioFrame, SpawnRule,
                       iter_scenario, load_preset, parse_spawn_spec)
from .world import CLASS_CATALOG, ObjectClass, Rect, WorldObject, WorldState

__version__ = "0.1.0"

__all__ = [
    "AerogenError", "AlignmentError", "Annotation", "CLASS_CATALOG",
    "CameraPose", "ConfigError", "DegenerateBoxError", "Frame",
    "IntegrityError", "Intrinsics", "MessageDecodeError", "ObjectClass",
    "OutOfBoundsError",
    "ProtocolError", "Rect", "RenderSettings", "Scene", "ScenarioConfig",
    "ScenarioFrame", "SpawnRule", "SpawnSpecError", "WorldObject",
    "WorldState", "bbox_oracle", "build_scene", "capture",
    "extract_annotations", "iter_scenario", "load_preset",
    "parse_spawn_spec", "render", "__version__",
]
