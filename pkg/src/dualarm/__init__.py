"""Deterministic evaluation harness for dual-arm tabletop manipulation.

Three evaluation tiers: spatial arm assignment, skill-level planning, and
direct end-effector pose control. Everything is seeded and replayable.
"""

__version__ = "0.1.0"

from .scoring import DEFAULT_SIGMA, SpatialScoreParams, spatial_score
from .tasks import get_registry, get_task
from .world import generate_scene

__all__ = [
    "DEFAULT_SIGMA",
    "SpatialScoreParams",
    "spatial_score",
    "get_registry",
    "get_task",
    "generate_scene",
    "__version__",
]
