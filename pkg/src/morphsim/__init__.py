"""morphsim: 2D elasto-plastic MPM engine for muscle-field-driven soft robots."""

__version__ = "0.1.0"

from .materials import MaterialParams, Role
from .world import SimState, WorldConfig

__all__ = ["MaterialParams", "Role", "SimState", "WorldConfig", "__version__"]
