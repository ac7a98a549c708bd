"""The eight benchmark tasks."""

from .env import Environment, StepResult, make_env
from .rewards import compute_reward, iou
from .spec import ALL_TASKS, EnvSpec, SceneObject, TaskKind, load_spec

__all__ = [
    "ALL_TASKS",
    "Environment",
    "EnvSpec",
    "SceneObject",
    "StepResult",
    "TaskKind",
    "compute_reward",
    "iou",
    "load_spec",
    "make_env",
]
