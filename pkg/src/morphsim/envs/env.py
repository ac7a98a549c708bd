"""The Environment: gym-style reset/step over the MPM engine."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import engine
from ..actuation import (
    FIELD_RESOLUTION,
    ActionGrid,
    clamp_action,
    distribute_to_particles,
    upsample,
)
from ..errors import ConfigError
from ..materials import Role
from ..observation import ObservationImage, center_of_mass, rasterize
from .spec import EnvSpec, TaskKind
from . import rewards, scenes, targets


@dataclass
class StepResult:
    observation: ObservationImage
    reward: float
    terminated: bool
    truncated: bool
    info: dict


@dataclass
class _RewardContext:
    body_slices: dict
    initial_cap_com: np.ndarray | None = None
    current_iou: float = 0.0
    success_this_step: bool = False
    extras: dict = field(default_factory=dict)


class Environment:
    """One task instance; single-threaded, deterministic given (spec, seed)."""

    def __init__(self, spec: EnvSpec, seed: int = 0):
        self.spec = spec
        self.seed = int(seed)
        self.cfg = spec.world_config()
        self.task = spec.task
        self._target_bitmap = (
            targets.load(spec.target["name"])
            if spec.target.get("kind") == "bitmap"
            else None
        )
        self.state = None
        self.body_slices = None
        self._ctx = None
        self._step_count = 0
        self.reset()

    # -- lifecycle -----------------------------------------------------

    def reset(self) -> tuple[ObservationImage, dict]:
        self.state, self.body_slices = scenes.build_scene(self.spec, self.seed)
        engine.recenter_window(self.state, self.cfg)
        self._step_count = 0
        self._ctx = _RewardContext(body_slices=self.body_slices)
        if "cap" in self.body_slices:
            self._ctx.initial_cap_com = self.state.x[self.body_slices["cap"]].mean(axis=0)
        obs = self._observe()
        if self._target_bitmap is not None:
            self._ctx.current_iou = rewards.iou(obs.robot_bitmap(), self._target_bitmap)
        return obs, {"com": center_of_mass(self.state).tolist(), "step": 0}

    @property
    def n_robot_particles(self) -> int:
        return self.body_slices["robot"].stop

    @property
    def window_side(self) -> float:
        return float(self.spec.observation.get("window_side", 0.5))

    def action_window_origin(self) -> np.ndarray:
        return center_of_mass(self.state) - 0.5 * self.window_side

    # -- stepping ------------------------------------------------------

    def _as_action_grid(self, action) -> ActionGrid:
        if isinstance(action, ActionGrid):
            grid = action
        else:
            arr = np.asarray(action, dtype=np.float64)
            if arr.ndim == 1:
                n = int(round((arr.size / 2) ** 0.5))
                if 2 * n * n != arr.size:
                    raise ConfigError(f"flat action of size {arr.size} is not n*n*2")
                arr = arr.reshape(n, n, 2)
            grid = ActionGrid(arr)
        # placement is environment-controlled: the muscle window follows COM
        return grid.with_window(self.action_window_origin(), self.window_side)

    def action_field(self, action) -> ActionGrid:
        """Compose the final 64-node muscle field for one control step."""
        grid = self._as_action_grid(action)
        if grid.resolution != FIELD_RESOLUTION:
            grid = upsample(grid, FIELD_RESOLUTION)
        return clamp_action(grid, self.spec.a_max)

    def step(self, action) -> StepResult:
        field_grid = self.action_field(action)
        act = distribute_to_particles(field_grid, self.state)

        prev = self.state.copy()
        robot = self.state.role == Role.ROBOT
        engine.run_substeps(self.state, act[robot], self.cfg, self.spec.substeps_per_step)
        engine.recenter_window(self.state, self.cfg)

        obs = self._observe()
        self._step_count += 1

        if self._target_bitmap is not None:
            self._ctx.current_iou = rewards.iou(obs.robot_bitmap(), self._target_bitmap)
        terminated = self._check_success()
        self._ctx.success_this_step = terminated
        reward, breakdown = rewards.compute_reward(self.task, prev, self.state, self.spec, self._ctx)
        truncated = self._step_count >= self.spec.max_episode_steps

        com = center_of_mass(self.state)
        info = {
            "breakdown": breakdown,
            "com": com.tolist(),
            "step": self._step_count,
        }
        if self._target_bitmap is not None:
            info["iou"] = self._ctx.current_iou
        return StepResult(obs, reward, terminated, truncated, info)

    def _observe(self) -> ObservationImage:
        o = self.spec.observation
        return rasterize(
            self.state,
            window_side=self.window_side,
            saturation_count=int(o.get("saturation_count", 4)),
            velocity_scale=float(o.get("velocity_scale", 1.0)),
        )

    # -- termination ---------------------------------------------------

    def _check_success(self) -> bool:
        if self.task is TaskKind.CATCH:
            sl = self.body_slices["cargo"]
            goal = np.asarray(self.spec.target["point"])
            tol = float(self.spec.target.get("success_tolerance", 0.04))
            return bool(np.linalg.norm(self.state.x[sl].mean(axis=0) - goal) < tol)
        if self.task is TaskKind.SLOT:
            sl = self.body_slices["cap"]
            disp = np.linalg.norm(
                self.state.x[sl].mean(axis=0) - self._ctx.initial_cap_com
            )
            return bool(disp > float(self.spec.target.get("success_displacement", 0.06)))
        return False

    def check_termination(self) -> tuple[bool, bool]:
        """(terminated, truncated) for the current state and step count."""
        return self._check_success(), self._step_count >= self.spec.max_episode_steps


def make_env(task, overrides: dict | None = None, seed: int = 0) -> Environment:
    """Build one of the benchmark tasks with optional config overrides."""
    from .spec import load_spec

    return Environment(load_spec(task, overrides), seed=seed)
