"""Task declarations: EnvSpec, scene objects, config loading and hashing."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

import yaml

from ..errors import ConfigError
from ..materials import MaterialParams
from ..world import WorldConfig


class TaskKind(str, Enum):
    SHAPE_MATCH = "shape_match"
    RUN = "run"
    KICK = "kick"
    DIG = "dig"
    OBSTACLE = "obstacle"
    GROW = "grow"
    CATCH = "catch"
    SLOT = "slot"


ALL_TASKS = tuple(TaskKind)


@dataclass
class SceneObject:
    """One scene element.

    ``kind`` is one of static_obstacle, passive_soft_body, soil_region,
    target_marker. Static obstacles act through grid boundary conditions;
    particle kinds carry their own material dict (youngs_modulus,
    poisson_ratio, yield_stress).
    """

    kind: str
    name: str
    geometry: dict
    material: dict | None = None
    boundary: str = "friction"
    friction_coeff: float | None = None
    spacing_cells: float = 0.5

    KINDS = ("static_obstacle", "passive_soft_body", "soil_region", "target_marker")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigError(f"unknown scene object kind {self.kind!r}")
        if self.boundary not in ("friction", "sticky"):
            raise ConfigError(f"unknown boundary mode {self.boundary!r}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "name": self.name,
            "geometry": self.geometry,
            "material": self.material,
            "boundary": self.boundary,
            "friction_coeff": self.friction_coeff,
            "spacing_cells": self.spacing_cells,
        }


@dataclass
class EnvSpec:
    """Fully resolved declarative description of one task instance."""

    task: TaskKind
    robot: dict
    material: dict
    scene: list[SceneObject]
    gravity: tuple[float, float]
    a_max: float
    max_episode_steps: int
    substeps_per_step: int
    world: dict
    observation: dict
    reward_weights: dict
    target: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.max_episode_steps <= 0:
            raise ConfigError("max_episode_steps must be positive")
        if self.a_max <= 0:
            raise ConfigError("a_max must be positive")

    def world_config(self) -> WorldConfig:
        w = self.world
        return WorldConfig(
            n_grid=int(w.get("n_grid", 128)),
            dt=float(w.get("dt", 1e-4)),
            gravity=tuple(self.gravity),
            bound=int(w.get("bound", 1)),
            friction_coeff=float(w.get("friction_coeff", 0.5)),
            moving_grid=str(w.get("moving_grid", "off")),
            ground_height=(
                None if w.get("ground_height") is None else float(w["ground_height"])
            ),
            window_cells=w.get("window_cells"),
            dtype=str(w.get("dtype", "float64")),
        )

    def robot_material(self) -> MaterialParams:
        return material_from_dict(self.material)

    def to_dict(self) -> dict:
        return {
            "task": self.task.value,
            "robot": self.robot,
            "material": self.material,
            "scene": [s.to_dict() for s in self.scene],
            "gravity": list(self.gravity),
            "a_max": self.a_max,
            "max_episode_steps": self.max_episode_steps,
            "substeps_per_step": self.substeps_per_step,
            "world": self.world,
            "observation": self.observation,
            "reward_weights": self.reward_weights,
            "target": self.target,
        }

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def material_from_dict(d: dict) -> MaterialParams:
    ys = d.get("yield_stress", "inf")
    ys = math.inf if ys in ("inf", None) else float(ys)
    return MaterialParams.from_youngs(
        youngs_modulus=float(d.get("youngs_modulus", 1e4)),
        poisson_ratio=float(d.get("poisson_ratio", 0.2)),
        yield_stress=ys,
        p_mass=float(d.get("particle_mass", 2.0)),
        p_vol=float(d.get("particle_volume", 1.0)),
    )


def _deep_merge(base: dict, override: dict, path="") -> dict:
    """Merge ``override`` into ``base``; unknown keys are configuration errors."""
    out = dict(base)
    for key, val in override.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {here!r}")
        if isinstance(base[key], dict) and isinstance(val, dict):
            out[key] = _deep_merge(base[key], val, here)
        else:
            out[key] = val
    return out


def _load_yaml(task: TaskKind) -> dict:
    ref = resources.files("morphsim.envs").joinpath(f"configs/{task.value}.yaml")
    with ref.open("r") as fh:
        return yaml.safe_load(fh)


def load_spec(task: TaskKind | str, overrides: dict | None = None) -> EnvSpec:
    """Load a task's bundled config, apply overrides, and resolve an EnvSpec."""
    task = TaskKind(task)
    raw = _load_yaml(task)
    if overrides:
        # reward weights and target payloads accept new keys; everything else
        # must already exist in the bundled config
        raw = _merge_with_open_sections(raw, overrides)
    return spec_from_dict(raw)


_OPEN_SECTIONS = ("reward", "target")


def _merge_with_open_sections(base: dict, override: dict) -> dict:
    closed = {k: v for k, v in override.items() if k not in _OPEN_SECTIONS}
    out = _deep_merge(base, closed)
    for section in _OPEN_SECTIONS:
        if section in override:
            merged = dict(base.get(section) or {})
            merged.update(override[section] or {})
            out[section] = merged
    return out


def spec_from_dict(raw: dict) -> EnvSpec:
    try:
        task = TaskKind(raw["task"])
        scene = [
            SceneObject(
                kind=s["kind"],
                name=s.get("name", f"object_{i}"),
                geometry=s["geometry"],
                material=s.get("material"),
                boundary=s.get("boundary", "friction"),
                friction_coeff=s.get("friction_coeff"),
                spacing_cells=float(s.get("spacing_cells", 0.5)),
            )
            for i, s in enumerate(raw.get("scene") or [])
        ]
        weights = dict(raw.get("reward") or {})
        return EnvSpec(
            task=task,
            robot=dict(raw["robot"]),
            material=dict(raw["material"]),
            scene=scene,
            gravity=tuple(float(g) for g in raw.get("gravity", (0.0, 0.0))),
            a_max=float(raw["actuation"]["a_max"]),
            max_episode_steps=int(raw["episode"]["max_steps"]),
            substeps_per_step=int(raw["actuation"].get("substeps_per_step", 100)),
            world=dict(raw.get("world") or {}),
            observation=dict(raw.get("observation") or {}),
            reward_weights=dict(weights),
            target=dict(raw.get("target") or {}),
        )
    except KeyError as err:
        raise ConfigError(f"missing config key: {err}") from err
