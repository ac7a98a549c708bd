"""Episode orchestration: seeding, recording, replay, JSON-lines summaries.

The record file is plain JSON so any client of the service can produce or
consume it. Actions serialize as flat row-major float lists with a
(resolution, components) header; replays are bound to the exact resolved
task configuration through a content hash.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .envs import Environment, make_env
from .errors import (
    InvalidDeformationError,
    MorphSimError,
    PhysicsDivergedError,
    StaleReplayError,
    WindowViolationError,
)

FORMAT_VERSION = 1
_ABORT_ERRORS = (PhysicsDivergedError, WindowViolationError, InvalidDeformationError)


def split_seed(master_seed: int) -> tuple[int, int]:
    """Derive independent (scene, controller) seeds from one master seed.

    Controller stochasticity must never perturb scene construction, so both
    streams come from a counter-based split of the master.
    """
    ss = np.random.SeedSequence(master_seed)
    scene, controller = ss.spawn(2)
    return int(scene.generate_state(1)[0]), int(controller.generate_state(1)[0])


def make_seeded_env(task, overrides: dict | None, master_seed: int) -> Environment:
    """Build an env from a master seed (scene part of the split)."""
    scene_seed, _ = split_seed(master_seed)
    env = make_env(task, overrides, seed=scene_seed)
    env.master_seed = int(master_seed)
    env.overrides = overrides or {}
    return env


def controller_seed(master_seed: int) -> int:
    return split_seed(master_seed)[1]


def serialize_action(values: np.ndarray) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    return {
        "resolution": arr.shape[0],
        "components": arr.shape[2],
        "data": [float(v) for v in arr.ravel(order="C")],
    }


def deserialize_action(blob: dict) -> np.ndarray:
    n = int(blob["resolution"])
    c = int(blob["components"])
    return np.asarray(blob["data"], dtype=np.float64).reshape(n, n, c)


@dataclass
class EpisodeRecord:
    header: dict
    steps: list = field(default_factory=list)
    final: dict = field(default_factory=dict)

    @property
    def episode_return(self) -> float:
        return float(self.final.get("return", 0.0))

    @property
    def length(self) -> int:
        return int(self.final.get("length", len(self.steps)))

    def actions(self) -> list[np.ndarray]:
        return [deserialize_action(s["action"]) for s in self.steps]

    def rewards(self) -> list[float]:
        return [float(s["reward"]) for s in self.steps]

    def to_json(self) -> str:
        return json.dumps(
            {"header": self.header, "steps": self.steps, "final": self.final}
        )

    @classmethod
    def from_json(cls, text: str) -> "EpisodeRecord":
        raw = json.loads(text)
        return cls(header=raw["header"], steps=raw["steps"], final=raw["final"])

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path: str) -> "EpisodeRecord":
        with open(path) as fh:
            return cls.from_json(fh.read())


def _make_header(env: Environment, master_seed: int | None) -> dict:
    if master_seed is None:
        master_seed = getattr(env, "master_seed", env.seed)
    return {
        "format_version": FORMAT_VERSION,
        "task": env.task.value,
        "seed": int(master_seed),
        "overrides": getattr(env, "overrides", {}) or {},
        "config_hash": env.spec.config_hash(),
        "engine_version": __version__,
    }


def run_episode(
    env: Environment,
    controller,
    max_steps: int | None = None,
    master_seed: int | None = None,
    jsonl_stream=None,
) -> EpisodeRecord:
    """Roll one episode and return a replayable record.

    A physics abort is recorded (termination "aborted") rather than raised;
    the record keeps every completed step.
    """
    obs, _ = env.reset()
    if hasattr(controller, "reset"):
        controller.reset()
    horizon = env.spec.max_episode_steps if max_steps is None else int(max_steps)
    record = EpisodeRecord(header=_make_header(env, master_seed))
    total = 0.0
    termination = "truncated"
    steps_done = 0
    for t in range(horizon):
        action = controller.act(obs, t)
        try:
            result = env.step(action)
        except _ABORT_ERRORS as err:
            termination = "aborted"
            record.final["abort_reason"] = f"{type(err).__name__}: {err}"
            break
        record.steps.append(
            {"action": serialize_action(np.asarray(action, dtype=np.float64)), "reward": result.reward}
        )
        total += result.reward
        steps_done += 1
        obs = result.observation
        if result.terminated:
            termination = "terminated"
            break
        if result.truncated:
            termination = "truncated"
            break
    record.final.update(
        {"return": total, "length": steps_done, "termination": termination}
    )
    if jsonl_stream is not None:
        jsonl_stream.write(
            json.dumps(
                {
                    "event": "episode",
                    "task": record.header["task"],
                    "seed": record.header["seed"],
                    "return": total,
                    "length": steps_done,
                    "termination": termination,
                }
            )
            + "\n"
        )
        jsonl_stream.flush()
    return record


class _ReplayController:
    def __init__(self, actions):
        self._actions = actions

    def act(self, obs, t):
        return self._actions[t]


def replay(record: EpisodeRecord, check_hash: bool = True) -> EpisodeRecord:
    """Re-run a record's actions through a freshly built env.

    Raises StaleReplayError when the record's config hash does not match the
    current build's resolved task configuration.
    """
    header = record.header
    env = make_seeded_env(header["task"], header.get("overrides") or None, header["seed"])
    current = env.spec.config_hash()
    if check_hash and header["config_hash"] != current:
        raise StaleReplayError(
            f"record config hash {header['config_hash'][:12]} does not match "
            f"current build {current[:12]}"
        )
    actions = record.actions()
    return run_episode(
        env,
        _ReplayController(actions),
        max_steps=len(actions),
        master_seed=header["seed"],
    )


def replay_path(path: str, check_hash: bool = True) -> EpisodeRecord:
    return replay(EpisodeRecord.load(path), check_hash=check_hash)
