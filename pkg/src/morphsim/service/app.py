"""FastAPI service wrapping the engine for long-running multi-client use."""

from __future__ import annotations

import threading
import uuid

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..actuation import ActionGrid, upsample
from ..envs import ALL_TASKS
from ..episode import EpisodeRecord, make_seeded_env, replay, run_episode, serialize_action
from ..errors import (
    ConfigError,
    InvalidDeformationError,
    MorphSimError,
    PhysicsDivergedError,
    StaleReplayError,
    WindowViolationError,
)
from .schemas import (
    ActionModel,
    CreateEnvRequest,
    EnvInfo,
    HealthResponse,
    ObservationModel,
    ReplayRequest,
    ReplayResponse,
    ResetResponse,
    StepRequest,
    StepResponse,
    UpsampleRequest,
)

_ABORTS = (PhysicsDivergedError, WindowViolationError, InvalidDeformationError)


class _Session:
    def __init__(self, env, seed):
        self.env = env
        self.seed = seed
        self.lock = threading.Lock()
        self.steps = []  # serialized (action, reward) pairs for record export
        self.last_obs = None

    def record(self) -> dict:
        total = sum(s["reward"] for s in self.steps)
        return {
            "header": {
                "format_version": 1,
                "task": self.env.task.value,
                "seed": self.seed,
                "overrides": getattr(self.env, "overrides", {}) or {},
                "config_hash": self.env.spec.config_hash(),
                "engine_version": __version__,
            },
            "steps": self.steps,
            "final": {
                "return": total,
                "length": len(self.steps),
                "termination": "in_progress",
            },
        }


def create_app() -> FastAPI:
    app = FastAPI(title="morphsim", version=__version__)
    sessions: dict[str, _Session] = {}
    registry_lock = threading.Lock()

    def get_session(env_id: str) -> _Session:
        with registry_lock:
            session = sessions.get(env_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no such env {env_id}")
        return session

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", engine_version=__version__)

    @app.get("/tasks")
    def tasks():
        return {"tasks": [t.value for t in ALL_TASKS]}

    @app.post("/envs", response_model=EnvInfo)
    def create_env(req: CreateEnvRequest):
        try:
            env = make_seeded_env(req.task, req.overrides, req.seed)
        except (ConfigError, ValueError) as err:
            raise HTTPException(status_code=422, detail=str(err))
        env_id = uuid.uuid4().hex[:12]
        session = _Session(env, req.seed)
        obs, _ = env.reset()
        session.last_obs = obs
        with registry_lock:
            sessions[env_id] = session
        return _env_info(env_id, session)

    def _env_info(env_id: str, session: _Session) -> EnvInfo:
        env = session.env
        return EnvInfo(
            env_id=env_id,
            task=env.task.value,
            seed=session.seed,
            config_hash=env.spec.config_hash(),
            a_max=env.spec.a_max,
            n_robot_particles=env.n_robot_particles,
            max_episode_steps=env.spec.max_episode_steps,
            step_count=len(session.steps),
        )

    @app.get("/envs/{env_id}", response_model=EnvInfo)
    def env_info(env_id: str):
        return _env_info(env_id, get_session(env_id))

    @app.post("/envs/{env_id}/reset", response_model=ResetResponse)
    def reset_env(env_id: str):
        session = get_session(env_id)
        with session.lock:
            obs, info = session.env.reset()
            session.steps = []
            session.last_obs = obs
            return ResetResponse(observation=ObservationModel.from_image(obs), info=info)

    @app.post("/envs/{env_id}/step", response_model=StepResponse)
    def step_env(env_id: str, req: StepRequest):
        session = get_session(env_id)
        with session.lock:
            try:
                arr = req.action.to_array()
            except ValueError as err:
                raise HTTPException(status_code=422, detail=str(err))
            clipped = False
            if req.normalized:
                if np.abs(arr).max() > 1.0:
                    clipped = True
                arr = np.clip(arr, -1.0, 1.0) * session.env.spec.a_max
            try:
                result = session.env.step(arr)
            except ConfigError as err:
                raise HTTPException(status_code=422, detail=str(err))
            except _ABORTS as err:
                raise HTTPException(
                    status_code=409,
                    detail={"error": "physics_aborted", "message": str(err)},
                )
            session.steps.append(
                {"action": serialize_action(arr), "reward": result.reward}
            )
            session.last_obs = result.observation
            return StepResponse(
                observation=ObservationModel.from_image(result.observation),
                reward=result.reward,
                terminated=result.terminated,
                truncated=result.truncated,
                info=result.info,
                clipped=clipped,
            )

    @app.get("/envs/{env_id}/record")
    def env_record(env_id: str):
        return get_session(env_id).record()

    @app.delete("/envs/{env_id}")
    def delete_env(env_id: str):
        with registry_lock:
            sessions.pop(env_id, None)
        return {"deleted": env_id}

    @app.post("/replay", response_model=ReplayResponse)
    def replay_record(req: ReplayRequest):
        try:
            record = EpisodeRecord(
                header=req.record["header"],
                steps=req.record["steps"],
                final=req.record.get("final", {}),
            )
            result = replay(record, check_hash=req.check_hash)
        except StaleReplayError as err:
            raise HTTPException(status_code=409, detail=str(err))
        except (KeyError, ConfigError, ValueError) as err:
            raise HTTPException(status_code=422, detail=str(err))
        return ReplayResponse(
            rewards=result.rewards(),
            episode_return=result.episode_return,
            length=result.length,
            termination=result.final["termination"],
        )

    @app.post("/actions/upsample", response_model=ActionModel)
    def upsample_action(req: UpsampleRequest):
        try:
            grid = ActionGrid(req.action.to_array())
            return ActionModel.from_array(upsample(grid, req.target).values)
        except (ConfigError, ValueError) as err:
            raise HTTPException(status_code=422, detail=str(err))

    return app
