"""Pydantic request/response models for the HTTP service.

Observations travel as base64-encoded little-endian float32, row-major
(64, 64, 3); actions as flat row-major float lists with a (resolution,
components) header, the same layout replay records use.
"""

from __future__ import annotations

import base64

import numpy as np
from pydantic import BaseModel, Field


class ActionModel(BaseModel):
    resolution: int
    components: int = 2
    data: list[float]

    def to_array(self) -> np.ndarray:
        n, c = self.resolution, self.components
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.size != n * n * c:
            raise ValueError(f"action data length {arr.size} != {n}*{n}*{c}")
        return arr.reshape(n, n, c)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ActionModel":
        return cls(
            resolution=int(arr.shape[0]),
            components=int(arr.shape[2]),
            data=[float(v) for v in arr.ravel(order="C")],
        )


class ObservationModel(BaseModel):
    shape: list[int]
    dtype: str = "float32"
    encoding: str = "base64/little-endian"
    data_b64: str
    window_origin: list[float]
    window_side: float

    @classmethod
    def from_image(cls, image) -> "ObservationModel":
        raw = np.ascontiguousarray(image.pixels, dtype="<f4")
        return cls(
            shape=list(raw.shape),
            data_b64=base64.b64encode(raw.tobytes()).decode("ascii"),
            window_origin=[float(v) for v in image.window_origin],
            window_side=float(image.window_side),
        )

    def to_array(self) -> np.ndarray:
        raw = np.frombuffer(base64.b64decode(self.data_b64), dtype="<f4")
        return raw.reshape(self.shape)


class CreateEnvRequest(BaseModel):
    task: str
    seed: int = 0
    overrides: dict | None = None


class EnvInfo(BaseModel):
    env_id: str
    task: str
    seed: int
    config_hash: str
    a_max: float
    n_robot_particles: int
    max_episode_steps: int
    action_resolutions: list[int] = Field(default_factory=lambda: [4, 8, 16, 64])
    step_count: int = 0


class ResetResponse(BaseModel):
    observation: ObservationModel
    info: dict


class StepRequest(BaseModel):
    action: ActionModel
    # normalized actions live in [-1, 1] and are scaled by a_max server-side
    normalized: bool = False


class StepResponse(BaseModel):
    observation: ObservationModel
    reward: float
    terminated: bool
    truncated: bool
    info: dict
    clipped: bool = False


class ReplayRequest(BaseModel):
    record: dict
    check_hash: bool = True


class ReplayResponse(BaseModel):
    rewards: list[float]
    episode_return: float
    length: int
    termination: str


class UpsampleRequest(BaseModel):
    action: ActionModel
    target: int


class HealthResponse(BaseModel):
    status: str
    engine_version: str
