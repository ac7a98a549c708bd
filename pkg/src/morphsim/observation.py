"""Rasterized occupancy/velocity observations around the robot's COM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import robot_center_of_mass
from .materials import Role
from .world import SimState

IMAGE_RESOLUTION = 64

# channel 0 intensity bands: scene objects occupy (0, 0.5], the robot (0.5, 1]
ROBOT_BAND_OFFSET = 0.5
ROBOT_BAND_SCALE = 0.5
SCENE_BAND_SCALE = 0.5

center_of_mass = robot_center_of_mass


@dataclass
class ObservationImage:
    """64 x 64 x 3 image: occupancy plus clipped mean-velocity channels.

    ``pixels[i, j]`` covers the world cell with lower corner
    ``window_origin + (i, j) * (window_side / 64)``; channel 0 is occupancy
    in [0, 1], channels 1 and 2 the scaled robot velocity in [-1, 1].
    """

    pixels: np.ndarray
    window_origin: np.ndarray
    window_side: float

    @property
    def occupancy(self) -> np.ndarray:
        return self.pixels[:, :, 0]

    def robot_bitmap(self) -> np.ndarray:
        """Boolean mask of pixels carrying robot material."""
        return self.pixels[:, :, 0] > ROBOT_BAND_OFFSET


def rasterize(
    state: SimState,
    window_side: float = 0.5,
    saturation_count: int = 4,
    velocity_scale: float = 1.0,
    origin=None,
) -> ObservationImage:
    """Bin particles into the COM-centred square window.

    Robot pixels map particle density into the upper intensity band and
    carry the mean robot velocity (scaled, clipped to [-1, 1]); scene
    particles render into the lower band with zero velocity. Pixels without
    any particle are zero everywhere.
    """
    res = IMAGE_RESOLUTION
    if origin is None:
        origin = center_of_mass(state) - 0.5 * window_side
    origin = np.asarray(origin, dtype=np.float64)
    pix = res / window_side

    idx = np.floor((state.x - origin) * pix).astype(np.int64)
    inside = (idx[:, 0] >= 0) & (idx[:, 0] < res) & (idx[:, 1] >= 0) & (idx[:, 1] < res)
    robot = state.role == Role.ROBOT

    robot_in = inside & robot
    scene_in = inside & ~robot
    flat_robot = idx[robot_in, 0] * res + idx[robot_in, 1]
    flat_scene = idx[scene_in, 0] * res + idx[scene_in, 1]

    robot_count = np.bincount(flat_robot, minlength=res * res).reshape(res, res)
    scene_count = np.bincount(flat_scene, minlength=res * res).reshape(res, res)
    vx = np.bincount(flat_robot, weights=state.v[robot_in, 0], minlength=res * res)
    vy = np.bincount(flat_robot, weights=state.v[robot_in, 1], minlength=res * res)

    pixels = np.zeros((res, res, 3), dtype=np.float64)
    robot_mask = robot_count > 0
    scene_mask = (scene_count > 0) & ~robot_mask
    occ_robot = np.minimum(1.0, robot_count / saturation_count)
    occ_scene = np.minimum(1.0, scene_count / saturation_count)
    pixels[:, :, 0] = np.where(
        robot_mask,
        ROBOT_BAND_OFFSET + ROBOT_BAND_SCALE * occ_robot,
        np.where(scene_mask, SCENE_BAND_SCALE * occ_scene, 0.0),
    )

    counts = robot_count.reshape(-1).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_vx = np.where(counts > 0, vx / np.maximum(counts, 1), 0.0).reshape(res, res)
        mean_vy = np.where(counts > 0, vy / np.maximum(counts, 1), 0.0).reshape(res, res)
    pixels[:, :, 1] = np.clip(mean_vx * velocity_scale, -1.0, 1.0)
    pixels[:, :, 2] = np.clip(mean_vy * velocity_scale, -1.0, 1.0)

    return ObservationImage(pixels=pixels, window_origin=origin, window_side=window_side)
