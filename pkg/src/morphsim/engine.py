"""Public substep API: transfer cycle, moving window, diagnostics."""

from __future__ import annotations

import math
import os
import time as _time

import numpy as np

from . import kernels
from .errors import (
    InvalidDeformationError,
    InvalidStateError,
    PhysicsDivergedError,
    WindowViolationError,
)
from .materials import Role
from .world import SimState, WorldConfig

DIAGNOSTICS_DIR_ENV = "MORPHSIM_DIAGNOSTICS_DIR"


def bspline_weights(xp, dx: float, grid_offset=(0, 0), cells: int | None = None):
    """Quadratic B-spline stencil for position ``xp`` on the active window.

    Returns (base, weights): ``base`` is the 2-vector of lowest stencil node
    indices (window-local), ``weights`` the 3x3 tensor-product weights.
    """
    xp = np.asarray(xp, dtype=np.float64)
    inv_dx = 1.0 / dx
    xi = xp[0] * inv_dx - grid_offset[0]
    yi = xp[1] * inv_dx - grid_offset[1]
    if cells is not None:
        if not (0.5 <= xi < cells - 1.5 and 0.5 <= yi < cells - 1.5):
            raise WindowViolationError(
                f"position {xp.tolist()} outside the active grid window", position=xp
            )
    base = np.array([math.floor(xi - 0.5), math.floor(yi - 0.5)], dtype=np.int64)
    fx = xi - base[0]
    fy = yi - base[1]
    wx = np.array([0.5 * (1.5 - fx) ** 2, 0.75 - (fx - 1.0) ** 2, 0.5 * (fx - 0.5) ** 2])
    wy = np.array([0.5 * (1.5 - fy) ** 2, 0.75 - (fy - 1.0) ** 2, 0.5 * (fy - 0.5) ** 2])
    return base, np.outer(wx, wy)


def _full_actuation(state: SimState, robot_actions) -> np.ndarray:
    """Expand a robot-sized action list to a per-particle array (zeros elsewhere)."""
    n = state.n_particles
    act = np.zeros((n, 2), dtype=state.x.dtype)
    robot = state.role == Role.ROBOT
    n_robot = int(np.count_nonzero(robot))
    if robot_actions is None:
        return act
    robot_actions = np.asarray(robot_actions, dtype=state.x.dtype)
    if robot_actions.shape == (n, 2) and n_robot != n:
        # already full-length (e.g. straight from distribute_to_particles)
        act[:] = robot_actions
        act[~robot] = 0.0
        return act
    if robot_actions.shape != (n_robot, 2):
        raise InvalidStateError(
            f"expected actions for {n_robot} robot particles, got shape {robot_actions.shape}"
        )
    act[robot] = robot_actions
    return act


def dump_diagnostics(state: SimState, reason: str, substep: int, particle: int) -> str:
    """Write one text record per particle; returns the dump path.

    Record format (documented for tooling):
    ``p=<index> role=<role> x=<x>,<y> v=<vx>,<vy> F=<f00>,<f01>,<f10>,<f11>``
    """
    directory = os.environ.get(DIAGNOSTICS_DIR_ENV, os.getcwd())
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(
        directory, f"morphsim_diag_{int(_time.time())}_{state.substep_count}.txt"
    )
    with open(path, "w") as fh:
        fh.write(f"# reason={reason} substep={substep} offending_particle={particle}\n")
        fh.write(f"# grid_offset={state.grid_offset.tolist()} time={state.time}\n")
        for p in range(state.n_particles):
            f = state.F[p]
            fh.write(
                f"p={p} role={int(state.role[p])} "
                f"x={state.x[p, 0]!r},{state.x[p, 1]!r} "
                f"v={state.v[p, 0]!r},{state.v[p, 1]!r} "
                f"F={f[0, 0]!r},{f[0, 1]!r},{f[1, 0]!r},{f[1, 1]!r}\n"
            )
    return path


def run_substeps(state: SimState, robot_actions, cfg: WorldConfig, n_substeps: int) -> SimState:
    """Advance ``state`` in place by ``n_substeps`` with the action held fixed."""
    act = _full_actuation(state, robot_actions)
    cells = cfg.cells
    dtype = state.x.dtype
    grid_m = np.zeros((cells, cells), dtype=dtype)
    grid_v = np.zeros((cells, cells, 2), dtype=dtype)
    ground = cfg.ground_height is not None
    status, particle, done = kernels.run_substeps_kernel(
        n_substeps,
        state.x,
        state.v,
        state.F,
        state.C,
        act,
        state.mat_id,
        state.material_table(),
        grid_m,
        grid_v,
        int(state.grid_offset[0]),
        int(state.grid_offset[1]),
        cfg.inv_dx,
        cfg.dx,
        cfg.dt,
        float(cfg.gravity[0]),
        float(cfg.gravity[1]),
        cfg.bound,
        cells,
        ground,
        float(cfg.ground_height) if ground else 0.0,
        cfg.friction_coeff,
        state.obstacles,
    )
    state.substep_count += done
    state.time = state.substep_count * cfg.dt
    if status == kernels.STATUS_OK:
        # exposed for conservation checks: grid mass after the last P2G
        state.last_grid_mass = float(grid_m.sum())
        return state
    at = state.substep_count + 1
    if status == kernels.STATUS_WINDOW:
        raise WindowViolationError(
            f"particle {particle} left the grid window at substep {at} "
            f"(position {state.x[particle].tolist()})",
            particle=particle,
            position=state.x[particle].copy(),
            substep=at,
        )
    path = dump_diagnostics(
        state,
        "invalid-deformation" if status == kernels.STATUS_BAD_F else "non-finite-state",
        at,
        particle,
    )
    if status == kernels.STATUS_BAD_F:
        raise InvalidDeformationError(
            f"particle {particle} reached det(F) <= 0 at substep {at}; diagnostics: {path}"
        )
    raise PhysicsDivergedError(
        f"non-finite state at particle {particle}, substep {at}; diagnostics: {path}",
        particle=particle,
        substep=at,
        dump_path=path,
    )


def substep(state: SimState, robot_actions, cfg: WorldConfig) -> SimState:
    """One full transfer cycle; equivalent to ``run_substeps(..., 1)``."""
    return run_substeps(state, robot_actions, cfg, 1)


def robot_center_of_mass(state: SimState) -> np.ndarray:
    """Mass-weighted mean position of the robot particles."""
    robot = state.role == Role.ROBOT
    if not robot.any():
        raise InvalidStateError("state has no robot particles")
    masses = state.particle_mass()[robot]
    total = masses.sum()
    return (state.x[robot] * masses[:, None]).sum(axis=0) / total


def recenter_window(state: SimState, cfg: WorldConfig) -> SimState:
    """Shift the window origin by whole cells so the robot COM sits centrally.

    World-frame particle data is untouched; only ``grid_offset`` changes.
    """
    if cfg.moving_grid == "off":
        return state
    com = robot_center_of_mass(state)
    half = cfg.cells / 2.0
    if "x" in cfg.moving_grid:
        center = (state.grid_offset[0] + half) * cfg.dx
        state.grid_offset[0] += int(round((com[0] - center) * cfg.inv_dx))
    if "y" in cfg.moving_grid:
        center = (state.grid_offset[1] + half) * cfg.dx
        state.grid_offset[1] += int(round((com[1] - center) * cfg.inv_dx))
    return state
