"""Scene construction: particle sampling and state assembly."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..materials import MaterialParams, Role
from ..world import OBSTACLE_FRICTION, OBSTACLE_STICKY, SimState, make_state
from .spec import EnvSpec, material_from_dict


def lattice_circle(center, radius, spacing) -> np.ndarray:
    k = int(np.ceil(radius / spacing))
    axis = np.arange(-k, k + 1) * spacing
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
    pts = pts[(pts**2).sum(axis=1) <= radius * radius]
    return pts + np.asarray(center, dtype=np.float64)


def lattice_rect(lo, hi, spacing) -> np.ndarray:
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    nx = max(1, int(round((hi[0] - lo[0]) / spacing)))
    ny = max(1, int(round((hi[1] - lo[1]) / spacing)))
    xs = lo[0] + (np.arange(nx) + 0.5) * (hi[0] - lo[0]) / nx
    ys = lo[1] + (np.arange(ny) + 0.5) * (hi[1] - lo[1]) / ny
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    return np.stack([xx.ravel(), yy.ravel()], axis=1)


def sample_geometry(geometry: dict, spacing: float) -> np.ndarray:
    kind = geometry.get("type")
    if kind == "circle":
        return lattice_circle(geometry["center"], float(geometry["radius"]), spacing)
    if kind == "rect":
        return lattice_rect(geometry["min"], geometry["max"], spacing)
    raise ConfigError(f"unknown geometry type {geometry.get('type')!r}")


def robot_particles(spec: EnvSpec, dx: float, rng: np.random.Generator) -> np.ndarray:
    robot = spec.robot
    spacing = dx * float(robot.get("spacing_cells", 0.5))
    shape = robot.get("shape", "circle")
    if shape == "circle":
        pts = lattice_circle(robot["center"], float(robot["radius"]), spacing)
    elif shape == "square":
        size = robot.get("size", [0.12, 0.12])
        center = np.asarray(robot["center"], dtype=np.float64)
        half = 0.5 * np.asarray(size, dtype=np.float64)
        pts = lattice_rect(center - half, center + half, spacing)
    else:
        raise ConfigError(f"unknown robot shape {shape!r}")
    jitter = float(robot.get("jitter", 0.0))
    if jitter > 0.0:
        pts = pts + rng.uniform(-jitter, jitter, size=pts.shape) * spacing
    return pts


def build_scene(spec: EnvSpec, seed: int = 0):
    """Assemble the initial SimState for a task.

    Returns (state, body_slices): robot particles occupy the leading slots,
    then each particle-bearing scene object in declaration order;
    ``body_slices`` maps object names to their index ranges.
    """
    cfg = spec.world_config()
    rng = np.random.default_rng(seed)

    chunks = [robot_particles(spec, cfg.dx, rng)]
    roles = [np.full(len(chunks[0]), Role.ROBOT, dtype=int)]
    mat_ids = [np.zeros(len(chunks[0]), dtype=int)]
    materials: list[MaterialParams] = [spec.robot_material()]
    body_slices: dict[str, slice] = {"robot": slice(0, len(chunks[0]))}
    obstacles = []
    cursor = len(chunks[0])

    for obj in spec.scene:
        if obj.kind == "static_obstacle":
            g = obj.geometry
            if g.get("type") != "rect":
                raise ConfigError("static obstacles must be rects")
            mode = OBSTACLE_STICKY if obj.boundary == "sticky" else OBSTACLE_FRICTION
            coeff = (
                spec.world.get("friction_coeff", 0.5)
                if obj.friction_coeff is None
                else obj.friction_coeff
            )
            obstacles.append(
                [g["min"][0], g["max"][0], g["min"][1], g["max"][1], float(mode), float(coeff)]
            )
            continue
        if obj.kind == "target_marker":
            continue
        pts = sample_geometry(obj.geometry, cfg.dx * obj.spacing_cells)
        role = Role.SOIL if obj.kind == "soil_region" else Role.PASSIVE
        if obj.material is None:
            raise ConfigError(f"scene object {obj.name!r} needs a material")
        materials.append(material_from_dict(obj.material))
        chunks.append(pts)
        roles.append(np.full(len(pts), role, dtype=int))
        mat_ids.append(np.full(len(pts), len(materials) - 1, dtype=int))
        body_slices[obj.name] = slice(cursor, cursor + len(pts))
        cursor += len(pts)

    state = make_state(
        np.concatenate(chunks, axis=0),
        np.concatenate(roles),
        np.concatenate(mat_ids),
        materials,
        obstacles=obstacles if obstacles else None,
        dtype=cfg.np_dtype,
    )
    min_robot = int(spec.robot.get("min_particles", 500))
    if body_slices["robot"].stop < min_robot:
        raise ConfigError(
            f"robot sampling produced {body_slices['robot'].stop} particles, "
            f"fewer than the required {min_robot}"
        )
    return state, body_slices
