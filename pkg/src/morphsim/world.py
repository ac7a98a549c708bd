"""World configuration and the particle/grid simulation state."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, InvalidStateError
from .materials import MaterialParams, Role

MOVING_GRID_MODES = ("off", "x", "y", "xy")

# Static obstacle boundary modes.
OBSTACLE_STICKY = 0
OBSTACLE_FRICTION = 1


@dataclass(frozen=True)
class WorldConfig:
    """Grid and integration constants.

    The cell size is tied to ``n_grid`` (dx = 1/n_grid); ``window_cells``
    widens the active window without changing dx and defaults to ``n_grid``.
    ``ground_height`` enables a friction floor at that world height; set to
    None for free space (walls only). ``moving_grid`` selects which axes the
    window recenters along.
    """

    n_grid: int = 128
    dt: float = 1e-4
    gravity: tuple[float, float] = (0.0, 0.0)
    bound: int = 1
    friction_coeff: float = 0.5
    moving_grid: str = "off"
    ground_height: float | None = None
    window_cells: int | None = None
    dtype: str = "float64"

    def __post_init__(self):
        if self.n_grid < 8:
            raise ConfigError(f"n_grid must be >= 8, got {self.n_grid}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.bound < 1:
            raise ConfigError(f"bound must be >= 1, got {self.bound}")
        if self.moving_grid not in MOVING_GRID_MODES:
            raise ConfigError(f"moving_grid must be one of {MOVING_GRID_MODES}")
        if self.dtype not in ("float64", "float32"):
            raise ConfigError(f"dtype must be float64 or float32, got {self.dtype}")
        if self.window_cells is not None and self.window_cells < self.n_grid // 2:
            raise ConfigError("window_cells too small for the chosen n_grid")

    @property
    def dx(self) -> float:
        return 1.0 / self.n_grid

    @property
    def inv_dx(self) -> float:
        return float(self.n_grid)

    @property
    def cells(self) -> int:
        return self.window_cells if self.window_cells is not None else self.n_grid

    @property
    def np_dtype(self):
        return np.float64 if self.dtype == "float64" else np.float32

    def with_overrides(self, **kwargs) -> "WorldConfig":
        return replace(self, **kwargs)


@dataclass
class SimState:
    """Full particle state plus the moving-window origin.

    Particle arrays are structure-of-arrays; robot particles occupy the
    leading ``n_robot`` slots (scene builders guarantee this ordering).
    Positions are world-frame; ``grid_offset`` only selects which cells the
    grid covers, so recentering never touches particle data.

    ``obstacles`` is a packed (K, 6) float array of static colliders:
    (xmin, xmax, ymin, ymax, mode, friction_coeff) in world units.
    """

    x: np.ndarray          # (N, 2) positions
    v: np.ndarray          # (N, 2) velocities
    F: np.ndarray          # (N, 2, 2) deformation gradients
    C: np.ndarray          # (N, 2, 2) affine velocity matrices
    role: np.ndarray       # (N,) uint8 Role values
    mat_id: np.ndarray     # (N,) int32 index into materials
    materials: list[MaterialParams]
    grid_offset: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=np.int64))
    time: float = 0.0
    substep_count: int = 0
    obstacles: np.ndarray = field(default_factory=lambda: np.zeros((0, 6), dtype=np.float64))

    def __post_init__(self):
        n = self.x.shape[0]
        if self.v.shape != (n, 2) or self.F.shape != (n, 2, 2) or self.C.shape != (n, 2, 2):
            raise InvalidStateError("particle array shapes disagree")
        if self.role.shape != (n,) or self.mat_id.shape != (n,):
            raise InvalidStateError("role/material arrays must be 1-D of length N")
        if self.mat_id.size and int(self.mat_id.max()) >= len(self.materials):
            raise InvalidStateError("mat_id references a missing material")

    @property
    def n_particles(self) -> int:
        return self.x.shape[0]

    @property
    def n_robot(self) -> int:
        return int(np.count_nonzero(self.role == Role.ROBOT))

    def material_table(self) -> np.ndarray:
        """Packed (M, 5) table: mu, lambda, yield_stress, p_mass, p_vol."""
        table = np.empty((len(self.materials), 5), dtype=np.float64)
        for i, m in enumerate(self.materials):
            table[i] = (m.mu, m.lam, m.yield_stress, m.p_mass, m.p_vol)
        return table

    def particle_mass(self) -> np.ndarray:
        table = self.material_table()
        return table[self.mat_id, 3]

    def total_mass(self) -> float:
        return float(self.particle_mass().sum())

    def copy(self) -> "SimState":
        return SimState(
            x=self.x.copy(),
            v=self.v.copy(),
            F=self.F.copy(),
            C=self.C.copy(),
            role=self.role.copy(),
            mat_id=self.mat_id.copy(),
            materials=list(self.materials),
            grid_offset=self.grid_offset.copy(),
            time=self.time,
            substep_count=self.substep_count,
            obstacles=self.obstacles.copy(),
        )


def make_state(
    positions,
    roles,
    mat_ids,
    materials,
    obstacles=None,
    dtype=np.float64,
) -> SimState:
    """Assemble a fresh state: zero velocity, identity F, zero C."""
    x = np.array(positions, dtype=dtype, order="C", copy=True)
    n = x.shape[0]
    f = np.zeros((n, 2, 2), dtype=dtype)
    f[:, 0, 0] = 1.0
    f[:, 1, 1] = 1.0
    state = SimState(
        x=x,
        v=np.zeros((n, 2), dtype=dtype),
        F=f,
        C=np.zeros((n, 2, 2), dtype=dtype),
        role=np.asarray(roles, dtype=np.uint8),
        mat_id=np.asarray(mat_ids, dtype=np.int32),
        materials=list(materials),
        obstacles=(
            np.ascontiguousarray(obstacles, dtype=np.float64)
            if obstacles is not None and len(obstacles)
            else np.zeros((0, 6), dtype=np.float64)
        ),
    )
    return state
