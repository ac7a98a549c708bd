"""The muscle-field action stack.

Discrete action grids live on a square window; node (i, j) of an n-grid
sits at window coordinate ((i+0.5) side/n, (j+0.5) side/n). Catmull-Rom
interpolation turns a grid into a continuous field (clamp-to-edge beyond
the border nodes), upsampling re-samples that field on a finer lattice,
and the gated blend composes a coarse grid with a double-resolution
residual. The final 64-grid is gathered onto robot particles with the same
quadratic B-spline stencil the MPM transfer uses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .kernels import distribute_kernel
from .world import SimState

SUPPORTED_RESOLUTIONS = (4, 8, 16, 64)
FIELD_RESOLUTION = 64


@dataclass
class ActionGrid:
    """n x n x 2 actuation tensor covering a square world region."""

    values: np.ndarray
    window_origin: np.ndarray = field(default_factory=lambda: np.zeros(2))
    window_side: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 3 or self.values.shape[2] != 2:
            raise ConfigError(f"action grid must be (n, n, 2), got {self.values.shape}")
        if self.values.shape[0] != self.values.shape[1]:
            raise ConfigError("action grid must be square")
        if self.values.shape[0] not in SUPPORTED_RESOLUTIONS:
            raise ConfigError(
                f"unsupported action resolution {self.values.shape[0]}; "
                f"expected one of {SUPPORTED_RESOLUTIONS}"
            )
        self.window_origin = np.asarray(self.window_origin, dtype=np.float64)

    @property
    def resolution(self) -> int:
        return self.values.shape[0]

    def with_window(self, origin, side) -> "ActionGrid":
        return ActionGrid(self.values, np.asarray(origin, dtype=np.float64), float(side))


@dataclass
class GateMask:
    """n x n blend mask with entries strictly inside (0, 1) (sigmoid range)."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ConfigError(f"gate mask must be square 2-D, got {self.values.shape}")
        if not (np.all(self.values > 0.0) and np.all(self.values < 1.0)):
            raise ConfigError("gate mask entries must lie strictly inside (0, 1)")

    @property
    def resolution(self) -> int:
        return self.values.shape[0]


def _catmull_rom_weights(t: np.ndarray) -> np.ndarray:
    """Weights for samples at offsets (-1, 0, 1, 2), t in [0, 1]; rows sum to 1."""
    t2 = t * t
    t3 = t2 * t
    return np.stack(
        [
            -0.5 * t + t2 - 0.5 * t3,
            1.0 - 2.5 * t2 + 1.5 * t3,
            0.5 * t + 2.0 * t2 - 1.5 * t3,
            -0.5 * t2 + 0.5 * t3,
        ],
        axis=-1,
    )


def _sample_axis(u: np.ndarray, n: int):
    """Cell-center coordinates -> (4 clamped indices, 4 weights) per sample."""
    u = np.clip(u, 0.0, float(n - 1))
    i0 = np.floor(u).astype(np.int64)
    i0 = np.minimum(i0, n - 2) if n > 1 else np.zeros_like(i0)
    t = u - i0
    idx = np.stack([i0 - 1, i0, i0 + 1, i0 + 2], axis=-1)
    np.clip(idx, 0, n - 1, out=idx)
    return idx, _catmull_rom_weights(t)


def bicubic_sample(grid: ActionGrid, uv) -> np.ndarray:
    """Evaluate the continuous field at window coordinates ``uv``.

    ``uv`` is a 2-vector or an (M, 2) batch in [0, side]^2; coordinates
    outside the window clamp to the border (documented behaviour, not an
    error). Exact at node coordinates and on affine data away from the
    clamped border band.
    """
    uv = np.asarray(uv, dtype=np.float64)
    single = uv.ndim == 1
    pts = np.atleast_2d(uv)
    n = grid.resolution
    h = grid.window_side / n
    u = pts[:, 0] / h - 0.5
    v = pts[:, 1] / h - 0.5
    ix, wx = _sample_axis(u, n)
    iy, wy = _sample_axis(v, n)
    # gather the 4x4 neighbourhood: (M, 4, 4, 2)
    neigh = grid.values[ix[:, :, None], iy[:, None, :], :]
    out = np.einsum("mi,mj,mijc->mc", wx, wy, neigh)
    return out[0] if single else out


_UPSAMPLE_MATRICES: dict[tuple[int, int], np.ndarray] = {}


def _upsample_matrix(n: int, target: int) -> np.ndarray:
    """(target, n) map applying the 1-D Catmull-Rom stencil at fine cell centers."""
    key = (n, target)
    mat = _UPSAMPLE_MATRICES.get(key)
    if mat is None:
        u = (np.arange(target) + 0.5) * n / target - 0.5
        idx, w = _sample_axis(u, n)
        mat = np.zeros((target, n))
        for k in range(4):
            np.add.at(mat, (np.arange(target), idx[:, k]), w[:, k])
        _UPSAMPLE_MATRICES[key] = mat
    return mat


def upsample(grid: ActionGrid, target: int) -> ActionGrid:
    """Resample onto a ``target`` x ``target`` lattice over the same window."""
    n = grid.resolution
    if target not in SUPPORTED_RESOLUTIONS:
        raise ConfigError(f"unsupported target resolution {target}")
    if target < n:
        raise ConfigError(f"cannot upsample {n} down to {target}")
    if target == n:
        return ActionGrid(grid.values.copy(), grid.window_origin.copy(), grid.window_side)
    w = _upsample_matrix(n, target)
    vals = np.einsum("ai,bj,ijc->abc", w, w, grid.values, optimize=True)
    return ActionGrid(vals, grid.window_origin.copy(), grid.window_side)


def compose_coarse_fine(coarse: ActionGrid, residual: ActionGrid, mask, a_max: float = 1.0) -> ActionGrid:
    """Gated blend: mask * residual + (1 - mask) * upsampled coarse, clamped.

    ``mask`` may be a GateMask or a plain array with entries in [0, 1]; the
    residual must run at exactly twice the coarse resolution and the mask at
    the residual's resolution.
    """
    if residual.resolution != 2 * coarse.resolution:
        raise ConfigError(
            f"residual resolution {residual.resolution} must be twice the "
            f"coarse resolution {coarse.resolution}"
        )
    m = mask.values if isinstance(mask, GateMask) else np.asarray(mask, dtype=np.float64)
    if m.shape != (residual.resolution, residual.resolution):
        raise ConfigError(
            f"mask shape {m.shape} must match residual resolution {residual.resolution}"
        )
    if m.min() < 0.0 or m.max() > 1.0:
        raise ConfigError("mask entries must lie in [0, 1]")
    up = upsample(coarse, residual.resolution)
    blended = m[:, :, None] * residual.values + (1.0 - m)[:, :, None] * up.values
    np.clip(blended, -a_max, a_max, out=blended)
    return ActionGrid(blended, coarse.window_origin.copy(), coarse.window_side)


def clamp_action(grid: ActionGrid, a_max: float) -> ActionGrid:
    """Clip every component into [-a_max, a_max]."""
    return ActionGrid(
        np.clip(grid.values, -a_max, a_max), grid.window_origin.copy(), grid.window_side
    )


def distribute_to_particles(grid: ActionGrid, state: SimState) -> np.ndarray:
    """B-spline-weighted gather of a 64-grid onto particles.

    Returns an (N, 2) array: robot particles read the field at their
    position (clamped to the border outside the window), every other role
    gets zero.
    """
    if grid.resolution != FIELD_RESOLUTION:
        raise ConfigError(
            f"distribution expects the {FIELD_RESOLUTION}-node field, got {grid.resolution}"
        )
    out = np.empty((state.n_particles, 2), dtype=np.float64)
    h = grid.window_side / grid.resolution
    distribute_kernel(
        np.ascontiguousarray(grid.values),
        state.x,
        state.role,
        float(grid.window_origin[0]),
        float(grid.window_origin[1]),
        h,
        out,
    )
    return out
