"""Quick physics invariant suite behind the `validate` CLI command."""

from __future__ import annotations

import numpy as np

from . import engine
from .actuation import ActionGrid, GateMask, compose_coarse_fine, upsample
from .linalg import svd_2x2
from .materials import MaterialParams
from .world import WorldConfig, make_state


def _blob(n, seed=0, yield_stress=10.0):
    spacing = (1.0 / 128) / 2
    side = int(np.ceil(np.sqrt(n)))
    axis = (np.arange(side) - (side - 1) / 2) * spacing
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([xx.ravel(), yy.ravel()], axis=1)[:n] + 0.5
    rng = np.random.default_rng(seed)
    pts += rng.uniform(-0.05, 0.05, pts.shape) * spacing
    mat = MaterialParams.from_youngs(1e4, 0.2, yield_stress=yield_stress)
    return make_state(pts, np.zeros(len(pts), dtype=int), np.zeros(len(pts), dtype=int), [mat])


def _check_svd_reconstruction():
    rng = np.random.default_rng(0)
    worst = 0.0
    count = 0
    while count < 10_000:
        m = rng.normal(size=(2, 2))
        if np.linalg.det(m) <= 0:
            continue
        count += 1
        u, s, v = svd_2x2(m)
        worst = max(worst, float(np.abs((u * s) @ v.T - m).max()))
    return worst < 1e-8, f"worst reconstruction error {worst:.2e} (limit 1e-8)"


def _check_mass_conservation():
    cfg = WorldConfig()
    state = _blob(1000)
    total = state.total_mass()
    worst = 0.0
    for _ in range(100):
        engine.substep(state, np.zeros((1000, 2)), cfg)
        worst = max(worst, abs(state.last_grid_mass - total))
    return worst < 1e-9, f"worst |grid mass - particle mass| {worst:.2e} (limit 1e-9)"


def _check_momentum():
    cfg = WorldConfig()
    state = _blob(1000, seed=1)
    rng = np.random.default_rng(2)
    state.v[:] = rng.normal(0, 0.2, state.v.shape)
    masses = state.particle_mass()[:, None]
    p0 = (state.v * masses).sum(axis=0)
    engine.run_substeps(state, np.zeros((1000, 2)), cfg, 200)
    p1 = (state.v * masses).sum(axis=0)
    drift = float(np.abs(p1 - p0).max()) / 200
    return drift < 1e-6, f"momentum drift {drift:.2e}/substep (limit 1e-6)"


def _check_determinism():
    cfg = WorldConfig(gravity=(0.0, -3.0), ground_height=0.12)
    a = _blob(600, seed=3)
    b = _blob(600, seed=3)
    act = np.random.default_rng(4).normal(0, 3.0, (600, 2))
    engine.run_substeps(a, act, cfg, 300)
    engine.run_substeps(b, act, cfg, 300)
    same = (
        np.array_equal(a.x, b.x) and np.array_equal(a.v, b.v) and np.array_equal(a.F, b.F)
    )
    return same, "two runs bitwise identical" if same else "trajectories diverged"


def _check_bspline_partition():
    cfg = WorldConfig()
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(500):
        _, w = engine.bspline_weights(rng.uniform(0.05, 0.95, 2), cfg.dx)
        worst = max(worst, abs(float(w.sum()) - 1.0))
    return worst < 1e-12, f"worst |sum(w) - 1| {worst:.2e} (limit 1e-12)"


def _check_composition_identity():
    rng = np.random.default_rng(6)
    coarse = ActionGrid(rng.uniform(-0.5, 0.5, (8, 8, 2)))
    up = upsample(coarse, 16)
    mask = GateMask(np.full((16, 16), 0.5))
    out = compose_coarse_fine(coarse, ActionGrid(up.values.copy()), mask, a_max=1.0)
    ok = np.array_equal(out.values, up.values)
    return ok, "half-gate identity exact" if ok else "half-gate identity violated"


CHECKS = [
    ("svd_reconstruction", _check_svd_reconstruction),
    ("mass_conservation", _check_mass_conservation),
    ("momentum_conservation", _check_momentum),
    ("determinism", _check_determinism),
    ("bspline_partition_of_unity", _check_bspline_partition),
    ("composition_identity", _check_composition_identity),
]


def run_validation(echo=print) -> bool:
    all_ok = True
    for name, check in CHECKS:
        ok, detail = check()
        all_ok &= ok
        echo(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
