"""Throughput benchmark: substeps/s single-thread and across workers."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import engine
from .materials import MaterialParams
from .world import WorldConfig, make_state


def _bench_state(particles: int, seed: int = 0):
    spacing = (1.0 / 128) / 2
    side = int(np.ceil(np.sqrt(particles)))
    axis = (np.arange(side) - (side - 1) / 2) * spacing
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([xx.ravel(), yy.ravel()], axis=1)[:particles] + 0.5
    rng = np.random.default_rng(seed)
    pts += rng.uniform(-0.05, 0.05, pts.shape) * spacing
    mat = MaterialParams.from_youngs(1e4, 0.2, yield_stress=5.0)
    n = len(pts)
    return make_state(pts, np.zeros(n, dtype=int), np.zeros(n, dtype=int), [mat])


def _run_one(particles: int, substeps: int, seed: int) -> float:
    cfg = WorldConfig()
    state = _bench_state(particles, seed)
    act = np.zeros((state.n_particles, 2))
    t0 = time.perf_counter()
    engine.run_substeps(state, act, cfg, substeps)
    return time.perf_counter() - t0


def run_benchmark(particles: int = 6000, substeps: int = 10000, workers: int = 1) -> dict:
    """Measure single-thread throughput and aggregate scaling over workers.

    Workers run independent simulations concurrently (the kernels release
    the GIL), which mirrors how population evaluation and batch rollouts
    parallelize.
    """
    # JIT warmup
    _run_one(min(particles, 500), 50, 0)

    single = _run_one(particles, substeps, 0)
    single_rate = substeps / single
    result = {
        "particles": particles,
        "substeps": substeps,
        "single_thread_substeps_per_s": single_rate,
        "control_steps_per_s": single_rate / 100.0,
        "workers": workers,
    }
    if workers > 1:
        t0 = time.perf_counter()
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda s: _run_one(particles, substeps, s), range(workers)))
        wall = time.perf_counter() - t0
        aggregate = workers * substeps / wall
        result["aggregate_substeps_per_s"] = aggregate
        result["scaling_vs_single"] = aggregate / single_rate
    return result
