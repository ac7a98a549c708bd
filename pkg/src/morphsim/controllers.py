"""NN-free controllers: zero, random, scripted, and a CEM trajectory optimizer."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .actuation import SUPPORTED_RESOLUTIONS
from .errors import ConfigError


class ZeroController:
    def __init__(self, resolution: int = 8):
        self.resolution = resolution

    def act(self, obs, t):
        return np.zeros((self.resolution, self.resolution, 2))


class RandomController:
    """I.i.d. uniform actions in [-a_max, a_max] at a fixed resolution."""

    def __init__(self, seed: int, resolution: int, a_max: float = 1.0):
        if resolution not in SUPPORTED_RESOLUTIONS:
            raise ConfigError(f"unsupported resolution {resolution}")
        self.seed = int(seed)
        self.resolution = resolution
        self.a_max = float(a_max)
        self._rng = np.random.default_rng(self.seed)

    def reset(self):
        self._rng = np.random.default_rng(self.seed)

    def act(self, obs, t):
        return self._rng.uniform(
            -self.a_max, self.a_max, size=(self.resolution, self.resolution, 2)
        )


class ScriptedController:
    """Plays back a fixed list of action grids (loops if shorter than the run)."""

    def __init__(self, actions):
        if not len(actions):
            raise ConfigError("scripted controller needs at least one action")
        self.actions = [np.asarray(a, dtype=np.float64) for a in actions]

    def act(self, obs, t):
        return self.actions[t % len(self.actions)]


@dataclass(frozen=True)
class CemConfig:
    horizon: int = 20
    population: int = 64
    elites: int = 8
    iterations: int = 30
    init_std: float = 0.5  # fraction of a_max
    action_resolution: int = 8
    min_std: float = 0.02  # fraction of a_max

    def __post_init__(self):
        if self.elites >= self.population:
            raise ConfigError("elites must be smaller than the population")
        if self.action_resolution not in (4, 8, 16):
            raise ConfigError("CEM plans at resolution 4, 8 or 16")


@dataclass
class CemResult:
    actions: np.ndarray  # (horizon, n, n, 2)
    best_return: float
    history: list  # rows of (iteration, best_so_far, population_mean, elite_mean)


def _evaluate(env_factory, actions) -> float:
    """Return of one action sequence on a fresh env; aborts score the partial sum."""
    env = env_factory()
    env.reset()
    total = 0.0
    for t in range(actions.shape[0]):
        try:
            result = env.step(actions[t])
        except Exception:
            break
        total += result.reward
        if result.terminated or result.truncated:
            break
    return total


def cem_optimize(
    env_factory,
    cfg: CemConfig,
    seed: int,
    workers: int = 1,
    csv_path: str | None = None,
    progress=None,
) -> CemResult:
    """Cross-entropy planning over a flattened open-loop action sequence.

    Sampling is drawn from a single sequential stream before evaluations are
    dispatched, and each member is scored on its own fresh deterministic
    env, so results do not depend on the worker count. The running best
    member re-enters every population, which makes the best-elite return
    non-decreasing across iterations.
    """
    probe = env_factory()
    a_max = float(probe.spec.a_max)
    if cfg.horizon > probe.spec.max_episode_steps:
        raise ConfigError("CEM horizon exceeds the task's episode length")
    del probe

    n = cfg.action_resolution
    shape = (cfg.horizon, n, n, 2)
    dim = int(np.prod(shape))
    mean = np.zeros(dim)
    std = np.full(dim, cfg.init_std * a_max)
    floor = cfg.min_std * a_max
    rng = np.random.default_rng(seed)

    best_actions = None
    best_return = -np.inf
    history = []

    for it in range(cfg.iterations):
        samples = rng.normal(mean[None, :], std[None, :], size=(cfg.population, dim))
        np.clip(samples, -a_max, a_max, out=samples)
        if best_actions is not None:
            samples[0] = best_actions
        batch = samples.reshape((cfg.population,) + shape)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                returns = np.array(
                    list(pool.map(lambda a: _evaluate(env_factory, a), batch))
                )
        else:
            returns = np.array([_evaluate(env_factory, a) for a in batch])

        order = np.argsort(-returns, kind="stable")
        elite_idx = order[: cfg.elites]
        elite = samples[elite_idx]
        if returns[order[0]] > best_return:
            best_return = float(returns[order[0]])
            best_actions = samples[order[0]].copy()
        mean = elite.mean(axis=0)
        std = np.maximum(elite.std(axis=0), floor)
        history.append(
            (it, best_return, float(returns.mean()), float(returns[elite_idx].mean()))
        )
        if progress is not None:
            progress(it, best_return, float(returns.mean()))

    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "best_return", "population_mean", "elite_mean"])
            writer.writerows(history)

    return CemResult(
        actions=best_actions.reshape(shape), best_return=best_return, history=history
    )
