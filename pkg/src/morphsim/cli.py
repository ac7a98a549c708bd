"""Command-line entry point: thin client over the library."""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import __version__
from .controllers import CemConfig, RandomController, ScriptedController, ZeroController, cem_optimize
from .envs import ALL_TASKS, TaskKind
from .episode import (
    EpisodeRecord,
    controller_seed,
    make_seeded_env,
    replay_path,
    run_episode,
)
from .errors import MorphSimError

ENV_WORKERS = "MORPHSIM_THREADS"


def _default_workers() -> int:
    return int(os.environ.get(ENV_WORKERS, "1"))


def _parse_overrides(config_path, kv_pairs) -> dict | None:
    overrides: dict = {}
    if config_path:
        import yaml

        with open(config_path) as fh:
            overrides.update(yaml.safe_load(fh) or {})
    for pair in kv_pairs:
        key, _, value = pair.partition("=")
        if not _:
            raise click.BadParameter(f"override {pair!r} is not key=value")
        node = overrides
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = yaml_value(value)
    return overrides or None


def yaml_value(text: str):
    import yaml

    return yaml.safe_load(text)


@click.group()
@click.version_option(version=__version__, prog_name="morphsim")
def main():
    """Simulation engine and task suite for muscle-field soft robots."""


@main.command("list-tasks")
def list_tasks():
    """Print the available task names."""
    for task in ALL_TASKS:
        click.echo(task.value)


@main.command()
@click.option("--task", required=True, type=click.Choice([t.value for t in ALL_TASKS]))
@click.option("--controller", default="random", type=click.Choice(["random", "zero"]))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--steps", default=None, type=int, help="Episode length cap.")
@click.option("--resolution", default=8, show_default=True, type=click.Choice(["4", "8", "16", "64"]))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--override", "overrides_kv", multiple=True, help="dotted.key=value")
@click.option("--out", "out_path", default=None, type=click.Path())
@click.option("--json", "as_json", is_flag=True, help="Machine-readable summary.")
def run(task, controller, seed, steps, resolution, config_path, overrides_kv, out_path, as_json):
    """Roll one episode and optionally write a replayable record."""
    try:
        overrides = _parse_overrides(config_path, overrides_kv)
        env = make_seeded_env(task, overrides, seed)
        resolution = int(resolution)
        if controller == "random":
            ctrl = RandomController(controller_seed(seed), resolution, env.spec.a_max)
        else:
            ctrl = ZeroController(resolution)
        record = run_episode(
            env, ctrl, max_steps=steps, jsonl_stream=sys.stdout if as_json else None
        )
        if out_path:
            record.save(out_path)
        if not as_json:
            click.echo(
                f"task={task} seed={seed} return={record.episode_return:.6f} "
                f"length={record.length} termination={record.final['termination']}"
            )
    except MorphSimError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(1)


@main.command()
@click.argument("record_path", type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
def replay(record_path, as_json):
    """Re-run a recorded episode and report the reproduced return."""
    try:
        record = EpisodeRecord.load(record_path)
        new = replay_path(record_path)
        drift = max(
            (abs(a - b) for a, b in zip(record.rewards(), new.rewards())), default=0.0
        )
        if as_json:
            click.echo(
                json.dumps(
                    {
                        "event": "replay",
                        "return": new.episode_return,
                        "recorded_return": record.episode_return,
                        "max_reward_drift": drift,
                        "length": new.length,
                    }
                )
            )
        else:
            click.echo(
                f"return={new.episode_return:.6f} recorded={record.episode_return:.6f} "
                f"max_reward_drift={drift:.3e}"
            )
    except MorphSimError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(1)


@main.command()
@click.argument("record_path", type=click.Path(exists=True))
@click.option("--gif", "gif_path", required=True, type=click.Path())
@click.option("--size", default=512, show_default=True, type=int)
@click.option("--quiver/--no-quiver", default=False, show_default=True)
@click.option("--fps", default=12, show_default=True, type=int)
def render(record_path, gif_path, size, quiver, fps):
    """Render a recorded episode to an animated GIF."""
    from .render import FrameStyle, render_episode

    try:
        record = EpisodeRecord.load(record_path)
        style = FrameStyle(image_size=size, show_action_quiver=quiver)
        frames = render_episode(record, style, gif_path, frame_ms=int(1000 / fps))
        click.echo(f"wrote {len(frames)} frames to {gif_path}")
    except MorphSimError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(1)


@main.command()
@click.option("--task", required=True, type=click.Choice([t.value for t in ALL_TASKS]))
@click.option("--resolution", default=8, show_default=True, type=click.Choice(["4", "8", "16"]))
@click.option("--budget", default=1920, show_default=True, type=int, help="Total episode evaluations.")
@click.option("--population", default=64, show_default=True, type=int)
@click.option("--elites", default=8, show_default=True, type=int)
@click.option("--horizon", default=20, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--workers", default=None, type=int, help=f"Defaults to ${ENV_WORKERS} or 1.")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--override", "overrides_kv", multiple=True)
@click.option("--csv", "csv_path", default=None, type=click.Path())
@click.option("--out", "out_path", default=None, type=click.Path(), help="Record of the best plan.")
@click.option("--json", "as_json", is_flag=True)
def optimize(task, resolution, budget, population, elites, horizon, seed, workers,
             config_path, overrides_kv, csv_path, out_path, as_json):
    """Cross-entropy trajectory optimization on one task."""
    try:
        overrides = _parse_overrides(config_path, overrides_kv)
        workers = _default_workers() if workers is None else workers
        iterations = max(1, budget // population)
        cfg = CemConfig(
            horizon=horizon,
            population=population,
            elites=elites,
            iterations=iterations,
            action_resolution=int(resolution),
        )
        factory = lambda: make_seeded_env(task, overrides, seed)  # noqa: E731

        def progress(it, best, mean):
            if not as_json:
                click.echo(f"iter {it:3d}  best {best:+.4f}  mean {mean:+.4f}")

        result = cem_optimize(factory, cfg, seed=controller_seed(seed), workers=workers,
                              csv_path=csv_path, progress=progress)
        if out_path:
            env = factory()
            record = run_episode(env, ScriptedController(list(result.actions)), max_steps=horizon)
            record.save(out_path)
        summary = {
            "event": "optimize",
            "task": task,
            "resolution": int(resolution),
            "iterations": iterations,
            "best_return": result.best_return,
        }
        click.echo(json.dumps(summary) if as_json else f"best return: {result.best_return:.6f}")
    except MorphSimError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(1)


@main.command()
@click.option("--particles", default=6000, show_default=True, type=int)
@click.option("--substeps", default=10000, show_default=True, type=int)
@click.option("--workers", default=None, type=int)
@click.option("--json", "as_json", is_flag=True)
def bench(particles, substeps, workers, as_json):
    """Measure raw substep throughput (machine-dependent soft gates)."""
    from .bench import run_benchmark

    workers = _default_workers() if workers is None else workers
    result = run_benchmark(particles, substeps, workers)
    if as_json:
        click.echo(json.dumps(result))
    else:
        click.echo(
            f"single thread: {result['single_thread_substeps_per_s']:.0f} substeps/s "
            f"({result['control_steps_per_s']:.1f} control steps/s) at {particles} particles"
        )
        if "aggregate_substeps_per_s" in result:
            click.echo(
                f"{workers} workers: {result['aggregate_substeps_per_s']:.0f} substeps/s "
                f"aggregate ({result['scaling_vs_single']:.2f}x single thread)"
            )


@main.command()
def validate():
    """Run the physics invariant suite."""
    from .validate import run_validation

    ok = run_validation(echo=click.echo)
    sys.exit(0 if ok else 1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8800, show_default=True, type=int)
def serve(host, port):
    """Start the HTTP simulation service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
