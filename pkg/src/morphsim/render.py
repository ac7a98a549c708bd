"""Human-facing rendering: PNG frames and episode GIFs.

World-to-pixel mapping is a fixed linear map from the active grid window:
``px = (x - offset*dx) / span * size``, y flipped so larger world y is
higher in the image. All drawing is deterministic, so identical states give
byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from PIL import Image, ImageDraw

from .actuation import ActionGrid, distribute_to_particles
from .envs import Environment
from .episode import EpisodeRecord, deserialize_action, make_seeded_env
from .errors import ConfigError
from .materials import Role
from .observation import center_of_mass

DEFAULT_COLORS = {
    "background": (17, 37, 56),
    "ground": (84, 98, 112),
    "obstacle": (130, 130, 140),
    "robot": (255, 87, 34),
    "passive": (80, 170, 255),
    "soil": (150, 111, 70),
    "target": (200, 80, 220),
    "com": (255, 255, 255),
    "quiver": (255, 220, 80),
}


@dataclass
class FrameStyle:
    image_size: int = 512
    colors: dict = field(default_factory=lambda: dict(DEFAULT_COLORS))
    show_com: bool = True
    show_target: bool = True
    show_action_quiver: bool = False
    quiver_stride: int = 25
    particle_radius: int = 1

    def __post_init__(self):
        if self.image_size < 128:
            raise ConfigError("image_size must be at least 128")


def _mapper(state, cfg, size):
    span = cfg.cells * cfg.dx
    origin = state.grid_offset * cfg.dx

    def to_px(pts):
        pts = np.atleast_2d(pts)
        u = (pts[:, 0] - origin[0]) / span * size
        v = size - 1 - (pts[:, 1] - origin[1]) / span * size
        return u, v

    return to_px


def world_to_pixel(state, cfg, point, image_size: int):
    """The documented mapping, exposed for golden tests."""
    u, v = _mapper(state, cfg, image_size)(np.asarray(point, dtype=float))
    return float(u[0]), float(v[0])


def render_frame(
    env_or_state,
    spec=None,
    style: FrameStyle | None = None,
    action_grid: ActionGrid | None = None,
) -> Image.Image:
    """Draw one frame. Accepts an Environment or a (state, spec) pair."""
    style = style or FrameStyle()
    if isinstance(env_or_state, Environment):
        env = env_or_state
        state, spec, cfg = env.state, env.spec, env.cfg
    else:
        state = env_or_state
        if spec is None:
            raise ConfigError("render_frame(state, ...) needs the spec")
        cfg = spec.world_config()
    size = style.image_size
    col = style.colors
    img = Image.new("RGB", (size, size), col["background"])
    draw = ImageDraw.Draw(img)
    to_px = _mapper(state, cfg, size)

    if cfg.ground_height is not None:
        _, gv = to_px([[0.0, cfg.ground_height]])
        draw.rectangle([0, float(gv[0]), size, size], fill=col["ground"])

    for rect in state.obstacles:
        u, v = to_px([[rect[0], rect[3]], [rect[1], rect[2]]])
        draw.rectangle([u[0], v[0], u[1], v[1]], fill=col["obstacle"])

    if style.show_target and spec is not None:
        for obj in spec.scene:
            if obj.kind == "target_marker":
                g = obj.geometry
                c = np.asarray(g.get("center", spec.target.get("point", (0, 0))))
                r = float(g.get("radius", 0.01)) / (cfg.cells * cfg.dx) * size
                u, v = to_px(c)
                draw.ellipse([u[0] - r, v[0] - r, u[0] + r, v[0] + r], outline=col["target"], width=2)

    role_colors = {
        int(Role.ROBOT): col["robot"],
        int(Role.PASSIVE): col["passive"],
        int(Role.SOIL): col["soil"],
    }
    u, v = to_px(state.x)
    rad = style.particle_radius
    for role_value, color in role_colors.items():
        mask = state.role == role_value
        for uu, vv in zip(u[mask], v[mask]):
            draw.ellipse([uu - rad, vv - rad, uu + rad, vv + rad], fill=color)

    if style.show_action_quiver and action_grid is not None:
        acts = distribute_to_particles(action_grid, state)
        robot_idx = np.where(state.role == Role.ROBOT)[0][:: style.quiver_stride]
        scale = 0.04 / max(1e-9, np.abs(acts).max())
        for p in robot_idx:
            tip = state.x[p] + acts[p] * scale
            u0, v0 = to_px(state.x[p])
            u1, v1 = to_px(tip)
            draw.line([u0[0], v0[0], u1[0], v1[0]], fill=col["quiver"], width=1)

    if style.show_com:
        cu, cv = to_px(center_of_mass(state))
        draw.line([cu[0] - 4, cv[0], cu[0] + 4, cv[0]], fill=col["com"], width=1)
        draw.line([cu[0], cv[0] - 4, cu[0], cv[0] + 4], fill=col["com"], width=1)

    return img


def render_episode(
    record: EpisodeRecord,
    style: FrameStyle | None = None,
    gif_path: str | None = None,
    frame_ms: int = 80,
) -> list[Image.Image]:
    """Replay a record and render one frame per control step."""
    style = style or FrameStyle()
    header = record.header
    env = make_seeded_env(header["task"], header.get("overrides") or None, header["seed"])
    env.reset()
    frames = []
    for step in record.steps:
        action = deserialize_action(step["action"])
        grid = env.action_field(action)
        env.step(action)
        frames.append(render_frame(env, style=style, action_grid=grid))
    if gif_path and frames:
        frames[0].save(
            gif_path,
            save_all=True,
            append_images=frames[1:],
            duration=frame_ms,
            loop=0,
        )
    return frames
