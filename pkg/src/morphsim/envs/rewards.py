"""Per-task reward formulas with stable breakdown keys.

Every function returns a breakdown dict; the step reward is exactly the sum
of its values. Potential-style terms keep per-step rewards bounded, and an
explicit ``clip`` weight (default 20) caps each term.
"""

from __future__ import annotations

import numpy as np

from ..materials import Role
from .spec import EnvSpec, TaskKind


def _clip(value: float, bound: float) -> float:
    return float(np.clip(value, -bound, bound))


def _com(state, sl: slice) -> np.ndarray:
    return state.x[sl].mean(axis=0)


def _robot_com(state) -> np.ndarray:
    return state.x[state.role == Role.ROBOT].mean(axis=0)


def iou(a: np.ndarray, b: np.ndarray) -> float:
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)


def compute_reward(task: TaskKind, prev, cur, spec: EnvSpec, ctx) -> tuple[float, dict]:
    """Reward for the transition prev -> cur; returns (reward, breakdown)."""
    w = spec.reward_weights
    bound = float(w.get("clip", 20.0))
    breakdown: dict[str, float] = {}

    if task is TaskKind.SHAPE_MATCH:
        breakdown["iou"] = _clip(w.get("iou", 1.0) * ctx.current_iou, bound)

    elif task is TaskKind.RUN:
        dx = _robot_com(cur)[0] - _robot_com(prev)[0]
        mean_vx = float(cur.v[cur.role == Role.ROBOT, 0].mean())
        breakdown["progress"] = _clip(w.get("progress", 10.0) * dx, bound)
        breakdown["velocity"] = _clip(w.get("velocity", 0.1) * mean_vx, bound)

    elif task is TaskKind.KICK:
        sl = ctx.body_slices["cargo"]
        dx = _com(cur, sl)[0] - _com(prev, sl)[0]
        dist = float(np.linalg.norm(_robot_com(cur) - _com(cur, sl)))
        breakdown["cargo_progress"] = _clip(w.get("cargo_progress", 20.0) * dx, bound)
        breakdown["approach_penalty"] = _clip(-w.get("approach", 0.5) * dist, bound)

    elif task is TaskKind.DIG:
        target = np.asarray(spec.target["point"])
        d_prev = float(np.linalg.norm(_robot_com(prev) - target))
        d_cur = float(np.linalg.norm(_robot_com(cur) - target))
        breakdown["progress"] = _clip(w.get("progress", 10.0) * (d_prev - d_cur), bound)

    elif task is TaskKind.OBSTACLE:
        fe = float(spec.target["far_edge"])
        cx_prev = _robot_com(prev)[0]
        cx_cur = _robot_com(cur)[0]
        shaping = min(cx_cur, fe) - min(cx_prev, fe)
        bypass = max(0.0, cx_cur - fe) - max(0.0, cx_prev - fe)
        breakdown["forward_shaping"] = _clip(w.get("shaping", 2.0) * shaping, bound)
        breakdown["bypass"] = _clip(w.get("bypass", 10.0) * bypass, bound)

    elif task is TaskKind.GROW:
        target = np.asarray(spec.target["point"])
        robot_prev = prev.x[prev.role == Role.ROBOT]
        robot_cur = cur.x[cur.role == Role.ROBOT]
        d_prev = float(np.linalg.norm(robot_prev - target, axis=1).min())
        d_cur = float(np.linalg.norm(robot_cur - target, axis=1).min())
        breakdown["progress"] = _clip(w.get("progress", 10.0) * (d_prev - d_cur), bound)

    elif task is TaskKind.CATCH:
        sl = ctx.body_slices["cargo"]
        goal = np.asarray(spec.target["point"])
        d1_prev = float(np.linalg.norm(_robot_com(prev) - _com(prev, sl)))
        d1_cur = float(np.linalg.norm(_robot_com(cur) - _com(cur, sl)))
        d2_prev = float(np.linalg.norm(_com(prev, sl) - goal))
        d2_cur = float(np.linalg.norm(_com(cur, sl) - goal))
        breakdown["approach"] = _clip(w.get("approach", 2.0) * (d1_prev - d1_cur), bound)
        breakdown["delivery"] = _clip(w.get("delivery", 20.0) * (d2_prev - d2_cur), bound)

    elif task is TaskKind.SLOT:
        sl = ctx.body_slices["cap"]
        cap_prev = _com(prev, sl)
        cap_cur = _com(cur, sl)
        d_prev = float(np.linalg.norm(_robot_com(prev) - cap_prev))
        d_cur = float(np.linalg.norm(_robot_com(cur) - cap_cur))
        disp_prev = float(np.linalg.norm(cap_prev - ctx.initial_cap_com))
        disp_cur = float(np.linalg.norm(cap_cur - ctx.initial_cap_com))
        breakdown["approach"] = _clip(w.get("approach", 2.0) * (d_prev - d_cur), bound)
        breakdown["cap_move"] = _clip(w.get("cap_move", 20.0) * (disp_cur - disp_prev), bound)
        if ctx.success_this_step:
            breakdown["success_bonus"] = float(w.get("success_bonus", 5.0))

    else:  # pragma: no cover
        raise ValueError(f"no reward defined for task {task}")

    return float(sum(breakdown.values())), breakdown
