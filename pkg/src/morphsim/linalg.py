"""Closed-form 2x2 matrix decompositions and the actuated stress model.

The scalar ``_*`` functions are the single source of truth; the simulation
kernels call them directly (they are numba-compiled) and the public array
API wraps them for tests and tools.

Conventions: ``svd_2x2`` returns proper rotations U and V (det = +1) with
``sigma[0] >= sigma[1]``; for inputs with negative determinant the smaller
singular value is negative, so U @ diag(sigma) @ V.T always reconstructs
the input.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .errors import InvalidDeformationError
from .materials import MaterialParams


@njit(cache=True, inline="always")
def _svd2(a, b, c, d):
    """SVD of [[a, b], [c, d]] as (uc, us, s0, s1, vc, vs).

    U = [[uc, -us], [us, uc]], V = [[vc, -vs], [vs, vc]], both proper
    rotations; s1 carries the sign of the determinant.
    """
    e = 0.5 * (a + d)
    h = 0.5 * (c - b)
    f = 0.5 * (a - d)
    g = 0.5 * (c + b)
    q = math.hypot(e, h)
    r = math.hypot(f, g)
    s0 = q + r
    s1 = q - r
    a1 = math.atan2(g, f) if r > 0.0 else 0.0
    a2 = math.atan2(h, e) if q > 0.0 else 0.0
    tu = 0.5 * (a1 + a2)
    tv = 0.5 * (a1 - a2)
    return math.cos(tu), math.sin(tu), s0, s1, math.cos(tv), math.sin(tv)


@njit(cache=True, inline="always")
def _polar_rot(a, b, c, d):
    """Rotation factor (rc, rs) of the polar decomposition, R = [[rc, -rs], [rs, rc]].

    Valid for det > 0, where a+d and c-b cannot both vanish.
    """
    x = a + d
    y = c - b
    n = math.hypot(x, y)
    return x / n, y / n


@njit(cache=True, inline="always")
def _cauchy(a, b, c, d, act0, act1, mu, lam):
    """Actuated Cauchy stress of F = [[a, b], [c, d]].

    2*mu*(F - R)F^T + lam*(J-1)*J*I + F diag(act) F^T, with R the polar
    rotation of F and J = det F.
    """
    j = a * d - b * c
    rc, rs = _polar_rot(a, b, c, d)
    # (F - R) F^T
    e00 = a - rc
    e01 = b + rs
    e10 = c - rs
    e11 = d - rc
    s00 = 2.0 * mu * (e00 * a + e01 * b)
    s01 = 2.0 * mu * (e00 * c + e01 * d)
    s10 = 2.0 * mu * (e10 * a + e11 * b)
    s11 = 2.0 * mu * (e10 * c + e11 * d)
    vol = lam * (j - 1.0) * j
    s00 += vol
    s11 += vol
    # F diag(act) F^T (symmetric by construction)
    s00 += a * a * act0 + b * b * act1
    s01 += a * c * act0 + b * d * act1
    s10 += c * a * act0 + d * b * act1
    s11 += c * c * act0 + d * d * act1
    return s00, s01, s10, s11


@njit(cache=True, inline="always")
def _project_sigma(s0, s1, yield_stress):
    """Pull (s0, s1) back to the yield surface along the ray from (1, 1).

    Returns the projected pair and a flag telling whether projection fired.
    Requires yield_stress >= sqrt(2) (validated at configuration time).
    """
    nrm = math.sqrt(s0 * s0 + s1 * s1)
    if nrm <= yield_stress:
        return s0, s1, False
    d0 = s0 - 1.0
    d1 = s1 - 1.0
    dd = d0 * d0 + d1 * d1
    ud = d0 + d1
    disc = ud * ud + dd * (yield_stress * yield_stress - 2.0)
    if disc < 0.0:
        disc = 0.0
    t = (-ud + math.sqrt(disc)) / dd
    return 1.0 + t * d0, 1.0 + t * d1, True


def _as_2x2(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    return m


def svd_2x2(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form SVD: returns (U, sigma, V) with m == U @ diag(sigma) @ V.T.

    ``sigma`` is descending; U and V are proper rotations, so sigma[1] < 0
    exactly when det(m) < 0. NaN entries are rejected.
    """
    m = _as_2x2(m)
    if not np.all(np.isfinite(m)):
        raise ValueError("svd_2x2: input contains non-finite entries")
    uc, us, s0, s1, vc, vs = _svd2(m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    u = np.array([[uc, -us], [us, uc]])
    v = np.array([[vc, -vs], [vs, vc]])
    return u, np.array([s0, s1]), v


def polar_rotation(f) -> np.ndarray:
    """Rotation factor of the polar decomposition of ``f`` (requires det > 0)."""
    f = _as_2x2(f)
    det = f[0, 0] * f[1, 1] - f[0, 1] * f[1, 0]
    if not det > 0:
        raise InvalidDeformationError(f"polar_rotation: det(F) = {det} is not positive")
    rc, rs = _polar_rot(f[0, 0], f[0, 1], f[1, 0], f[1, 1])
    return np.array([[rc, -rs], [rs, rc]])


def cauchy_stress(f, action, material: MaterialParams) -> np.ndarray:
    """Actuated Cauchy stress for deformation gradient ``f`` and a 2-vector ``action``."""
    f = _as_2x2(f)
    det = f[0, 0] * f[1, 1] - f[0, 1] * f[1, 0]
    if not det > 0:
        raise InvalidDeformationError(f"cauchy_stress: det(F) = {det} is not positive")
    a0, a1 = float(action[0]), float(action[1])
    s00, s01, s10, s11 = _cauchy(
        f[0, 0], f[0, 1], f[1, 0], f[1, 1], a0, a1, material.mu, material.lam
    )
    return np.array([[s00, s01], [s10, s11]])


def von_mises_project(f, yield_stress: float) -> np.ndarray:
    """Plastic return map: rescale principal stretches onto the yield surface.

    Leaves ``f`` untouched while the stretch-vector norm stays at or below
    ``yield_stress``; otherwise rebuilds F from the projected stretches with
    the same rotation factors.
    """
    f = _as_2x2(f)
    det = f[0, 0] * f[1, 1] - f[0, 1] * f[1, 0]
    if not det > 0:
        raise InvalidDeformationError(f"von_mises_project: det(F) = {det} is not positive")
    uc, us, s0, s1, vc, vs = _svd2(f[0, 0], f[0, 1], f[1, 0], f[1, 1])
    p0, p1, projected = _project_sigma(s0, s1, yield_stress)
    if not projected:
        return f.copy()
    u = np.array([[uc, -us], [us, uc]])
    v = np.array([[vc, -vs], [vs, vc]])
    return (u * np.array([p0, p1])) @ v.T
