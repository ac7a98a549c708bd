"""Numba kernels: the fused substep loop and the action-field gather.

Everything here is sequential by design, so trajectories are bitwise
reproducible no matter how many worker threads run *other* simulations
concurrently (the kernels release the GIL). Parallelism in this engine
lives at the simulation level, not inside a substep.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .linalg import _cauchy, _project_sigma, _svd2

# Kernel status codes.
STATUS_OK = 0
STATUS_WINDOW = 1
STATUS_BAD_F = 2
STATUS_NONFINITE = 3


@njit(cache=True, inline="always")
def _coulomb(vx, vy, nx, ny, coeff):
    """Contact response: zero inward normal flow, Coulomb-scale the tangent."""
    vn = vx * nx + vy * ny
    if vn >= 0.0:
        return vx, vy
    vtx = vx - vn * nx
    vty = vy - vn * ny
    lit = math.sqrt(vtx * vtx + vty * vty)
    if lit + coeff * vn <= 0.0:
        return 0.0, 0.0
    s = 1.0 + coeff * vn / lit
    return vtx * s, vty * s


@njit(cache=True, nogil=True, fastmath={"contract", "reassoc", "nsz", "arcp"})
def run_substeps_kernel(
    n_steps,
    x,
    v,
    F,
    C,
    act,
    mat_id,
    mat_table,
    grid_m,
    grid_v,
    offset_x,
    offset_y,
    inv_dx,
    dx,
    dt,
    gravity_x,
    gravity_y,
    bound,
    cells,
    has_ground,
    ground_y,
    ground_coeff,
    obstacles,
):
    """Run ``n_steps`` full MPM substeps in place.

    Cycle per substep: P2G scatter of mass/momentum with the actuated
    stress, grid momentum update with gravity and boundary handling, G2P
    gather, advection, deformation-gradient update, plastic projection.

    Returns (status, offending_particle, substeps_completed).
    """
    n_particles = x.shape[0]
    n_obstacles = obstacles.shape[0]
    lo = 0.5
    hi = cells - 1.5

    # active bounding box of touched grid nodes; start with the full window
    ax0, ax1, ay0, ay1 = 0, cells - 1, 0, cells - 1

    for step in range(n_steps):
        grid_m[ax0 : ax1 + 1, ay0 : ay1 + 1] = 0.0
        grid_v[ax0 : ax1 + 1, ay0 : ay1 + 1, :] = 0.0
        ax0, ay0 = cells, cells
        ax1, ay1 = -1, -1

        # --- particle to grid ---
        for p in range(n_particles):
            xi = x[p, 0] * inv_dx - offset_x
            yi = x[p, 1] * inv_dx - offset_y
            if not (lo <= xi < hi and lo <= yi < hi):
                return STATUS_WINDOW, p, step
            bx = int(math.floor(xi - 0.5))
            by = int(math.floor(yi - 0.5))
            if bx < ax0:
                ax0 = bx
            if bx + 2 > ax1:
                ax1 = bx + 2
            if by < ay0:
                ay0 = by
            if by + 2 > ay1:
                ay1 = by + 2
            fx = xi - bx
            fy = yi - by
            wx0 = 0.5 * (1.5 - fx) ** 2
            wx1 = 0.75 - (fx - 1.0) ** 2
            wx2 = 0.5 * (fx - 0.5) ** 2
            wy0 = 0.5 * (1.5 - fy) ** 2
            wy1 = 0.75 - (fy - 1.0) ** 2
            wy2 = 0.5 * (fy - 0.5) ** 2

            mid = mat_id[p]
            mu = mat_table[mid, 0]
            lam = mat_table[mid, 1]
            pm = mat_table[mid, 3]
            pv = mat_table[mid, 4]

            f00 = F[p, 0, 0]
            f01 = F[p, 0, 1]
            f10 = F[p, 1, 0]
            f11 = F[p, 1, 1]
            det = f00 * f11 - f01 * f10
            if not det > 0.0:
                return STATUS_BAD_F, p, step

            s00, s01, s10, s11 = _cauchy(f00, f01, f10, f11, act[p, 0], act[p, 1], mu, lam)
            coef = -dt * pv * 4.0 * inv_dx * inv_dx
            a00 = coef * s00 + pm * C[p, 0, 0]
            a01 = coef * s01 + pm * C[p, 0, 1]
            a10 = coef * s10 + pm * C[p, 1, 0]
            a11 = coef * s11 + pm * C[p, 1, 1]

            mvx = pm * v[p, 0]
            mvy = pm * v[p, 1]
            dpx0 = (0.0 - fx) * dx
            dpx1 = (1.0 - fx) * dx
            dpx2 = (2.0 - fx) * dx
            dpy0 = (0.0 - fy) * dx
            dpy1 = (1.0 - fy) * dx
            dpy2 = (2.0 - fy) * dx
            for i in range(3):
                if i == 0:
                    wi = wx0
                    dpx = dpx0
                elif i == 1:
                    wi = wx1
                    dpx = dpx1
                else:
                    wi = wx2
                    dpx = dpx2
                gi = bx + i
                ex = mvx + a00 * dpx
                ey = mvy + a10 * dpx
                w0 = wi * wy0
                w1 = wi * wy1
                w2 = wi * wy2
                grid_v[gi, by, 0] += w0 * (ex + a01 * dpy0)
                grid_v[gi, by, 1] += w0 * (ey + a11 * dpy0)
                grid_m[gi, by] += w0 * pm
                grid_v[gi, by + 1, 0] += w1 * (ex + a01 * dpy1)
                grid_v[gi, by + 1, 1] += w1 * (ey + a11 * dpy1)
                grid_m[gi, by + 1] += w1 * pm
                grid_v[gi, by + 2, 0] += w2 * (ex + a01 * dpy2)
                grid_v[gi, by + 2, 1] += w2 * (ey + a11 * dpy2)
                grid_m[gi, by + 2] += w2 * pm

        # --- grid update (only nodes the scatter touched) ---
        if ax0 < 0:
            ax0 = 0
        if ay0 < 0:
            ay0 = 0
        if ax1 > cells - 1:
            ax1 = cells - 1
        if ay1 > cells - 1:
            ay1 = cells - 1
        for i in range(ax0, ax1 + 1):
            wx_world = (offset_x + i) * dx
            for j in range(ay0, ay1 + 1):
                m = grid_m[i, j]
                if m > 0.0:
                    gvx = grid_v[i, j, 0] / m + dt * gravity_x
                    gvy = grid_v[i, j, 1] / m + dt * gravity_y
                    wy_world = (offset_y + j) * dx

                    if has_ground and wy_world <= ground_y:
                        gvx, gvy = _coulomb(gvx, gvy, 0.0, 1.0, ground_coeff)

                    for k in range(n_obstacles):
                        if (
                            obstacles[k, 0] <= wx_world <= obstacles[k, 1]
                            and obstacles[k, 2] <= wy_world <= obstacles[k, 3]
                        ):
                            if obstacles[k, 4] == 0.0:
                                gvx = 0.0
                                gvy = 0.0
                            else:
                                dl = wx_world - obstacles[k, 0]
                                dr = obstacles[k, 1] - wx_world
                                db = wy_world - obstacles[k, 2]
                                du = obstacles[k, 3] - wy_world
                                nx = 0.0
                                ny = 0.0
                                mn = dl
                                nx = -1.0
                                if dr < mn:
                                    mn = dr
                                    nx = 1.0
                                    ny = 0.0
                                if db < mn:
                                    mn = db
                                    nx = 0.0
                                    ny = -1.0
                                if du < mn:
                                    mn = du
                                    nx = 0.0
                                    ny = 1.0
                                gvx, gvy = _coulomb(gvx, gvy, nx, ny, obstacles[k, 5])

                    # sticky window walls; the bottom wall yields to the ground plane
                    if i < bound or i >= cells - bound or j >= cells - bound:
                        gvx = 0.0
                        gvy = 0.0
                    if j < bound and not has_ground:
                        gvx = 0.0
                        gvy = 0.0

                    grid_v[i, j, 0] = gvx
                    grid_v[i, j, 1] = gvy
                else:
                    grid_v[i, j, 0] = 0.0
                    grid_v[i, j, 1] = 0.0

        # --- grid to particle, advect, F update, plastic projection ---
        for p in range(n_particles):
            xi = x[p, 0] * inv_dx - offset_x
            yi = x[p, 1] * inv_dx - offset_y
            bx = int(math.floor(xi - 0.5))
            by = int(math.floor(yi - 0.5))
            fx = xi - bx
            fy = yi - by
            wx0 = 0.5 * (1.5 - fx) ** 2
            wx1 = 0.75 - (fx - 1.0) ** 2
            wx2 = 0.5 * (fx - 0.5) ** 2
            wy0 = 0.5 * (1.5 - fy) ** 2
            wy1 = 0.75 - (fy - 1.0) ** 2
            wy2 = 0.5 * (fy - 0.5) ** 2

            nvx = 0.0
            nvy = 0.0
            c00 = 0.0
            c01 = 0.0
            c10 = 0.0
            c11 = 0.0
            # affine gather: C = 4/dx^2 * sum_w v (x_node - x_p), dpos in cell units
            for i in range(3):
                if i == 0:
                    wi = wx0
                elif i == 1:
                    wi = wx1
                else:
                    wi = wx2
                dpx = i - fx
                gi = bx + i
                for j in range(3):
                    if j == 0:
                        wj = wy0
                    elif j == 1:
                        wj = wy1
                    else:
                        wj = wy2
                    w = wi * wj
                    dpy = j - fy
                    gvx = grid_v[gi, by + j, 0]
                    gvy = grid_v[gi, by + j, 1]
                    wvx = w * gvx
                    wvy = w * gvy
                    nvx += wvx
                    nvy += wvy
                    c00 += wvx * dpx
                    c01 += wvx * dpy
                    c10 += wvy * dpx
                    c11 += wvy * dpy
            scale = 4.0 * inv_dx
            c00 *= scale
            c01 *= scale
            c10 *= scale
            c11 *= scale

            v[p, 0] = nvx
            v[p, 1] = nvy
            C[p, 0, 0] = c00
            C[p, 0, 1] = c01
            C[p, 1, 0] = c10
            C[p, 1, 1] = c11
            x[p, 0] += dt * nvx
            x[p, 1] += dt * nvy

            g00 = 1.0 + dt * c00
            g01 = dt * c01
            g10 = dt * c10
            g11 = 1.0 + dt * c11
            f00 = F[p, 0, 0]
            f01 = F[p, 0, 1]
            f10 = F[p, 1, 0]
            f11 = F[p, 1, 1]
            n00 = g00 * f00 + g01 * f10
            n01 = g00 * f01 + g01 * f11
            n10 = g10 * f00 + g11 * f10
            n11 = g10 * f01 + g11 * f11

            ys = mat_table[mat_id[p], 2]
            if ys < 1e300:
                # the stretch-vector norm equals the Frobenius norm, so the
                # SVD is only needed once the yield test actually fires
                fn2 = n00 * n00 + n01 * n01 + n10 * n10 + n11 * n11
                if fn2 > ys * ys:
                    uc, us, sg0, sg1, vc, vs = _svd2(n00, n01, n10, n11)
                    p0, p1, projected = _project_sigma(sg0, sg1, ys)
                    if projected:
                        # rebuild F = U diag(p0, p1) V^T
                        n00 = uc * p0 * vc + us * p1 * vs
                        n01 = uc * p0 * vs - us * p1 * vc
                        n10 = us * p0 * vc - uc * p1 * vs
                        n11 = us * p0 * vs + uc * p1 * vc

            F[p, 0, 0] = n00
            F[p, 0, 1] = n01
            F[p, 1, 0] = n10
            F[p, 1, 1] = n11

            if not (
                math.isfinite(x[p, 0])
                and math.isfinite(x[p, 1])
                and math.isfinite(nvx)
                and math.isfinite(nvy)
                and math.isfinite(n00)
                and math.isfinite(n11)
            ):
                return STATUS_NONFINITE, p, step

    return STATUS_OK, -1, n_steps


@njit(cache=True, nogil=True)
def distribute_kernel(values, x, role, origin_x, origin_y, h, out):
    """Gather the action field onto particles with the quadratic B-spline stencil.

    ``values`` is (n, n, 2) with node (i, j) at window coordinate
    ((i+0.5)h, (j+0.5)h). Robot particles (role 0) outside the lattice read
    clamped edge nodes; every other role receives zero.
    """
    n = values.shape[0]
    for p in range(x.shape[0]):
        if role[p] != 0:
            out[p, 0] = 0.0
            out[p, 1] = 0.0
            continue
        xi = (x[p, 0] - origin_x) / h - 0.5
        yi = (x[p, 1] - origin_y) / h - 0.5
        bx = int(math.floor(xi - 0.5))
        by = int(math.floor(yi - 0.5))
        # fx, fy land in [0.5, 1.5) for any finite position, so the stencil
        # weights always form a partition of unity; index clamping below is
        # what realizes the clamp-to-edge rule outside the window.
        fx = xi - bx
        fy = yi - by
        wx0 = 0.5 * (1.5 - fx) ** 2
        wx1 = 0.75 - (fx - 1.0) ** 2
        wx2 = 0.5 * (fx - 0.5) ** 2
        wy0 = 0.5 * (1.5 - fy) ** 2
        wy1 = 0.75 - (fy - 1.0) ** 2
        wy2 = 0.5 * (fy - 0.5) ** 2
        acc0 = 0.0
        acc1 = 0.0
        for i in range(3):
            wi = wx0 if i == 0 else (wx1 if i == 1 else wx2)
            gi = bx + i
            if gi < 0:
                gi = 0
            elif gi > n - 1:
                gi = n - 1
            for j in range(3):
                wj = wy0 if j == 0 else (wy1 if j == 1 else wy2)
                gj = by + j
                if gj < 0:
                    gj = 0
                elif gj > n - 1:
                    gj = n - 1
                w = wi * wj
                acc0 += w * values[gi, gj, 0]
                acc1 += w * values[gi, gj, 1]
        out[p, 0] = acc0
        out[p, 1] = acc1
