"""Action-stack tests: interpolation, upsampling, gating, distribution."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morphsim.actuation import (
    ActionGrid,
    GateMask,
    bicubic_sample,
    clamp_action,
    compose_coarse_fine,
    distribute_to_particles,
    upsample,
)
from morphsim.errors import ConfigError
from morphsim.materials import MaterialParams, Role
from morphsim.world import make_state


def grid_of(values, side=1.0):
    return ActionGrid(np.asarray(values, dtype=np.float64), (0.0, 0.0), side)


def random_grid(rng, n, scale=1.0):
    return grid_of(rng.uniform(-scale, scale, size=(n, n, 2)))


class TestBicubicSample:
    def test_constant_reproduced_everywhere(self):
        g = grid_of(np.full((8, 8, 2), 0.37))
        rng = np.random.default_rng(0)
        pts = rng.uniform(0, 1, (200, 2))
        np.testing.assert_allclose(bicubic_sample(g, pts), 0.37, atol=1e-12)

    def test_node_exact(self):
        rng = np.random.default_rng(1)
        g = random_grid(rng, 8)
        n = 8
        for i, j in [(0, 0), (3, 5), (7, 7), (2, 0)]:
            uv = ((i + 0.5) / n, (j + 0.5) / n)
            np.testing.assert_allclose(bicubic_sample(g, np.array(uv)), g.values[i, j], atol=1e-12)

    def test_ramp_midpoint_matches_four_point_weights(self):
        # oracle: weights (-1/16, 9/16, 9/16, -1/16) applied to 0,1,2,3 -> 1.5
        vals = np.zeros((4, 4, 2))
        vals[:, :, 0] = np.arange(4)[:, None]
        g = grid_of(vals)
        got = bicubic_sample(g, np.array([(1.5 + 0.5) / 4, 0.5]))
        w = np.array([-1 / 16, 9 / 16, 9 / 16, -1 / 16])
        assert abs(got[0] - w @ np.arange(4)) < 1e-12

    def test_affine_exact_in_interior(self):
        n = 8
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        vals = np.stack([0.1 + 0.03 * i - 0.02 * j, -0.2 + 0.01 * i + 0.04 * j], axis=-1)
        g = grid_of(vals)
        rng = np.random.default_rng(2)
        # interior: full 4-point support, i.e. cell coordinate in [1, n-2]
        lo, hi = (1 + 0.5) / n, (n - 2 + 0.5) / n
        pts = rng.uniform(lo, hi, (300, 2))
        got = bicubic_sample(g, pts)
        u = pts * n - 0.5
        want = np.stack(
            [0.1 + 0.03 * u[:, 0] - 0.02 * u[:, 1], -0.2 + 0.01 * u[:, 0] + 0.04 * u[:, 1]],
            axis=-1,
        )
        np.testing.assert_allclose(got, want, atol=1e-10)

    def test_outside_window_clamps(self):
        rng = np.random.default_rng(3)
        g = random_grid(rng, 8)
        far = bicubic_sample(g, np.array([5.0, 5.0]))
        np.testing.assert_allclose(far, g.values[7, 7], atol=1e-12)


class TestUpsample:
    def test_constant_grid(self):
        g = grid_of(np.full((8, 8, 2), -0.4))
        up = upsample(g, 64)
        assert up.resolution == 64
        np.testing.assert_allclose(up.values, -0.4, atol=1e-12)

    def test_same_resolution_identity(self):
        rng = np.random.default_rng(4)
        g = random_grid(rng, 16)
        up = upsample(g, 16)
        assert np.array_equal(up.values, g.values)

    def test_ramp_interior_exact(self):
        n, m = 4, 8
        vals = np.zeros((n, n, 2))
        vals[:, :, 0] = np.arange(n)[:, None]
        vals[:, :, 1] = np.arange(n)[None, :]
        up = upsample(grid_of(vals), m)
        # fine node j maps to coarse cell coordinate (j + 0.5) * n/m - 0.5
        u = (np.arange(m) + 0.5) * n / m - 0.5
        interior = (u >= 1.0) & (u <= n - 2.0)
        want_x = np.broadcast_to(u[:, None], (m, m))
        got = up.values[np.ix_(np.where(interior)[0], np.where(interior)[0])]
        want = want_x[np.ix_(np.where(interior)[0], np.where(interior)[0])]
        np.testing.assert_allclose(got[:, :, 0], want, atol=1e-12)

    def test_downsample_rejected(self):
        rng = np.random.default_rng(5)
        with pytest.raises(ConfigError):
            upsample(random_grid(rng, 16), 8)

    def test_unsupported_target_rejected(self):
        rng = np.random.default_rng(6)
        with pytest.raises(ConfigError):
            upsample(random_grid(rng, 8), 32)

    def test_resolution_consistency_affine(self):
        # sampling the coarse field and the upsampled field agree on interior
        # probes when the data is affine
        n = 8
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        vals = np.stack([0.05 * i - 0.02 * j, 0.01 * i + 0.03 * j], axis=-1)
        g = grid_of(vals)
        up = upsample(g, 64)
        rng = np.random.default_rng(7)
        # keep the 4-point stencil clear of both grids' clamped border bands
        pts = rng.uniform(0.22, 0.78, (400, 2))
        np.testing.assert_allclose(bicubic_sample(g, pts), bicubic_sample(up, pts), atol=1e-6)

    def test_resolution_consistency_general_bound(self):
        # Catmull-Rom does not refine exactly; the documented bound for
        # arbitrary grids is a few percent of the data range
        rng = np.random.default_rng(8)
        worst = 0.0
        for _ in range(5):
            g = random_grid(rng, 4)
            up = upsample(g, 64)
            pts = rng.uniform(0.05, 0.95, (300, 2))
            dev = np.abs(bicubic_sample(g, pts) - bicubic_sample(up, pts)).max()
            worst = max(worst, dev)
        assert worst < 0.05


class TestCompose:
    def test_gate_closed_returns_upsampled_coarse(self):
        rng = np.random.default_rng(9)
        coarse = random_grid(rng, 8, scale=0.5)
        residual = random_grid(rng, 16)
        out = compose_coarse_fine(coarse, residual, np.zeros((16, 16)), a_max=1.0)
        assert np.array_equal(out.values, upsample(coarse, 16).values)

    def test_gate_open_returns_residual(self):
        rng = np.random.default_rng(10)
        coarse = random_grid(rng, 8, scale=0.5)
        residual = random_grid(rng, 16, scale=0.9)
        out = compose_coarse_fine(coarse, residual, np.ones((16, 16)), a_max=1.0)
        assert np.array_equal(out.values, residual.values)

    def test_half_mask_arithmetic(self):
        coarse = grid_of(np.full((8, 8, 2), 0.2))
        residual = grid_of(np.full((16, 16, 2), 0.6))
        mask = GateMask(np.full((16, 16), 0.5))
        out = compose_coarse_fine(coarse, residual, mask, a_max=1.0)
        np.testing.assert_allclose(out.values, 0.4, atol=1e-12)

    def test_half_mask_identity_on_upsampled_coarse(self):
        rng = np.random.default_rng(11)
        coarse = random_grid(rng, 8, scale=0.5)
        up = upsample(coarse, 16)
        mask = GateMask(np.full((16, 16), 0.5))
        out = compose_coarse_fine(coarse, ActionGrid(up.values, (0, 0), 1.0), mask, a_max=1.0)
        assert np.array_equal(out.values, up.values)

    def test_resolution_mismatch_rejected(self):
        rng = np.random.default_rng(12)
        with pytest.raises(ConfigError):
            compose_coarse_fine(random_grid(rng, 8), random_grid(rng, 8), np.zeros((8, 8)))
        with pytest.raises(ConfigError):
            compose_coarse_fine(
                random_grid(rng, 8), random_grid(rng, 16), np.zeros((8, 8))
            )

    def test_gate_mask_open_interval_enforced(self):
        with pytest.raises(ConfigError):
            GateMask(np.zeros((16, 16)))
        with pytest.raises(ConfigError):
            GateMask(np.ones((16, 16)))


class TestClamp:
    def test_in_range_unchanged(self):
        rng = np.random.default_rng(13)
        g = random_grid(rng, 8, scale=0.5)
        assert np.array_equal(clamp_action(g, 1.0).values, g.values)

    def test_clamps_both_sides(self):
        g = grid_of(np.stack([np.full((4, 4), 2.0), np.full((4, 4), -3.0)], axis=-1))
        out = clamp_action(g, 1.0)
        assert out.values[:, :, 0].max() == 1.0
        assert out.values[:, :, 1].min() == -1.0


def particle_state(points, roles=None):
    pts = np.atleast_2d(points)
    n = len(pts)
    if roles is None:
        roles = np.full(n, Role.ROBOT, dtype=int)
    mat = MaterialParams.from_youngs(1e4, 0.2)
    return make_state(pts, roles, np.zeros(n, dtype=int), [mat])


class TestDistribute:
    def field_grid(self, values, side=0.5, origin=(0.25, 0.25)):
        return ActionGrid(values, np.asarray(origin), side)

    def test_constant_field(self):
        g = self.field_grid(np.full((64, 64, 2), 0.8))
        rng = np.random.default_rng(14)
        state = particle_state(rng.uniform(0.3, 0.7, (100, 2)))
        out = distribute_to_particles(g, state)
        np.testing.assert_allclose(out, 0.8, atol=1e-12)

    def test_zero_field(self):
        g = self.field_grid(np.zeros((64, 64, 2)))
        state = particle_state([[0.5, 0.5]])
        assert np.all(distribute_to_particles(g, state) == 0.0)

    def test_single_node_center_weight(self):
        vals = np.zeros((64, 64, 2))
        vals[30, 40, 0] = 1.0
        g = self.field_grid(vals)
        h = 0.5 / 64
        # particle exactly at node (30, 40)'s world position
        p = g.window_origin + (np.array([30, 40]) + 0.5) * h
        state = particle_state([p])
        out = distribute_to_particles(g, state)
        assert abs(out[0, 0] - 0.75 * 0.75) < 1e-12
        assert out[0, 1] == 0.0

    def test_outside_window_clamps_to_edge(self):
        vals = np.tile(np.linspace(-1, 1, 64)[:, None, None], (1, 64, 2))
        g = self.field_grid(vals)
        state = particle_state([[5.0, 0.5]])  # far right of the window
        out = distribute_to_particles(g, state)
        np.testing.assert_allclose(out[0], vals[63, 0], atol=1e-12)

    def test_non_robot_receives_zero(self):
        g = self.field_grid(np.full((64, 64, 2), 0.7))
        state = particle_state(
            [[0.5, 0.5], [0.5, 0.52]], roles=[Role.ROBOT, Role.PASSIVE]
        )
        out = distribute_to_particles(g, state)
        assert out[0, 0] > 0.0
        assert np.all(out[1] == 0.0)

    def test_linearity(self):
        rng = np.random.default_rng(15)
        a = rng.uniform(-1, 1, (64, 64, 2))
        b = rng.uniform(-1, 1, (64, 64, 2))
        state = particle_state(rng.uniform(0.3, 0.7, (50, 2)))
        da = distribute_to_particles(self.field_grid(a), state)
        db = distribute_to_particles(self.field_grid(b), state)
        dab = distribute_to_particles(self.field_grid(2.5 * a - 1.25 * b), state)
        np.testing.assert_allclose(dab, 2.5 * da - 1.25 * db, atol=1e-9)

    def test_wrong_resolution_rejected(self):
        with pytest.raises(ConfigError):
            distribute_to_particles(self.field_grid(np.zeros((16, 16, 2))), particle_state([[0.5, 0.5]]))

    @given(st.floats(0.26, 0.74), st.floats(0.26, 0.74))
    @settings(max_examples=100, deadline=None)
    def test_bounded_by_clamp(self, px, py):
        rng = np.random.default_rng(16)
        raw = ActionGrid(rng.uniform(-3, 3, (64, 64, 2)), (0.25, 0.25), 0.5)
        g = clamp_action(raw, 1.0).with_window((0.25, 0.25), 0.5)
        state = particle_state([[px, py]])
        out = distribute_to_particles(g, state)
        assert np.abs(out).max() <= 1.0 + 1e-12
