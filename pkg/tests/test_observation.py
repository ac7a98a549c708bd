"""Observation rasterizer tests."""

import numpy as np
import pytest

from morphsim.errors import InvalidStateError
from morphsim.materials import MaterialParams, Role
from morphsim.observation import ObservationImage, center_of_mass, rasterize
from morphsim.world import make_state


def state_of(points, roles=None, velocities=None):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(pts)
    if roles is None:
        roles = np.full(n, Role.ROBOT, dtype=int)
    mat = MaterialParams.from_youngs(1e4, 0.2)
    st = make_state(pts, roles, np.zeros(n, dtype=int), [mat])
    if velocities is not None:
        st.v[:] = velocities
    return st


class TestCenterOfMass:
    def test_single_particle(self):
        st = state_of([[0.3, 0.7]])
        np.testing.assert_allclose(center_of_mass(st), [0.3, 0.7])

    def test_two_equal_masses(self):
        st = state_of([[0.2, 0.2], [0.4, 0.6]])
        np.testing.assert_allclose(center_of_mass(st), [0.3, 0.4])

    def test_bulk_matches_direct_mean(self):
        rng = np.random.default_rng(0)
        pts = rng.uniform(0.2, 0.8, (1000, 2))
        st = state_of(pts)
        np.testing.assert_allclose(center_of_mass(st), pts.mean(axis=0), atol=1e-12)

    def test_ignores_non_robot(self):
        st = state_of([[0.2, 0.2], [0.9, 0.9]], roles=[Role.ROBOT, Role.PASSIVE])
        np.testing.assert_allclose(center_of_mass(st), [0.2, 0.2])

    def test_no_robot_raises(self):
        st = state_of([[0.5, 0.5]], roles=[Role.PASSIVE])
        with pytest.raises(InvalidStateError):
            center_of_mass(st)


class TestRasterize:
    def test_empty_window_is_zeros(self):
        st = state_of([[0.5, 0.5]])
        obs = rasterize(st, window_side=0.5, origin=np.array([10.0, 10.0]))
        assert np.all(obs.pixels == 0.0)

    def test_center_particle_with_velocity(self):
        st = state_of([[0.5, 0.5]], velocities=[[0.8, 0.0]])
        obs = rasterize(st, window_side=0.5, velocity_scale=1.0)
        occ = obs.pixels[:, :, 0]
        assert occ.max() > 0.5  # robot band
        i, j = np.unravel_index(np.argmax(occ), occ.shape)
        assert obs.pixels[i, j, 1] > 0.0
        assert obs.pixels[i, j, 2] == 0.0

    def test_occupancy_saturates_at_one(self):
        pts = np.full((500, 2), 0.5)
        st = state_of(pts)
        obs = rasterize(st, window_side=0.5, saturation_count=4)
        assert obs.pixels[:, :, 0].max() <= 1.0

    def test_channel_bounds(self):
        rng = np.random.default_rng(1)
        st = state_of(rng.uniform(0.4, 0.6, (300, 2)), velocities=rng.normal(0, 5, (300, 2)))
        obs = rasterize(st, window_side=0.5, velocity_scale=3.0)
        assert obs.pixels[:, :, 0].min() >= 0.0 and obs.pixels[:, :, 0].max() <= 1.0
        assert obs.pixels[:, :, 1:].min() >= -1.0 and obs.pixels[:, :, 1:].max() <= 1.0

    def test_zero_occupancy_means_zero_velocity(self):
        rng = np.random.default_rng(2)
        st = state_of(rng.uniform(0.45, 0.55, (50, 2)), velocities=rng.normal(0, 1, (50, 2)))
        obs = rasterize(st, window_side=0.5)
        empty = obs.pixels[:, :, 0] == 0.0
        assert np.all(obs.pixels[empty, 1] == 0.0)
        assert np.all(obs.pixels[empty, 2] == 0.0)

    def test_scene_band_below_robot_band(self):
        st = state_of(
            [[0.5, 0.5], [0.52, 0.5]], roles=[Role.ROBOT, Role.PASSIVE]
        )
        obs = rasterize(st, window_side=0.5)
        vals = obs.pixels[:, :, 0]
        assert vals.max() > 0.5
        scene_vals = vals[(vals > 0) & (vals <= 0.5)]
        assert scene_vals.size > 0

    def test_robot_bitmap_matches_band(self):
        st = state_of([[0.5, 0.5], [0.6, 0.5]], roles=[Role.ROBOT, Role.PASSIVE])
        obs = rasterize(st, window_side=0.5)
        assert obs.robot_bitmap().sum() == (obs.pixels[:, :, 0] > 0.5).sum()

    def test_determinism(self):
        rng = np.random.default_rng(3)
        pts = rng.uniform(0.3, 0.7, (200, 2))
        vel = rng.normal(0, 0.5, (200, 2))
        a = rasterize(state_of(pts, velocities=vel))
        b = rasterize(state_of(pts, velocities=vel))
        assert np.array_equal(a.pixels, b.pixels)

    def test_translation_equivariance_exact_regime(self):
        # dyadic positions and a dyadic shift keep every intermediate exact,
        # so the image must be bitwise identical after translating everything
        base = np.array(
            [[0.5, 0.5], [0.53125, 0.5], [0.5, 0.46875], [0.4375, 0.5625]]
        )
        vel = np.array([[0.25, 0.0], [0.0, -0.5], [0.125, 0.125], [0.0, 0.0]])
        a = rasterize(state_of(base, velocities=vel), window_side=0.5)
        delta = np.array([0.25, -0.125])
        b = rasterize(state_of(base + delta, velocities=vel), window_side=0.5)
        assert np.array_equal(a.pixels, b.pixels)
