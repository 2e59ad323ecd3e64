import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from mmwsim.channel import (
    PATH_DIRECT,
    PATH_GROUND_BOUNCE,
    ChannelConfig,
    jitter_positions,
    trace_paths,
    trace_paths_block,
)
from mmwsim.errors import ConfigError
from mmwsim.geometry import Scene
from mmwsim.rcs import CLASS_DIFFUSE, CLASS_SPECULAR, PointReflectorCloud


def _cloud(positions, classes=None, reflectivity=None):
    positions = np.atleast_2d(np.asarray(positions, float))
    n = len(positions)
    classes = (
        np.full(n, CLASS_DIFFUSE, dtype=np.uint8)
        if classes is None
        else np.asarray(classes, dtype=np.uint8)
    )
    reflectivity = (
        np.ones(n) if reflectivity is None else np.asarray(reflectivity, float)
    )
    normals = np.tile([0.0, -1.0, 0.0], (n, 1))
    return PointReflectorCloud(positions, reflectivity, normals,
                               classes, np.zeros(n, dtype=np.int32))


def _scene(origin=(0, 0, 1), ground=0.0):
    return Scene(np.asarray(origin, float), ground, [])


class TestDirect:
    def test_single_reflector_round_trip(self):
        cloud = _cloud([0.0, 10.0, 1.0])
        paths = trace_paths(cloud, [0, 0, 1], _scene(), ChannelConfig(multipath=False))
        assert len(paths) == 1
        assert paths.kinds[0] == PATH_DIRECT
        assert paths.lengths[0] == pytest.approx(20.0)
        assert paths.gains[0] == pytest.approx(1.0 / 10.0**2)

    def test_amplitude_spreading_law(self):
        cloud = _cloud([[0.0, 5.0, 1.0], [0.0, 10.0, 1.0]])
        paths = trace_paths(cloud, [0, 0, 1], _scene(), ChannelConfig(multipath=False))
        # doubling range quarters the amplitude
        assert paths.gains[0] / paths.gains[1] == pytest.approx(4.0)

    def test_reflectivity_scales_gain(self):
        cloud = _cloud([[0.0, 10.0, 1.0], [0.0, 10.0, 1.0]], reflectivity=[1.0, 4.0])
        paths = trace_paths(cloud, [0, 0, 1], _scene(), ChannelConfig(multipath=False))
        assert paths.gains[1] / paths.gains[0] == pytest.approx(4.0)

    def test_specular_direct_suppressed(self):
        cloud = _cloud([0.0, 10.0, 1.0], classes=[CLASS_SPECULAR])
        paths = trace_paths(cloud, [0, 0, 1], _scene(), ChannelConfig(multipath=True))
        direct = paths.kinds == PATH_DIRECT
        bounce = paths.kinds == PATH_GROUND_BOUNCE
        assert np.all(paths.gains[direct] == 0.0)
        assert np.all(np.abs(paths.gains[bounce]) > 0.0)

    def test_below_ground_antenna_rejected(self):
        cloud = _cloud([0.0, 10.0, 1.0])
        with pytest.raises(ConfigError):
            trace_paths(cloud, [0, 0, -1], _scene(), ChannelConfig())


def _shortest_bounce(tx, p, ground_z):
    """Brute-force ground reflection: minimize tx->g->p over g on the plane."""
    tx, p = np.asarray(tx, float), np.asarray(p, float)

    def total(xy):
        g = np.array([xy[0], xy[1], ground_z])
        return np.linalg.norm(g - tx) + np.linalg.norm(p - g)

    best = min(
        (
            minimize(total, x0, method="Nelder-Mead",
                     options={"xatol": 1e-10, "fatol": 1e-12})
            for x0 in ([0.0, 5.0], [0.0, 1.0], [1.0, 8.0])
        ),
        key=lambda r: r.fun,
    )
    return best.fun


class TestGroundBounce:
    def test_mirror_image_matches_shortest_path(self):
        tx = np.array([0.0, 0.0, 1.0])
        p = np.array([0.5, 10.0, 2.0])
        cloud = _cloud(p)
        paths = trace_paths(cloud, tx, _scene(), ChannelConfig(multipath=True))
        bounce_len = paths.lengths[paths.kinds == PATH_GROUND_BOUNCE][0]
        oracle = _shortest_bounce(tx, p, 0.0) + np.linalg.norm(p - tx)
        assert bounce_len == pytest.approx(oracle, abs=1e-6)

    def test_ghost_strictly_longer(self):
        cloud = _cloud([0.0, 10.0, 2.0])
        paths = trace_paths(cloud, [0, 0, 1], _scene(), ChannelConfig(multipath=True))
        d = paths.lengths[paths.kinds == PATH_DIRECT][0]
        g = paths.lengths[paths.kinds == PATH_GROUND_BOUNCE][0]
        assert g > d

    @settings(max_examples=40, deadline=None)
    @given(
        px=st.floats(-3, 3),
        py=st.floats(4, 15),
        pz=st.floats(0.05, 2.5),
        h=st.floats(0.3, 2.0),
    )
    def test_ghost_longer_property(self, px, py, pz, h):
        cloud = _cloud([px, py, pz])
        paths = trace_paths(cloud, [0, 0, h], _scene(origin=(0, 0, h)),
                            ChannelConfig(multipath=True))
        d = paths.lengths[paths.kinds == PATH_DIRECT][0]
        g = paths.lengths[paths.kinds == PATH_GROUND_BOUNCE][0]
        assert g > d

    def test_ground_coefficient_scales_ghost(self):
        cloud = _cloud([0.0, 10.0, 2.0])
        strong = trace_paths(cloud, [0, 0, 1], _scene(),
                             ChannelConfig(ground_reflection=-0.8))
        weak = trace_paths(cloud, [0, 0, 1], _scene(),
                           ChannelConfig(ground_reflection=-0.2))
        gs = strong.gains[strong.kinds == PATH_GROUND_BOUNCE][0]
        gw = weak.gains[weak.kinds == PATH_GROUND_BOUNCE][0]
        assert abs(gs) / abs(gw) == pytest.approx(4.0)

    def test_multipath_off_drops_ghosts(self):
        cloud = _cloud([[0.0, 10.0, 2.0], [1.0, 8.0, 1.0]])
        paths = trace_paths(cloud, [0, 0, 1], _scene(), ChannelConfig(multipath=False))
        assert len(paths) == 2
        assert np.all(paths.kinds == PATH_DIRECT)


class TestBlockAndJitter:
    def test_block_matches_per_element(self):
        rng = np.random.default_rng(3)
        cloud = _cloud(rng.uniform([-2, 5, 0.2], [2, 12, 2.0], (20, 3)))
        rx = rng.uniform([-0.1, -0.001, 0.9], [0.1, 0.001, 1.1], (5, 3))
        cfg = ChannelConfig(multipath=True)
        scene = _scene()
        lengths, gains, kinds = trace_paths_block(cloud, rx, scene, cfg)
        for e in range(5):
            single = trace_paths(cloud, rx[e], scene, cfg)
            np.testing.assert_array_equal(lengths[e], single.lengths)
            np.testing.assert_array_equal(gains[e], single.gains)
            np.testing.assert_array_equal(kinds[e], single.kinds)

    def test_jitter_deterministic(self):
        pos = np.zeros((10, 3))
        a = jitter_positions(pos, 2e-4, seed=7)
        b = jitter_positions(pos, 2e-4, seed=7)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, jitter_positions(pos, 2e-4, seed=8))

    def test_zero_jitter_identity(self):
        pos = np.arange(30, dtype=float).reshape(10, 3)
        np.testing.assert_array_equal(jitter_positions(pos, 0.0, seed=1), pos)

    def test_jitter_scale(self):
        pos = np.zeros((4000, 3))
        out = jitter_positions(pos, 2e-4, seed=0)
        assert np.std(out) == pytest.approx(2e-4, rel=0.1)


class TestConfig:
    def test_ground_reflection_dict_form(self):
        cfg = ChannelConfig.from_dict(
            {"ground_reflection": {"magnitude": 0.5, "phase_deg": 180.0}}
        )
        assert cfg.ground_reflection == pytest.approx(-0.5)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            ChannelConfig.from_dict({"snr": 10})

    def test_bad_magnitude_rejected(self):
        with pytest.raises(ConfigError):
            ChannelConfig(ground_reflection=1.5)
