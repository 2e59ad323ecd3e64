import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmwsim.errors import DegenerateCloudError, DimensionMismatchError
from mmwsim.geometry import Pose, Scene, SceneObject, pose_scene
from mmwsim.groundtruth import DepthMap2D, render_depth
from mmwsim.meshes import make_car
from mmwsim.perception import (
    MetricsReport,
    SceneAnnotations,
    aggregate_reports,
    estimate_box,
    evaluate,
    fold_orientation_error,
    min_area_rect,
    shape_metrics,
    to_point_cloud,
)


def _frame(values):
    values = np.asarray(values, np.float32)
    return DepthMap2D(values, -45.0, 45.0, -22.5, 22.5)


def _rect_points(length, width, yaw_deg, center=(0.0, 7.0), n=15):
    """Grid of points on a rotated rectangle; long axis from +y at yaw 0."""
    yaw = math.radians(yaw_deg)
    lon = np.array([math.sin(yaw), math.cos(yaw)])
    lat = np.array([lon[1], -lon[0]])
    u = np.linspace(-length / 2.0, length / 2.0, n)
    v = np.linspace(-width / 2.0, width / 2.0, max(3, n // 2))
    pts = np.array([center + a * lon + b * lat for a in u for b in v])
    return pts


class TestPointCloud:
    def test_center_pixel_maps_to_boresight(self):
        vals = np.zeros((3, 3), np.float32)
        vals[1, 1] = 8.0
        d = DepthMap2D(vals, -3.0, 3.0, -3.0, 3.0)
        cloud = to_point_cloud(d)
        assert cloud.shape == (1, 3)
        np.testing.assert_allclose(cloud[0], [0.0, 8.0, 0.0], atol=1e-9)

    def test_invalid_pixels_excluded(self):
        vals = np.zeros((4, 4), np.float32)
        vals[0, 0] = 5.0
        vals[3, 2] = 6.0
        cloud = to_point_cloud(_frame(vals))
        assert len(cloud) == 2

    def test_ranges_preserved(self):
        rng = np.random.default_rng(8)
        vals = rng.uniform(2, 10, (8, 16)).astype(np.float32)
        d = _frame(vals)
        cloud = to_point_cloud(d)
        np.testing.assert_allclose(
            np.linalg.norm(cloud, axis=1), vals.ravel(), rtol=1e-6
        )


class TestBoxFit:
    @pytest.mark.parametrize("yaw", [0.0, 30.0, 60.0])
    def test_known_rectangle(self, yaw):
        pts = _rect_points(4.4, 1.8, yaw)
        center, long_len, short_len, yaw_est = min_area_rect(pts)
        assert long_len == pytest.approx(4.4, abs=0.02)
        assert short_len == pytest.approx(1.8, abs=0.02)
        assert fold_orientation_error(yaw_est, yaw) < 0.5
        np.testing.assert_allclose(center, [0.0, 7.0], atol=0.02)

    def test_estimate_box_height(self):
        pts2 = _rect_points(4.0, 2.0, 20.0)
        z = np.tile(np.linspace(0.2, 1.5, 5), math.ceil(len(pts2) / 5))[: len(pts2)]
        cloud = np.column_stack([pts2, z])
        box = estimate_box(cloud)
        assert box.height_m == pytest.approx(1.3, abs=1e-9)
        assert box.length_m == pytest.approx(4.0, abs=0.02)

    @settings(max_examples=30, deadline=None)
    @given(yaw=st.floats(0, 180), rot=st.floats(-90, 90))
    def test_rotation_equivariance(self, yaw, rot):
        """Rotating the cloud rotates the fitted yaw by the same amount."""
        pts = _rect_points(4.4, 1.8, yaw, center=(0.0, 0.0))
        _, _, _, yaw_a = min_area_rect(pts)
        c, s = math.cos(math.radians(-rot)), math.sin(math.radians(-rot))
        rotated = pts @ np.array([[c, -s], [s, c]]).T
        _, _, _, yaw_b = min_area_rect(rotated)
        assert fold_orientation_error(yaw_b, yaw_a + rot) < 0.5

    def test_collinear_degenerate(self):
        pts = np.column_stack([np.linspace(0, 5, 10), np.zeros(10), np.zeros(10)])
        with pytest.raises(DegenerateCloudError):
            estimate_box(pts)

    def test_too_few_points(self):
        with pytest.raises(DegenerateCloudError):
            estimate_box(np.zeros((2, 3)))

    def test_sedan_depth_map_box(self):
        """GT depth-map of a 45 deg sedan recovers its length within 10%."""
        car = make_car()
        yaw = math.radians(45.0)
        scene = pose_scene(
            Scene([0, 0, 1], 0.0, [SceneObject(car, Pose([0, 7, 0], yaw), "car")])
        )
        d = render_depth(scene, width=512, height=256)
        box = estimate_box(to_point_cloud(d))
        assert box.length_m == pytest.approx(4.4, rel=0.10)
        assert fold_orientation_error(box.yaw_deg, 90.0 - 45.0) < 5.0


class TestFoldOrientation:
    def test_symmetry_and_bounds(self):
        assert fold_orientation_error(10.0, 170.0) == pytest.approx(20.0)
        assert fold_orientation_error(170.0, 10.0) == pytest.approx(20.0)
        assert fold_orientation_error(0.0, 180.0) == pytest.approx(0.0)
        assert fold_orientation_error(45.0, 135.0) == pytest.approx(90.0)

    @settings(max_examples=50, deadline=None)
    @given(a=st.floats(0, 360), b=st.floats(0, 360))
    def test_range_property(self, a, b):
        e = fold_orientation_error(a, b)
        assert 0.0 <= e <= 90.0
        assert fold_orientation_error(b, a) == pytest.approx(e, abs=1e-9)


class TestShapeMetrics:
    def test_identity_is_perfect(self):
        rng = np.random.default_rng(5)
        vals = rng.uniform(3, 9, (16, 32)).astype(np.float32)
        vals[vals < 4.0] = 0.0
        d = _frame(vals)
        missed, fict = shape_metrics(d, d)
        assert missed == 0.0
        assert fict == 0.0

    def test_half_deleted(self):
        vals = np.full((16, 32), 6.0, np.float32)
        truth = _frame(vals)
        half = vals.copy()
        half[:, 16:] = 0.0
        cand = _frame(half)
        missed, fict = shape_metrics(cand, truth)
        # the 2 px match radius rescues a seam strip; bulk of the right half
        # stays uncovered
        assert 40.0 <= missed <= 50.0
        assert fict == 0.0

    def test_fictitious_blob(self):
        truth_vals = np.zeros((16, 32), np.float32)
        truth_vals[4:8, 4:8] = 5.0
        cand_vals = truth_vals.copy()
        cand_vals[12:14, 20:26] = 5.0  # invented pixels far from any truth
        missed, fict = shape_metrics(_frame(cand_vals), _frame(truth_vals))
        assert missed == 0.0
        n_cand = 16 + 12
        assert fict == pytest.approx(100.0 * 12 / n_cand)

    def test_depth_tolerance(self):
        truth = _frame(np.full((8, 8), 5.0, np.float32))
        near = _frame(np.full((8, 8), 5.25, np.float32))
        far = _frame(np.full((8, 8), 5.5, np.float32))
        assert shape_metrics(near, truth) == (0.0, 0.0)
        missed, fict = shape_metrics(far, truth)
        assert missed == 100.0
        assert fict == 100.0

    def test_empty_maps(self):
        empty = _frame(np.zeros((8, 8), np.float32))
        full = _frame(np.full((8, 8), 5.0, np.float32))
        assert shape_metrics(empty, empty) == (0.0, 0.0)
        assert shape_metrics(empty, full) == (100.0, 0.0)
        assert shape_metrics(full, empty) == (0.0, 100.0)

    def test_frame_mismatch_rejected(self):
        a = _frame(np.zeros((8, 8), np.float32))
        b = DepthMap2D(np.zeros((8, 8), np.float32), -40, 40, -22.5, 22.5)
        with pytest.raises(DimensionMismatchError):
            shape_metrics(a, b)

    def test_monotone_in_deletion(self):
        """Deleting candidate pixels never reduces the missed fraction."""
        rng = np.random.default_rng(9)
        vals = rng.uniform(3, 9, (16, 32)).astype(np.float32)
        truth = _frame(vals)
        prev = -1.0
        cand_vals = vals.copy()
        for cut in (0, 8, 16, 24, 32):
            cand_vals[:, :cut] = 0.0
            missed, _ = shape_metrics(_frame(cand_vals), truth)
            assert missed >= prev
            prev = missed


class TestEvaluate:
    def _gt_sample(self, yaw_deg=45.0):
        car = make_car()
        pose = Pose([0, 7, 0], math.radians(yaw_deg))
        scene = pose_scene(Scene([0, 0, 1], 0.0, [SceneObject(car, pose, "car")]))
        d = render_depth(scene, width=256, height=128)
        verts = scene.objects[0].mesh.vertices
        rng_true = float(np.linalg.norm(verts[:, :2], axis=1).min())
        ann = SceneAnnotations(
            rng_true, 4.4, 1.8, 1.5, (90.0 - yaw_deg) % 360.0, d.valid
        )
        return d, ann

    def test_ground_truth_scores_itself_well(self):
        d, ann = self._gt_sample()
        report = evaluate(d, ann, truth=d)
        assert not report.degenerate
        assert report.pct_surface_missed == 0.0
        assert report.pct_fictitious == 0.0
        assert report.orientation_error_deg < 5.0
        assert report.range_error_m < 0.3

    def test_empty_candidate_degenerate(self):
        d, ann = self._gt_sample()
        empty = DepthMap2D(
            np.zeros_like(d.values), d.az_min_deg, d.az_max_deg,
            d.el_min_deg, d.el_max_deg
        )
        report = evaluate(empty, ann, truth=d)
        assert report.degenerate
        assert math.isnan(report.range_m)

    def test_mask_shape_mismatch(self):
        d, ann = self._gt_sample()
        small = DepthMap2D(np.ones((4, 4), np.float32), -45, 45, -22.5, 22.5)
        with pytest.raises(DimensionMismatchError):
            evaluate(small, ann)

    def test_aggregate(self):
        d, ann = self._gt_sample()
        r = evaluate(d, ann, truth=d)
        agg = aggregate_reports([r, r, r])
        assert agg["count"] == 3
        assert agg["degenerate"] == 0
        assert agg["pct_surface_missed"]["median"] == 0.0
        assert agg["range_error_m"]["p90"] >= agg["range_error_m"]["median"] - 1e-12


class TestAnnotationsIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        mask = rng.random((12, 20)) > 0.6
        ann = SceneAnnotations(6.5, 4.4, 1.8, 1.5, 123.0, mask)
        p = tmp_path / "a.ann.json"
        ann.save(p)
        back = SceneAnnotations.load(p)
        assert back.range_m == ann.range_m
        assert back.yaw_deg == ann.yaw_deg
        np.testing.assert_array_equal(back.mask, ann.mask)

    def test_yaw_normalized(self):
        ann = SceneAnnotations(1, 1, 1, 1, 370.0, np.zeros((2, 2), bool))
        assert ann.yaw_deg == pytest.approx(10.0)
