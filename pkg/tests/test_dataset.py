import filecmp
import json
from pathlib import Path

import numpy as np
import pytest

from mmwsim.config import SimConfig, config_hash
from mmwsim.dataset import (
    Manifest,
    VariationConfig,
    _mesh_order,
    generate_dataset,
    split_kfold,
)
from mmwsim.errors import ConfigError
from mmwsim.meshes import car_library


def _tiny_sim():
    return SimConfig.from_dict(
        {
            "fmcw": {"sample_rate_hz": 1.024e6, "samples_per_sweep": 128},
            "array": {"n_x": 2, "n_z": 2},
            "rcs": {"density": 15.0},
            "grid": {"n_az": 8, "n_el": 4, "n_range": 12},
        }
    )


@pytest.fixture
def mesh_lib(tmp_path):
    return car_library(tmp_path / "meshes", count=3, seed=0)


def _dir_files(d):
    return sorted(p.name for p in Path(d).iterdir())


class TestGeneration:
    def test_layout_and_manifest(self, tmp_path, mesh_lib):
        out = tmp_path / "ds"
        manifest = generate_dataset(mesh_lib, 4, out, _tiny_sim(), seed=11)
        assert len(manifest.samples) == 4
        for rec in manifest.samples:
            assert (out / rec.heat_map).exists()
            assert (out / rec.depth_map).exists()
            assert (out / rec.annotations).exists()
            assert rec.config_hash == manifest.config_hash
        loaded = Manifest.load(out / "manifest.json")
        assert [s.sample_id for s in loaded.samples] == [
            s.sample_id for s in manifest.samples
        ]
        assert loaded.config_hash == manifest.config_hash

    def test_byte_deterministic(self, tmp_path, mesh_lib):
        a = tmp_path / "a"
        b = tmp_path / "b"
        generate_dataset(mesh_lib, 3, a, _tiny_sim(), seed=5)
        generate_dataset(mesh_lib, 3, b, _tiny_sim(), seed=5)
        assert _dir_files(a) == _dir_files(b)
        for name in _dir_files(a):
            assert filecmp.cmp(a / name, b / name, shallow=False), name

    def test_seed_changes_output(self, tmp_path, mesh_lib):
        a = tmp_path / "a"
        b = tmp_path / "b"
        generate_dataset(mesh_lib, 2, a, _tiny_sim(), seed=5)
        generate_dataset(mesh_lib, 2, b, _tiny_sim(), seed=6)
        assert not filecmp.cmp(a / "000000.hwke", b / "000000.hwke", shallow=False)

    def test_resume_skips_existing(self, tmp_path, mesh_lib):
        out = tmp_path / "ds"
        generate_dataset(mesh_lib, 3, out, _tiny_sim(), seed=7)
        ref = {n: (out / n).read_bytes() for n in _dir_files(out)}
        # drop one sample's files and the manifest, then resume
        for suffix in (".hwke", ".hwkd", ".ann.json"):
            (out / f"000001{suffix}").unlink()
        (out / "manifest.json").unlink()
        before = (out / "000000.hwke").stat().st_mtime_ns
        manifest = generate_dataset(mesh_lib, 3, out, _tiny_sim(), seed=7)
        assert len(manifest.samples) == 3
        assert (out / "000000.hwke").stat().st_mtime_ns == before  # untouched
        for name, blob in ref.items():
            assert (out / name).read_bytes() == blob, name

    def test_threads_match_serial(self, tmp_path, mesh_lib):
        a = tmp_path / "a"
        b = tmp_path / "b"
        generate_dataset(mesh_lib, 4, a, _tiny_sim(), seed=9, threads=1)
        generate_dataset(mesh_lib, 4, b, _tiny_sim(), seed=9, threads=3)
        for name in _dir_files(a):
            assert filecmp.cmp(a / name, b / name, shallow=False), name

    def test_bad_mesh_skipped_and_recorded(self, tmp_path, mesh_lib):
        bad = tmp_path / "meshes" / "car_000.obj"
        bad.write_text("v 1 2\n")  # corrupt the first library mesh
        out = tmp_path / "ds"
        logs = []
        manifest = generate_dataset(
            mesh_lib, 6, out, _tiny_sim(), seed=1, log=logs.append
        )
        assert len(manifest.skipped) >= 1
        assert len(manifest.samples) + len(manifest.skipped) == 6
        assert any("skipped" in line for line in logs)
        # the manifest still loads and the skipped ids have no files
        for entry in manifest.skipped:
            assert not (out / f"{entry['sample_id']}.hwke").exists()

    def test_empty_library_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            generate_dataset([], 2, tmp_path / "ds", _tiny_sim())

    def test_bad_count_rejected(self, tmp_path, mesh_lib):
        with pytest.raises(ConfigError):
            generate_dataset(mesh_lib, 0, tmp_path / "ds", _tiny_sim())

    def test_config_hash_tracks_config(self, tmp_path, mesh_lib):
        out = tmp_path / "a"
        m1 = generate_dataset(mesh_lib, 1, out, _tiny_sim(), seed=2)
        sim2 = _tiny_sim()
        sim2.channel.snr_db = 15.0
        m2 = generate_dataset(mesh_lib, 1, tmp_path / "b", sim2, seed=2)
        assert m1.config_hash != m2.config_hash
        assert m1.config_hash == config_hash(m1.config)


class TestMeshOrder:
    def test_round_robin_balanced(self):
        order = _mesh_order(["a", "b", "c"], 9, seed=4)
        assert len(order) == 9
        counts = np.bincount(order, minlength=3)
        np.testing.assert_array_equal(counts, [3, 3, 3])

    def test_partial_cycle(self):
        order = _mesh_order(["a", "b", "c"], 7, seed=4)
        counts = np.bincount(order, minlength=3)
        assert counts.max() - counts.min() <= 1

    def test_seeded(self):
        assert _mesh_order(list("abcde"), 20, seed=1) == _mesh_order(
            list("abcde"), 20, seed=1
        )
        assert _mesh_order(list("abcde"), 20, seed=1) != _mesh_order(
            list("abcde"), 20, seed=2
        )


class TestKfold:
    def _manifest(self, tmp_path, mesh_lib, n=6, k=None):
        return generate_dataset(mesh_lib, n, tmp_path / "ds", _tiny_sim(),
                                seed=3, k=k)

    def test_balanced_partition(self, tmp_path, mesh_lib):
        manifest = self._manifest(tmp_path, mesh_lib)
        manifest = split_kfold(manifest, 3, seed=0)
        counts = np.bincount(manifest.folds, minlength=3)
        assert counts.sum() == 6
        assert counts.max() - counts.min() <= 1

    def test_deterministic(self, tmp_path, mesh_lib):
        manifest = self._manifest(tmp_path, mesh_lib)
        a = list(split_kfold(manifest, 3, seed=1).folds)
        b = list(split_kfold(manifest, 3, seed=1).folds)
        assert a == b
        c = list(split_kfold(manifest, 3, seed=2).folds)
        assert a != c

    def test_k_bounds(self, tmp_path, mesh_lib):
        manifest = self._manifest(tmp_path, mesh_lib)
        with pytest.raises(ConfigError):
            split_kfold(manifest, 1)
        with pytest.raises(ConfigError):
            split_kfold(manifest, 7)

    def test_folds_persisted(self, tmp_path, mesh_lib):
        manifest = self._manifest(tmp_path, mesh_lib, k=2)
        loaded = Manifest.load(tmp_path / "ds" / "manifest.json")
        assert loaded.k == 2
        assert loaded.folds == manifest.folds


class TestVariation:
    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            VariationConfig.from_dict({"pitch_deg": 3.0})

    def test_round_trip(self):
        v = VariationConfig(range_min_m=4.0)
        assert VariationConfig.from_dict(v.to_dict()) == v
