import numpy as np
import pytest

from depthgan import formats
from depthgan.errors import FileFormatError


def test_depth_map_round_trip(tmp_path):
    values = np.arange(12, dtype=np.float32).reshape(3, 4)
    d = formats.DepthMapFile(values, -45.0, 45.0, -20.0, 20.0)
    path = tmp_path / "a.hwkd"
    formats.save_depth_map(d, path)
    back = formats.load_depth_map(path)
    assert np.array_equal(back.values, values)
    assert back.az_min_deg == -45.0 and back.el_max_deg == 20.0


def test_depth_map_bad_magic(tmp_path):
    path = tmp_path / "bad.hwkd"
    path.write_bytes(b"NOPE" + bytes(60))
    with pytest.raises(FileFormatError):
        formats.load_depth_map(path)


def test_heat_map_truncated(tmp_path):
    path = tmp_path / "short.hwke"
    path.write_bytes(b"HWKE")
    with pytest.raises(FileFormatError):
        formats.load_heat_map(path)


def test_heat_map_payload_mismatch(tmp_path):
    import struct

    header = struct.pack("<4sHHHH6f", b"HWKE", 1, 2, 2, 2, *([0.0] * 6))
    path = tmp_path / "bad.hwke"
    path.write_bytes(header + bytes(4))  # needs 32 payload bytes
    with pytest.raises(FileFormatError):
        formats.load_heat_map(path)


def test_grid_orientation_round_trip():
    rng = np.random.default_rng(0)
    img = rng.random((128, 256)).astype(np.float32)
    grid = formats.depth_file_to_grid(img)
    assert grid.shape == (256, 128)
    assert np.array_equal(formats.depth_grid_to_file(grid), img)
    # Row 0 of the file frame is the highest elevation, i.e. the last
    # elevation column of the grid.
    assert np.array_equal(grid[:, -1], img[0])


def test_manifest_missing_key(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text('{"samples": []}')
    with pytest.raises(FileFormatError):
        formats.load_manifest(path)


def test_manifest_loads_dataset(dataset_dir):
    samples, config = formats.load_manifest(dataset_dir / "manifest.json")
    assert len(samples) == 16
    assert sorted({s.fold for s in samples}) == [0, 1]
    assert all(s.heat_map.exists() and s.depth_map.exists() for s in samples)
    assert "fmcw" in config["simulation"]


def test_dataset_files_parse(dataset_dir):
    samples, _ = formats.load_manifest(dataset_dir / "manifest.json")
    heat = formats.load_heat_map(samples[0].heat_map)
    depth = formats.load_depth_map(samples[0].depth_map)
    assert heat.power.shape == (64, 32, 96)
    assert depth.values.shape == (128, 256)
    assert heat.power.dtype == np.float32
    assert depth.values.min() >= 0.0
