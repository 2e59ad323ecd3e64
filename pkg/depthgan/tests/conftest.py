import json
import shutil
import subprocess

import pytest

# A box-shaped stand-in car: 8 vertices, 12 triangles, written as OBJ text
# so fixture generation touches the simulator only through its CLI.
_BOX_OBJ = """\
v {hx} {hy} 0.0
v {hx} -{hy} 0.0
v -{hx} -{hy} 0.0
v -{hx} {hy} 0.0
v {hx} {hy} {h}
v {hx} -{hy} {h}
v -{hx} -{hy} {h}
v -{hx} {hy} {h}
f 1 2 3
f 1 3 4
f 5 8 7
f 5 7 6
f 1 5 6
f 1 6 2
f 2 6 7
f 2 7 3
f 3 7 8
f 3 8 4
f 4 8 5
f 4 5 1
"""

_SIM_CONFIG = {
    "fmcw": {
        "bandwidth_hz": 1.5e9,
        "sweep_s": 1e-3,
        "sample_rate_hz": 256000.0,
        "samples_per_sweep": 256,
    },
    "array": {"n_x": 2, "n_z": 2},
    "rcs": {"density": 15.0},
}


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory):
    """A 16-sample simulator dataset with a 2-fold assignment."""
    if shutil.which("mmwsim") is None:
        pytest.skip("simulator CLI not on PATH")
    root = tmp_path_factory.mktemp("radar_dataset")
    meshes = root / "meshes"
    meshes.mkdir()
    for name, (hx, hy, h) in [("boxcar", (2.25, 0.9, 1.5)),
                              ("boxvan", (2.4, 0.95, 1.9))]:
        (meshes / f"{name}.obj").write_text(_BOX_OBJ.format(hx=hx, hy=hy, h=h))
    config = root / "sim.json"
    config.write_text(json.dumps(_SIM_CONFIG))
    out = root / "ds"
    subprocess.run(
        ["mmwsim", "dataset", "--config", str(config), "--meshes", str(meshes),
         "--out", str(out), "--count", "16", "--k", "2", "--seed", "7"],
        check=True, capture_output=True,
    )
    return out
