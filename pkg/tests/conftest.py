import numpy as np
import pytest

from mmwsim.geometry import Pose, Scene, SceneObject
from mmwsim.meshes import make_car, make_plate


@pytest.fixture
def car_scene():
    """Broadside sedan 7 m ahead, radar 1 m up."""
    return Scene(
        radar_origin=[0.0, 0.0, 1.0],
        ground_height=0.0,
        objects=[SceneObject(make_car(), Pose([0.0, 7.0, 0.0], 0.0), "car")],
    )


@pytest.fixture
def wall_scene():
    """Large wall 10 m ahead, facing the radar and covering the default
    viewing frustum corner to corner."""
    wall = make_plate(24.0, 14.0, center=(0.0, 10.0, 0.0), normal_axis="y")
    return Scene(
        radar_origin=[0.0, 0.0, 0.0],
        ground_height=-20.0,
        objects=[SceneObject(wall, Pose(), "wall")],
    )


def write_cube_obj(path):
    """Unit cube OBJ with quad faces (exercises fan triangulation)."""
    lines = []
    for z in (0.0, 1.0):
        for y in (0.0, 1.0):
            for x in (0.0, 1.0):
                lines.append(f"v {x} {y} {z}")
    # vertex order: index = 1 + x + 2y + 4z
    quads = [
        (1, 2, 4, 3),  # z = 0
        (5, 7, 8, 6),  # z = 1
        (1, 5, 6, 2),  # y = 0
        (3, 4, 8, 7),  # y = 1
        (1, 3, 7, 5),  # x = 0
        (2, 6, 8, 4),  # x = 1
    ]
    for q in quads:
        lines.append("f " + " ".join(str(i) for i in q))
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def cube_obj(tmp_path):
    return write_cube_obj(tmp_path / "cube.obj")
