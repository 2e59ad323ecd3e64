"""Procedural test meshes: boxes, plates, and parametric car bodies.

The car builder produces closed low-poly hulls with the surface mix that
drives radar phenomenology: large tilted panels (hood, windshield, roof
edges) and sharp convex corners.
"""

from __future__ import annotations

import numpy as np

from .geometry import TriangleMesh, save_obj

# Quad face -> two triangles, outward winding handled by caller ordering.
_BOX_QUADS = [
    (0, 1, 2, 3),  # bottom (z = lo), wound downward
    (4, 7, 6, 5),  # top
    (0, 4, 5, 1),  # front (y = lo)
    (1, 5, 6, 2),  # right (x = hi)
    (2, 6, 7, 3),  # back
    (3, 7, 4, 0),  # left
]


def _quads_to_tris(quads):
    tris = []
    for q in quads:
        tris.append([q[0], q[1], q[2]])
        tris.append([q[0], q[2], q[3]])
    return np.array(tris, dtype=np.int32)


def make_box(length_x, depth_y, height_z, center=(0.0, 0.0, 0.0), z_base=None):
    """Axis-aligned closed box. z_base overrides center[2] with a bottom height."""
    cx, cy, cz = center
    if z_base is not None:
        cz = z_base + height_z / 2.0
    hx, hy, hz = length_x / 2.0, depth_y / 2.0, height_z / 2.0
    corners = np.array(
        [
            [cx - hx, cy - hy, cz - hz],
            [cx + hx, cy - hy, cz - hz],
            [cx + hx, cy + hy, cz - hz],
            [cx - hx, cy + hy, cz - hz],
            [cx - hx, cy - hy, cz + hz],
            [cx + hx, cy - hy, cz + hz],
            [cx + hx, cy + hy, cz + hz],
            [cx - hx, cy + hy, cz + hz],
        ]
    )
    return TriangleMesh(corners, _quads_to_tris(_BOX_QUADS))


def make_plate(width, height, center=(0.0, 0.0, 0.0), normal_axis="y"):
    """Single-sided rectangular plate of two triangles.

    normal_axis "y" gives a wall facing the radar (-y normal); "z" a floor
    facing up.
    """
    cx, cy, cz = center
    hw, hh = width / 2.0, height / 2.0
    if normal_axis == "y":
        verts = np.array(
            [
                [cx - hw, cy, cz - hh],
                [cx + hw, cy, cz - hh],
                [cx + hw, cy, cz + hh],
                [cx - hw, cy, cz + hh],
            ]
        )
        tris = np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int32)  # normal toward -y
    elif normal_axis == "z":
        verts = np.array(
            [
                [cx - hw, cy - hh, cz],
                [cx + hw, cy - hh, cz],
                [cx + hw, cy + hh, cz],
                [cx - hw, cy + hh, cz],
            ]
        )
        tris = np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int32)  # normal toward +z
    else:
        raise ValueError("normal_axis must be 'y' or 'z'")
    return TriangleMesh(verts, tris)


def make_car(length=4.4, width=1.8, height=1.5, cabin_frac=0.55, clearance=0.2):
    """Closed sedan-like hull: lower body slab plus a tapered cabin.

    The car points along +x (length axis) at yaw 0, sits on z = 0.
    Hood, windshield, rear window and cabin sides are tilted panels; the
    body sides and ends are vertical panels; all panel junctions are
    sharp edges.
    """
    body_h = 0.45 * (height - clearance)
    cabin_h = height - clearance - body_h
    hx, hy = length / 2.0, width / 2.0
    z0, z1, z2 = clearance, clearance + body_h, height
    cab_x = cabin_frac * hx
    cab_y = 0.80 * hy
    # Body slab corners (0-7), cabin top corners (8-11)
    verts = np.array(
        [
            [-hx, -hy, z0],
            [hx, -hy, z0],
            [hx, hy, z0],
            [-hx, hy, z0],
            [-hx, -hy, z1],
            [hx, -hy, z1],
            [hx, hy, z1],
            [-hx, hy, z1],
            [-cab_x, -cab_y, z2],
            [cab_x * 0.55, -cab_y, z2],
            [cab_x * 0.55, cab_y, z2],
            [-cab_x, cab_y, z2],
        ]
    )
    quads = [
        (0, 3, 2, 1),  # underside
        (0, 1, 5, 4),  # right body side (y = -hy)
        (1, 2, 6, 5),  # front end (x = +hx)
        (2, 3, 7, 6),  # left body side
        (3, 0, 4, 7),  # rear end
        (8, 9, 10, 11),  # roof
        (4, 5, 9, 8),  # right shoulder (tilted)
        (5, 6, 10, 9),  # windshield/hood slope (front, tilted)
        (6, 7, 11, 10),  # left shoulder
        (7, 4, 8, 11),  # rear window slope
    ]
    return TriangleMesh(verts, _quads_to_tris(quads))


def car_library(out_dir, count=3, seed=0):
    """Write `count` parametric car OBJ variants; returns their paths."""
    from pathlib import Path

    rng = np.random.default_rng(seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        mesh = make_car(
            length=float(rng.uniform(3.8, 5.0)),
            width=float(rng.uniform(1.7, 2.0)),
            height=float(rng.uniform(1.4, 1.7)),
            cabin_frac=float(rng.uniform(0.45, 0.62)),
        )
        path = out_dir / f"car_{i:03d}.obj"
        save_obj(mesh, path)
        paths.append(path)
    return paths
