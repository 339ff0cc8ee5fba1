"""Legacy ASCII VTK output.

Two files per snapshot: point values on the Lagrange-subdivided triangulation
(4 sub-cells per element for the quadratic space, 9 for the cubic one, whose
extra interior vertex carries the reconstruction at the centroid), and the
averages plus MOOD flags on the original triangles.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .. import basis

VTK_TRIANGLE = 5


def _fmt(v):
    return f"{v:.16e}"


def _lattice_cells(order):
    """Sub-triangles of the order-``k`` barycentric lattice as local node indices.

    Local nodes are the element's point DoFs followed, for cubic, by the centroid.
    """
    nodes = basis.point_nodes(order)
    if order == 3:
        nodes = np.vstack([nodes, [1 / 3, 1 / 3, 1 / 3]])
    lat = {tuple(np.rint(order * n[1:]).astype(int)): i for i, n in enumerate(nodes)}
    cells = []
    for a in range(order):
        for b in range(order - a):
            cells.append((lat[(a, b)], lat[(a + 1, b)], lat[(a, b + 1)]))
            if a + b < order - 1:
                cells.append((lat[(a + 1, b)], lat[(a + 1, b + 1)], lat[(a, b + 1)]))
    return np.array(cells, dtype=int)


def subdivided(space, state):
    """Points, values and connectivity of the Lagrange-subdivided triangulation."""
    order = space.order
    xy = space.point_xy
    values = state.point_values
    local = space.dofmap.tri_points
    if order == 3:
        T = space.n_triangles
        c_bary = np.full((T, 3), 1.0 / 3.0)
        c_vals = space.evaluate(state, np.arange(T), c_bary)
        xy = np.vstack([xy, space.centroids])
        values = np.vstack([values, c_vals])
        local = np.hstack([local, (space.n_points + np.arange(T))[:, None]])
    cells = local[:, _lattice_cells(order)].reshape(-1, 3)
    return xy, values, cells


def _component_names(m):
    if m == 1:
        return ["u"]
    if m == 4:
        return ["rho", "rho_u", "rho_v", "E"]
    return [f"u{i}" for i in range(m)]


def _grid_block(lines, xy, cells):
    lines.append(f"POINTS {len(xy)} double")
    lines += [f"{_fmt(x)} {_fmt(y)} {_fmt(0.0)}" for x, y in xy]
    lines.append(f"CELLS {len(cells)} {4 * len(cells)}")
    lines += [f"3 {a} {b} {c}" for a, b, c in cells]
    lines.append(f"CELL_TYPES {len(cells)}")
    lines += [str(VTK_TRIANGLE)] * len(cells)


def _scalars(lines, name, data, kind="double"):
    lines.append(f"SCALARS {name} {kind} 1")
    lines.append("LOOKUP_TABLE default")
    if kind == "int":
        lines += [str(int(v)) for v in data]
    else:
        lines += [_fmt(float(v)) for v in data]


def _header(title):
    return ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID"]


def write_points(path, space, state, title="active flux point values"):
    xy, values, cells = subdivided(space, state)
    lines = _header(title)
    _grid_block(lines, xy, cells)
    lines.append(f"POINT_DATA {len(xy)}")
    for k, name in enumerate(_component_names(values.shape[1])):
        _scalars(lines, name, values[:, k])
    Path(path).write_text("\n".join(lines) + "\n")


def write_cells(path, space, state, flags=None, title="active flux averages"):
    mesh = space.mesh
    lines = _header(title)
    _grid_block(lines, mesh.vertices, mesh.triangles)
    lines.append(f"CELL_DATA {mesh.n_triangles}")
    for k, name in enumerate(_component_names(state.averages.shape[1])):
        _scalars(lines, name, state.averages[:, k])
    if flags is not None:
        _scalars(lines, "mood_flag", flags.triangles.astype(int), "int")
        _scalars(lines, "mood_cause", flags.triangle_cause, "int")
    else:
        _scalars(lines, "mood_flag", np.zeros(mesh.n_triangles, int), "int")
    Path(path).write_text("\n".join(lines) + "\n")


def write_fields(space, state, flags, stem):
    """Write ``<stem>_points.vtk`` and ``<stem>_cells.vtk``; returns both paths."""
    stem = Path(stem)
    p = stem.with_name(stem.name + "_points.vtk")
    c = stem.with_name(stem.name + "_cells.vtk")
    write_points(p, space, state)
    write_cells(c, space, state, flags)
    return p, c


def read_vtk(path):
    """Minimal reader for files produced here: points, cells and named data arrays."""
    tokens = Path(path).read_text().split("\n")
    i = 0
    out = {"point_data": {}, "cell_data": {}}
    section = None
    while i < len(tokens):
        line = tokens[i].strip()
        i += 1
        if line.startswith("POINTS"):
            n = int(line.split()[1])
            out["points"] = np.array([[float(v) for v in tokens[i + k].split()] for k in range(n)])
            i += n
        elif line.startswith("CELLS"):
            n = int(line.split()[1])
            out["cells"] = np.array([[int(v) for v in tokens[i + k].split()[1:]] for k in range(n)])
            i += n
        elif line.startswith("CELL_TYPES"):
            i += int(line.split()[1])
        elif line.startswith("POINT_DATA"):
            section, count = "point_data", int(line.split()[1])
        elif line.startswith("CELL_DATA"):
            section, count = "cell_data", int(line.split()[1])
        elif line.startswith("SCALARS"):
            name = line.split()[1]
            i += 1  # lookup table
            out[section][name] = np.array([float(tokens[i + k]) for k in range(count)])
            i += count
    return out
