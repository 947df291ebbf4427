"""Field and table writers (CSV and legacy ASCII VTK)."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .fe_space import FeFunction


def fmt(x) -> str:
    """17 significant digits, lossless for float64."""
    if isinstance(x, str):
        return x
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{float(x):.17g}"


def write_field_csv(u: FeFunction, path) -> None:
    """One line per DOF node: ``x,y,u``."""
    nodes = u.space.nodes
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "u"])
        for (x, y), v in zip(nodes, u.coefficients):
            w.writerow([fmt(x), fmt(y), fmt(v)])


def read_field_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def write_vtk(u: FeFunction, path, name: str = "u", title: str = "monge-ampere solution") -> None:
    """Legacy ASCII VTK 3.0 unstructured grid: mesh vertices, triangles, vertex values of `u`."""
    mesh = u.space.mesh
    verts = mesh.vertices
    tris = mesh.triangles
    # vertex DOFs come first in the global numbering
    values = u.coefficients[: len(verts)]
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{title}\n")
        fh.write("ASCII\n")
        fh.write("DATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {len(verts)} double\n")
        for x, y in verts:
            fh.write(f"{fmt(x)} {fmt(y)} 0\n")
        fh.write(f"CELLS {len(tris)} {4 * len(tris)}\n")
        for a, b, c in tris:
            fh.write(f"3 {a} {b} {c}\n")
        fh.write(f"CELL_TYPES {len(tris)}\n")
        fh.write("5\n" * len(tris))
        fh.write(f"POINT_DATA {len(verts)}\n")
        fh.write(f"SCALARS {name} double 1\n")
        fh.write("LOOKUP_TABLE default\n")
        for v in values:
            fh.write(f"{fmt(v)}\n")


def read_vtk(path) -> dict:
    """Parse the subset written by `write_vtk` into points, cells and point scalars."""
    tokens = Path(path).read_text().split("\n")
    out = {}
    i = 0
    while i < len(tokens):
        line = tokens[i].strip()
        if line.startswith("POINTS"):
            n = int(line.split()[1])
            out["points"] = np.array([list(map(float, tokens[i + 1 + k].split())) for k in range(n)])
            i += n
        elif line.startswith("CELLS"):
            n = int(line.split()[1])
            out["cells"] = np.array([list(map(int, tokens[i + 1 + k].split()))[1:] for k in range(n)])
            i += n
        elif line.startswith("CELL_TYPES"):
            n = int(line.split()[1])
            out["cell_types"] = np.array([int(tokens[i + 1 + k]) for k in range(n)])
            i += n
        elif line.startswith("LOOKUP_TABLE"):
            n = len(out["points"])
            out["scalars"] = np.array([float(tokens[i + 1 + k]) for k in range(n)])
            i += n
        i += 1
    return out


def write_rate_table(rows, path) -> None:
    """Rows of (h, l2, l2_rate, h1, h1_rate); error entries may be the string 'diverged'."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["h", "l2", "l2_rate", "h1", "h1_rate"])
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_rate_table(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_iterations(report, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "h1_increment", "residual_sup", "min_lambda1", "max_lambda2"])
        for row in report.rows():
            w.writerow([row[0], *map(fmt, row[1:])])
