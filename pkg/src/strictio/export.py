"""Deterministic text output: JSON, CSV and OBJ meshes.

Floats are written with 17 significant digits so that every value round
trips exactly; JSON keys are sorted.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

__all__ = ["fmt", "dumps_json", "write_json", "write_csv", "export_mesh", "grid_mesh", "to_plain"]


def fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def to_plain(obj):
    """numpy scalars/arrays, tuples and dataclass-like objects to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if callable(obj):
        return None
    return str(obj)


def _dump(obj, out: list, indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted(obj.items())
        for n, (k, v) in enumerate(items):
            out.append(pad + json.dumps(k) + ": ")
            _dump(v, out, indent, level + 1)
            out.append(",\n" if n < len(items) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for n, v in enumerate(obj):
            out.append(pad)
            _dump(v, out, indent, level + 1)
            out.append(",\n" if n < len(obj) - 1 else "\n")
        out.append(end + "]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        # JSON has no nan/inf; emit them as strings
        out.append(fmt(obj) if math.isfinite(obj) else json.dumps(fmt(obj)))
    else:
        out.append(json.dumps(obj))


def dumps_json(obj, indent: int = 2) -> str:
    out: list = []
    _dump(to_plain(obj), out, indent, 0)
    return "".join(out) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps_json(obj))
    return path


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
    path.write_text(buf.getvalue())
    return path


def grid_mesh(points: np.ndarray):
    """Vertices and triangles of an (n, m, d) grid of points."""
    n, m = points.shape[:2]
    verts = points.reshape(n * m, -1)
    faces = []
    for i in range(n - 1):
        for j in range(m - 1):
            a = i * m + j
            b, c, d = a + 1, a + m, a + m + 1
            faces.append((a, c, b))
            faces.append((b, c, d))
    return verts, np.array(faces, dtype=int).reshape(-1, 3)


def export_mesh(sampler, t_range, u_range, nodes=(50, 50), fix: str = "r", value: float = 0.0,
                drop: int = 4, path=None, fmt_: str = "obj"):
    """Triangulated grid of a slice of f(t, s, r), projected to R^3.

    ``fix`` names the plane coordinate held at ``value`` ("r" or "s"); the
    other one runs over ``u_range``.  Coordinate ``drop`` (1-based) is
    removed for the 3D projection.  ``fmt_="csv"`` writes (t, u, x1..x4)
    rows instead.  Returns (vertices, faces) of the projected mesh.
    """
    if fix not in ("r", "s"):
        raise ValueError("fix must be 'r' or 's'")
    if drop not in (1, 2, 3, 4):
        raise ValueError("drop must be 1..4")
    nt, nu = int(nodes[0]), int(nodes[1])
    if nt < 2 or nu < 2:
        raise ValueError("mesh needs at least 2 nodes per direction")
    ts = np.linspace(t_range[0], t_range[1], nt)
    us = np.linspace(u_range[0], u_range[1], nu)
    P = np.empty((nt, nu, 4))
    for i, t in enumerate(ts):
        s_vals = us if fix == "r" else np.full(nu, value)
        r_vals = np.full(nu, value) if fix == "r" else us
        P[i] = sampler(float(t), s_vals, r_vals)
    keep = [k for k in range(4) if k != drop - 1]
    verts, faces = grid_mesh(P[:, :, keep])
    if path is not None:
        path = Path(path)
        if fmt_ == "csv":
            rows = [[float(t), float(u), *map(float, P[i, j])] for i, t in enumerate(ts) for j, u in enumerate(us)]
            write_csv(path, ["t", "s" if fix == "r" else "r", "x1", "x2", "x3", "x4"], rows)
        else:
            lines = [f"# slice {fix}={fmt(value)}, coordinate {drop} dropped\n"]
            lines += ["v " + " ".join(fmt(x) for x in v) + "\n" for v in verts]
            lines += [f"f {a + 1} {b + 1} {c + 1}\n" for a, b, c in faces]
            path.write_text("".join(lines))
    return verts, faces


def write_polyline_obj(path, points: np.ndarray, drop: int = 4) -> Path:
    keep = [k for k in range(4) if k != drop - 1]
    P = np.asarray(points)[:, keep]
    lines = ["v " + " ".join(fmt(x) for x in v) + "\n" for v in P]
    if len(P) > 1:
        lines.append("l " + " ".join(str(i + 1) for i in range(len(P))) + "\n")
    path = Path(path)
    path.write_text("".join(lines))
    return path
