"""Built-in test polyhedra and OFF file ingestion."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import GeometryError
from .geometry import Polyhedron, build_polyhedron


def unit_cube(edge: float = 1.0) -> Polyhedron:
    """Axis-aligned cube [0, edge]^3."""
    v = edge * np.array(
        [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]],
        dtype=float,
    )
    faces = [
        (0, 3, 2, 1),  # z = 0
        (4, 5, 6, 7),  # z = 1
        (0, 1, 5, 4),  # y = 0
        (2, 3, 7, 6),  # y = 1
        (0, 4, 7, 3),  # x = 0
        (1, 2, 6, 5),  # x = 1
    ]
    return build_polyhedron(v, faces)


def _hull_faces(points: np.ndarray, directions: np.ndarray) -> list[tuple[int, ...]]:
    """Face loops of a convex polytope whose faces have the given outward directions."""
    faces = []
    for d in directions:
        d = d / np.linalg.norm(d)
        h = points @ d
        idx = np.flatnonzero(h > h.max() - 1e-9)
        centre = points[idx].mean(axis=0)
        u = points[idx[0]] - centre
        u /= np.linalg.norm(u)
        w = np.cross(d, u)
        ang = np.arctan2((points[idx] - centre) @ w, (points[idx] - centre) @ u)
        faces.append(tuple(int(i) for i in idx[np.argsort(ang)]))
    return faces


def regular_dodecahedron(edge: float = 1.0) -> Polyhedron:
    """Regular dodecahedron centred at the origin."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    pts = [(x, y, z) for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]
    for a in (-1, 1):
        for b in (-1, 1):
            pts.append((0.0, a / phi, b * phi))
            pts.append((a / phi, b * phi, 0.0))
            pts.append((b * phi, 0.0, a / phi))
    points = np.array(pts, dtype=float) * (edge * phi / 2.0)
    # face directions are the icosahedron vertices
    dirs = []
    for a in (-1, 1):
        for b in (-1, 1):
            dirs += [(0.0, a * phi, b), (a * phi, b, 0.0), (b, 0.0, a * phi)]
    return build_polyhedron(points, _hull_faces(points, np.array(dirs)))


def notched_cube(notch_x: float = 0.5, notch_y: float = 0.7) -> Polyhedron:
    """Unit cube with the prism [notch_x, 1] x [notch_y, 1] x [0, 1] removed.

    The top and bottom faces are non-convex L-shaped hexagons.
    """
    a, b = float(notch_x), float(notch_y)
    outline = [(0.0, 0.0), (1.0, 0.0), (1.0, b), (a, b), (a, 1.0), (0.0, 1.0)]
    n = len(outline)
    verts = [(x, y, 0.0) for x, y in outline] + [(x, y, 1.0) for x, y in outline]
    faces = [tuple(reversed(range(n))), tuple(range(n, 2 * n))]
    for i in range(n):
        j = (i + 1) % n
        faces.append((i, j, n + j, n + i))
    return build_polyhedron(verts, faces)


def read_off(path: str | Path) -> Polyhedron:
    """Read a polyhedron from an OFF text file."""
    path = Path(path)
    tokens: list[str] = []
    with path.open() as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens:
        raise GeometryError(f"{path}: empty file")
    if tokens[0] == "OFF":
        tokens = tokens[1:]
    elif tokens[0].startswith("OFF"):
        tokens[0] = tokens[0][3:]
    try:
        nv, nf = int(tokens[0]), int(tokens[1])
        pos = 3
        verts = [[float(t) for t in tokens[pos + 3 * i : pos + 3 * i + 3]] for i in range(nv)]
        pos += 3 * nv
        faces = []
        for _ in range(nf):
            m = int(tokens[pos])
            faces.append([int(t) for t in tokens[pos + 1 : pos + 1 + m]])
            pos += 1 + m
    except (IndexError, ValueError) as exc:
        raise GeometryError(f"{path}: malformed OFF data ({exc})") from exc
    return build_polyhedron(verts, faces)


def shape_by_name(name: str) -> Polyhedron:
    """Resolve 'cube', 'dodeca', 'notched' or 'off:<path>'."""
    if name == "cube":
        return unit_cube()
    if name in ("dodeca", "dodecahedron"):
        return regular_dodecahedron()
    if name in ("notched", "notched-cube"):
        return notched_cube()
    if name.startswith("off:"):
        return read_off(name[4:])
    raise ValueError(f"unknown shape {name!r}")
