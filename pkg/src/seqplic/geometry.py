"""Immutable polyhedron representation and status classification.

A polyhedron is stored as vertex coordinates plus face loops ordered
counter-clockwise when seen from outside. Everything the volume routines
need repeatedly (normals, co-normals, areas, a flat CSR copy of the loops)
is computed once here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateFace, GeometryError, NonPlanarFace, OpenSurface

DEFAULT_ZERO_TOL = 1e-14
DEFAULT_PLANARITY_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Polyhedron:
    """Closed polyhedral surface with planar faces.

    Attributes:
        vertices: (V, 3) vertex coordinates.
        faces: vertex-index loops, counter-clockwise seen from outside.
        face_normals: (F, 3) unit outward normals.
        co_normals: per face, an (m, 3) array of unit in-plane edge normals
            pointing out of the face polygon; row m belongs to the edge from
            loop position m to m + 1.
        base_point: arithmetic mean of the vertices; origin of all level sets.
        volume: enclosed volume.
        face_areas: (F,) polygon areas.
        face_offsets, face_loop: CSR form of ``faces``.
        edge_co_normals, edge_lengths: per-edge data aligned with ``face_loop``.
        convex_faces: (F,) flags, True where the face polygon is convex.
    """

    vertices: np.ndarray
    faces: tuple[tuple[int, ...], ...]
    face_normals: np.ndarray
    co_normals: tuple[np.ndarray, ...]
    base_point: np.ndarray
    volume: float
    face_areas: np.ndarray
    face_offsets: np.ndarray
    face_loop: np.ndarray
    edge_co_normals: np.ndarray
    edge_lengths: np.ndarray
    convex_faces: np.ndarray

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def relative_vertices(self) -> np.ndarray:
        """Vertices shifted so that the base point sits at the origin."""
        rel = getattr(self, "_rel_cache", None)
        if rel is None:
            rel = _frozen(self.vertices - self.base_point)
            object.__setattr__(self, "_rel_cache", rel)
        return rel

    @property
    def characteristic_length(self) -> float:
        return float(self.volume ** (1.0 / 3.0))

    @property
    def surface_area(self) -> float:
        return float(self.face_areas.sum())

    def face_vertices(self, k: int) -> np.ndarray:
        return self.vertices[list(self.faces[k])]

    def levelset(self, normal, points=None) -> np.ndarray:
        """Signed distances <x - base_point, normal> of vertices (or points)."""
        normal = np.asarray(normal, dtype=float)
        if points is None:
            return self.relative_vertices @ normal
        return (np.asarray(points, dtype=float) - self.base_point) @ normal


def _area_vector(pts: np.ndarray) -> np.ndarray:
    centre = pts.mean(axis=0)
    rel = pts - centre
    return 0.5 * np.cross(rel, np.roll(rel, -1, axis=0)).sum(axis=0)


def _is_convex(pts: np.ndarray, normal: np.ndarray, scale: float) -> bool:
    forward = np.roll(pts, -1, axis=0) - pts
    backward = pts - np.roll(pts, 1, axis=0)
    turn = np.cross(backward, forward) @ normal
    return bool(np.all(turn >= -1e-12 * scale * scale))


def build_polyhedron(
    vertices: Sequence[Sequence[float]],
    face_loops: Sequence[Sequence[int]],
    planarity_tol: float = DEFAULT_PLANARITY_TOL,
) -> Polyhedron:
    """Validate raw input and precompute the per-face data.

    Raises:
        NonPlanarFace: a vertex deviates from its face plane by more than
            ``planarity_tol`` times the face's longest edge.
        DegenerateFace: a loop has fewer than three distinct vertices or
            (numerically) zero area.
        OpenSurface: the area-weighted normals do not sum to zero, or the
            enclosed volume is not positive.
    """
    verts = np.array(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 3 or len(verts) < 4:
        raise GeometryError("need at least four 3D vertices")
    if len(face_loops) < 4:
        raise GeometryError("need at least four faces")

    loops: list[tuple[int, ...]] = []
    normals, co_normals, areas, convex = [], [], [], []
    for k, loop in enumerate(face_loops):
        loop = tuple(int(i) for i in loop)
        if len(loop) < 3 or len(set(loop)) != len(loop):
            raise DegenerateFace(f"face {k}: loop {loop} has fewer than 3 distinct vertices")
        if min(loop) < 0 or max(loop) >= len(verts):
            raise GeometryError(f"face {k}: vertex index out of range")
        pts = verts[list(loop)]
        edges = np.roll(pts, -1, axis=0) - pts
        lengths = np.linalg.norm(edges, axis=1)
        longest = float(lengths.max())
        if lengths.min() <= 1e-14 * max(longest, 1e-300):
            raise DegenerateFace(f"face {k}: repeated vertex position")
        av = _area_vector(pts)
        area = float(np.linalg.norm(av))
        if area <= 1e-14 * longest * longest:
            raise DegenerateFace(f"face {k}: zero area")
        normal = av / area
        deviation = np.abs((pts - pts[0]) @ normal).max()
        if deviation > planarity_tol * longest:
            raise NonPlanarFace(f"face {k}: off-plane deviation {deviation:.3e}")
        cn = np.cross(edges, normal)
        cn /= np.linalg.norm(cn, axis=1)[:, None]
        loops.append(loop)
        normals.append(normal)
        co_normals.append(_frozen(cn))
        areas.append(area)
        convex.append(_is_convex(pts, normal, longest))

    normals_arr = np.array(normals)
    areas_arr = np.array(areas)
    total_area = float(areas_arr.sum())
    closure = np.linalg.norm((normals_arr * areas_arr[:, None]).sum(axis=0))
    if closure > 1e-12 * total_area:
        raise OpenSurface(f"area-weighted normals sum to {closure:.3e}")

    base = verts.mean(axis=0)
    heights = np.array([(verts[lp[0]] - base) @ n for lp, n in zip(loops, normals_arr)])
    volume = float((heights * areas_arr).sum() / 3.0)
    if volume <= 0.0:
        raise OpenSurface("non-positive enclosed volume (inverted face orientation?)")

    offsets = np.zeros(len(loops) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(lp) for lp in loops])
    flat = np.concatenate([np.array(lp, dtype=np.int64) for lp in loops])
    flat_cn = np.concatenate(co_normals)
    flat_len = np.concatenate(
        [np.linalg.norm(np.roll(verts[list(lp)], -1, axis=0) - verts[list(lp)], axis=1) for lp in loops]
    )

    return Polyhedron(
        vertices=_frozen(verts),
        faces=tuple(loops),
        face_normals=_frozen(normals_arr),
        co_normals=tuple(co_normals),
        base_point=_frozen(base),
        volume=volume,
        face_areas=_frozen(areas_arr),
        face_offsets=_frozen(offsets),
        face_loop=_frozen(flat),
        edge_co_normals=_frozen(flat_cn),
        edge_lengths=_frozen(flat_len),
        convex_faces=_frozen(np.array(convex, dtype=bool)),
    )


def vertex_status(levelset_value: float, zero_tol: float = DEFAULT_ZERO_TOL) -> int:
    """0 inside the tubular neighbourhood of the plane, otherwise the sign."""
    if abs(levelset_value) < zero_tol:
        return 0
    return 1 if levelset_value > 0 else -1


_EDGE_STATUS = {
    (1, 1): 1,
    (-1, -1): -1,
    (1, -1): 0,
    (-1, 1): 0,
    (1, 0): 2,
    (0, 1): 2,
    (-1, 0): -2,
    (0, -1): -2,
    (0, 0): 3,
}


def edge_status(s_u: int, s_v: int) -> int:
    """Edge status from the statuses of its two end vertices."""
    return _EDGE_STATUS[(int(s_u), int(s_v))]


def face_area(P: Polyhedron, k: int) -> float:
    return float(P.face_areas[k])
