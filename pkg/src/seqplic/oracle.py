"""Reference volumes by explicit clipping and tetrahedral fan summation.

This path shares nothing with the face-based volume functions: every clip
rebuilds a full boundary representation (clipped face polygons plus cap
loops recovered from unmatched directed edges) and the volume is summed over
signed tetrahedra from the vertex mean. It is slow and only meant for
verification.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence

import numpy as np

from .errors import StarPointViolation
from .geometry import Polyhedron


class _Body:
    """Growable vertex list plus face index loops."""

    def __init__(self, vertices: np.ndarray, faces: Iterable[Sequence[int]]):
        self.vertices = [np.asarray(v, dtype=float) for v in vertices]
        self.faces = [list(f) for f in faces]


def _clip(body: _Body, normal: np.ndarray, offset: float, tol: float) -> _Body:
    """Keep the part with <x, normal> <= offset."""
    dist = np.array([v @ normal - offset for v in body.vertices])
    dist[np.abs(dist) <= tol] = 0.0
    if np.all(dist <= 0.0):
        return body
    if np.all(dist >= 0.0):
        return _Body([], [])

    verts = list(body.vertices)
    cut_ids: dict[tuple[int, int], int] = {}

    def crossing(a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        if key not in cut_ids:
            lo, hi = key
            w = dist[lo] / (dist[lo] - dist[hi])
            verts.append(verts[lo] + w * (verts[hi] - verts[lo]))
            cut_ids[key] = len(verts) - 1
        return cut_ids[key]

    faces = []
    for loop in body.faces:
        out: list[int] = []
        for i, a in enumerate(loop):
            b = loop[(i + 1) % len(loop)]
            if dist[a] <= 0.0:
                out.append(a)
            if dist[a] * dist[b] < 0.0:
                out.append(crossing(a, b))
        if len(out) >= 3:
            faces.append(out)

    # Directed edges that do not cancel with a reversed twin bound the cap.
    pending: dict[tuple[int, int], int] = defaultdict(int)
    for loop in faces:
        for i, a in enumerate(loop):
            b = loop[(i + 1) % len(loop)]
            if pending[(b, a)] > 0:
                pending[(b, a)] -= 1
            else:
                pending[(a, b)] += 1
    successors: dict[int, list[int]] = defaultdict(list)
    for (a, b), count in pending.items():
        for _ in range(count):
            successors[b].append(a)  # reversed orientation for the cap
    while any(successors.values()):
        start = next(v for v, nxt in successors.items() if nxt)
        cap = [start]
        current = successors[start].pop()
        while current != start:
            cap.append(current)
            current = successors[current].pop()
        if len(cap) >= 3:
            faces.append(cap)
    return _Body(verts, faces)


def _fan_volume(body: _Body, check_star: bool) -> float:
    used = sorted({i for f in body.faces for i in f})
    if not used:
        return 0.0
    pts = np.array(body.vertices)
    apex = pts[used].mean(axis=0)
    scale = np.abs(pts[used] - apex).max() or 1.0
    total = 0.0
    for loop in body.faces:
        p0 = pts[loop[0]] - apex
        for i in range(1, len(loop) - 1):
            p1 = pts[loop[i]] - apex
            p2 = pts[loop[i + 1]] - apex
            vol = float(np.dot(p0, np.cross(p1, p2))) / 6.0
            if check_star and vol < -1e-12 * scale**3:
                raise StarPointViolation(f"fan tetrahedron volume {vol:.3e}")
            total += vol
    return total


def oracle_truncated_volume(
    P: Polyhedron,
    planes: Sequence[tuple[Sequence[float], float]],
    zero_tol: float = 1e-14,
    check_star_point: bool = False,
) -> float:
    """Volume of P intersected with the negative half-spaces of all planes.

    Each plane is ``(normal, d)`` and keeps ``<x - base_point, normal> <= d``.
    With ``check_star_point`` the fan apex must see every face from inside;
    otherwise signed tetrahedra are summed, which is exact for any closed
    oriented surface.
    """
    body = _Body(P.vertices - P.base_point, P.faces)
    for normal, d in planes:
        body = _clip(body, np.asarray(normal, dtype=float), float(d), zero_tol)
        if not body.faces:
            return 0.0
    return _fan_volume(body, check_star_point)
