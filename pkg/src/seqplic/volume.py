"""Volume fractions below a plane, with left-sided derivatives in its offset."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import _kernels
from .brackets import BracketTable, build_bracket_table
from .geometry import DEFAULT_ZERO_TOL, Polyhedron
from .truncation import TruncatedPolyhedron

_CONSISTENCY_TOL = 1e-12


class VolumeEvaluation(NamedTuple):
    value: float
    d1: float
    d2: float
    d3: float


def _normalized(raw, total: float, reference: float) -> VolumeEvaluation:
    # the check is absolute in units of the reference volume
    value = raw[0] / total
    slack = _CONSISTENCY_TOL * reference / total
    if value < -slack or value > 1.0 + slack:
        raise ArithmeticError(f"volume fraction {value!r} outside [0, 1]")
    return VolumeEvaluation(min(max(value, 0.0), 1.0), raw[1] / total, raw[2] / total, raw[3] / total)


def primary_volume_fraction(P: Polyhedron, n1, s: float, zero_tol: float = DEFAULT_ZERO_TOL) -> VolumeEvaluation:
    """Fraction of P with <x - base, n1> <= s."""
    raw = _kernels.primary_sum(
        P.relative_vertices, P.face_offsets, P.face_loop, P.edge_co_normals, P.edge_lengths,
        P.face_normals, P.face_areas, np.asarray(n1, dtype=float), float(s), zero_tol,
    )
    return _normalized(raw, P.volume, P.volume)


def secondary_volume_fraction(T: TruncatedPolyhedron, n2, t: float, zero_tol: float | None = None) -> VolumeEvaluation:
    """Fraction of the truncated body with <x - base, n2> <= t."""
    tol = T.zero_tol if zero_tol is None else zero_tol
    raw = T.secondary(n2).volume(float(t), tol)
    return _normalized(raw, T.cut_volume, T.parent.volume)


def immersed_edge_length(v1, v2, n2, t: float, base=(0.0, 0.0, 0.0), zero_tol: float = DEFAULT_ZERO_TOL) -> float:
    """Length of segment [v1, v2] inside the closed half-space <x - base, n2> <= t.

    Endpoints within zero_tol of the plane count as inside; an edge lying in
    the plane is fully immersed, one touching it from outside is not.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    base = np.asarray(base, dtype=float)
    length = float(np.linalg.norm(v2 - v1))
    a = float((v1 - base) @ n2) - t
    b = float((v2 - base) @ n2) - t
    in_a = a < zero_tol
    in_b = b < zero_tol
    if in_a and in_b:
        return length
    if not in_a and not in_b:
        return 0.0
    if abs(a) < zero_tol or abs(b) < zero_tol:
        return 0.0
    frac = a / (a - b) if in_a else b / (b - a)
    return length * frac
