"""Plane positioning by implicit bracketing, and the two-plane sequential driver."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import InfeasibleFractions, NoConvergence
from .geometry import DEFAULT_ZERO_TOL, Polyhedron
from .planes import DEFAULT_GAMMA_TOL, DegeneracyClass, degeneracy_class
from .truncation import TruncatedPolyhedron, truncate_faces
from .volume import BracketTable, VolumeEvaluation, build_bracket_table, primary_volume_fraction

DEFAULT_VOF_TOL = 1e-12
DEFAULT_EPS1 = 1e-9
DEFAULT_MAX_ITER = 50
_CONTAINMENT_TOL = 1e-15
_ADMISSIBLE_SLACK = 1e-15

Evaluator = Callable[[float], VolumeEvaluation]


class TopologyClass(str, Enum):
    TRIPLE = "triple"
    FULLY_WETTED = "fully_wetted"
    NON_WETTED = "non_wetted"
    PARALLEL = "parallel_degenerate"
    ANTIPARALLEL = "antiparallel_degenerate"


@dataclass(frozen=True)
class PositioningResult:
    s_star: float
    t_star: float
    truncations_primary: int
    truncations_secondary: int
    topology: TopologyClass
    residual_primary: float
    residual_secondary: float


def initial_guess(alpha_ref: float, s_min: float, s_max: float) -> float:
    """Start position from the global cubic spline through (s_min, 0) and (s_max, 1)."""
    shape = 0.5 - math.cos((math.acos(2.0 * alpha_ref - 1.0) - 2.0 * math.pi) / 3.0)
    return s_min + (s_max - s_min) * shape


def _real_cubic_roots(a: float, b: float, c: float, d: float) -> list[float]:
    """Real roots of a*u^3 + b*u^2 + c*u + d."""
    scale = max(abs(a), abs(b), abs(c), abs(d))
    if scale == 0.0:
        return []
    if abs(a) <= 1e-14 * scale:
        if abs(b) <= 1e-14 * scale:
            return [] if c == 0.0 else [-d / c]
        disc = c * c - 4.0 * b * d
        if disc < 0.0:
            return []
        q = -0.5 * (c + math.copysign(math.sqrt(disc), c))
        roots = [q / b]
        if q != 0.0:
            roots.append(d / q)
        return roots
    b, c, d = b / a, c / a, d / a
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if p < 0.0 and disc <= 0.0:
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * q / (p * r)))
        phi = math.acos(arg) / 3.0
        return [r * math.cos(phi - 2.0 * math.pi * j / 3.0) - shift for j in range(3)]
    root = math.sqrt(max(disc, 0.0))
    u = math.copysign(abs(-q / 2.0 + math.copysign(root, -q)) ** (1.0 / 3.0), -q)
    return [u - p / (3.0 * u) - shift if u != 0.0 else -shift]


def _solve_local_cubic(ev: VolumeEvaluation, z: float, target: float, left: float, right: float) -> float:
    """Root of the Taylor cubic around z equal to target, inside [left, right]."""
    # work in w = (x - left) / width so that all coefficients are comparable
    width = right - left
    u0 = left - z
    c0 = ev.value - target + u0 * (ev.d1 + u0 * (0.5 * ev.d2 + u0 * ev.d3 / 6.0))
    c1 = (ev.d1 + u0 * (ev.d2 + 0.5 * u0 * ev.d3)) * width
    c2 = 0.5 * (ev.d2 + u0 * ev.d3) * width**2
    c3 = ev.d3 / 6.0 * width**3

    def poly(w):
        return ((c3 * w + c2) * w + c1) * w + c0

    def slope(w):
        return (3.0 * c3 * w + 2.0 * c2) * w + c1

    candidates = [w for w in _real_cubic_roots(c3, c2, c1, c0) if -1e-9 <= w <= 1.0 + 1e-9]
    w = min(candidates, key=lambda r: abs(poly(r))) if candidates else 0.5
    lo, hi = 0.0, 1.0
    for _ in range(60):
        f = poly(w)
        if f == 0.0:
            break
        if f > 0.0:
            hi = min(hi, w)
        else:
            lo = max(lo, w)
        g = slope(w)
        nw = w - f / g if g > 0.0 else 0.5 * (lo + hi)
        if not lo <= nw <= hi:
            nw = 0.5 * (lo + hi)
        if nw == w or hi - lo <= 4e-16:
            break
        w = nw
    return left + min(max(w, 0.0), 1.0) * width


def _quadratic_step(value: float, d1: float, d2: float, target: float) -> float | None:
    """Step u with value + d1*u + d2/2*u^2 = target on the monotone branch."""
    gap = target - value
    disc = d1 * d1 + 2.0 * d2 * gap
    if disc < 0.0:
        return None
    den = d1 + math.sqrt(disc)
    if den <= 0.0:
        return None
    return 2.0 * gap / den


def find_position(
    evaluator: Evaluator,
    brackets: BracketTable,
    alpha_ref: float,
    vof_tol: float = DEFAULT_VOF_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[float, int]:
    """Position x with evaluator(x).value = alpha_ref, and the number of evaluator calls.

    Every call yields the exact local cubic of the bracket containing the
    query point (left-sided). Extrapolating it to the bracket ends tells
    whether the target lies inside; if so the cubic root is returned without
    another call. Otherwise the feasible bracket range shrinks and the next
    point comes from the quadratic Taylor model at the current point,
    falling back to the outermost feasible bracket when that model fails.

    Raises:
        NoConvergence: after max_iter evaluator calls.
    """
    pos = brackets.positions
    if not 0.0 < alpha_ref < 1.0:
        raise ValueError(f"target fraction {alpha_ref!r} not in (0, 1)")
    lo, hi = 0, len(pos) - 1
    z = initial_guess(alpha_ref, pos[0], pos[-1])
    if not pos[0] < z <= pos[-1]:
        z = 0.5 * (pos[0] + pos[-1])
    count = 0
    while count < max_iter:
        ev = evaluator(z)
        count += 1
        if abs(ev.value - alpha_ref) <= vof_tol:
            return float(z), count
        i = min(max(int(np.searchsorted(pos, z, side="left")) - 1, 0), len(pos) - 2)
        u_left, u_right = pos[i] - z, pos[i + 1] - z
        at_left = ev.value + u_left * (ev.d1 + u_left * (0.5 * ev.d2 + u_left * ev.d3 / 6.0))
        at_right = ev.value + u_right * (ev.d1 + u_right * (0.5 * ev.d2 + u_right * ev.d3 / 6.0))
        if at_left - _CONTAINMENT_TOL <= alpha_ref <= at_right + _CONTAINMENT_TOL:
            return float(_solve_local_cubic(ev, z, alpha_ref, pos[i], pos[i + 1])), count
        below = alpha_ref < at_left
        if below:
            hi = min(hi, i)
        else:
            lo = max(lo, i + 1)
        if lo >= hi:
            return float(pos[lo]), count
        step = _quadratic_step(ev.value, ev.d1, ev.d2, alpha_ref)
        nz = None if step is None else z + step
        if nz is None or not (pos[lo] < nz <= pos[hi]):
            if hi - lo == 1:
                nz = 0.5 * (pos[lo] + pos[hi])
            elif below:
                nz = 0.5 * (pos[hi - 1] + pos[hi])
            else:
                nz = 0.5 * (pos[lo] + pos[lo + 1])
        z = float(nz)
    raise NoConvergence(f"no root for target {alpha_ref!r} after {max_iter} evaluations")


def classify_topology(T: TruncatedPolyhedron, n2, t_star: float, zero_tol: float | None = None) -> TopologyClass:
    """Position of the cut polygon relative to the secondary plane.

    Non-wetted when the whole cut lies above the secondary plane, fully
    wetted when it lies below, triple otherwise.
    """
    tol = T.zero_tol if zero_tol is None else zero_tol
    coeffs = T.secondary(n2)
    caps = coeffs.has_cap
    if not np.any(caps):
        return TopologyClass.TRIPLE
    if t_star <= float(np.min(coeffs.st_min[caps])) + tol:
        return TopologyClass.NON_WETTED
    if t_star >= float(np.max(coeffs.st_max[caps])) - tol:
        return TopologyClass.FULLY_WETTED
    return TopologyClass.TRIPLE


def fractions_admissible(alpha1: float, alpha2: float, eps1: float = DEFAULT_EPS1) -> bool:
    """Both fractions and their sum keep eps1 away from 0 and 1 (with one-ulp-scale slack)."""
    top = 1.0 - 2.0 * eps1 + _ADMISSIBLE_SLACK
    return eps1 <= alpha1 <= top and eps1 <= alpha2 <= top and alpha1 + alpha2 <= 1.0 - eps1 + _ADMISSIBLE_SLACK


def check_fractions(alpha1: float, alpha2: float, eps1: float = DEFAULT_EPS1) -> None:
    """Raise InfeasibleFractions unless the pair is admissible."""
    if not fractions_admissible(alpha1, alpha2, eps1):
        raise InfeasibleFractions(f"fractions ({alpha1!r}, {alpha2!r}) not admissible for eps1={eps1!r}")


def position_single(
    P: Polyhedron,
    n,
    alpha: float,
    zero_tol: float = DEFAULT_ZERO_TOL,
    vof_tol: float = DEFAULT_VOF_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[float, int]:
    """Offset of a single plane with normal n enclosing fraction alpha of P."""
    n = np.asarray(n, dtype=float)
    table = build_bracket_table(P.relative_vertices, n, zero_tol=zero_tol)
    return find_position(lambda x: primary_volume_fraction(P, n, x, zero_tol), table, alpha, vof_tol, max_iter)


def primary_stage(
    P: Polyhedron,
    n1,
    alpha1: float,
    zero_tol: float = DEFAULT_ZERO_TOL,
    vof_tol: float = DEFAULT_VOF_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[int, TruncatedPolyhedron]:
    """Position the primary plane and truncate P there."""
    s, count = position_single(P, n1, alpha1, zero_tol, vof_tol, max_iter)
    return count, truncate_faces(P, np.asarray(n1, dtype=float), s, zero_tol)


def position_sequential(
    P: Polyhedron,
    n1,
    alpha1: float,
    n2,
    alpha2: float,
    zero_tol: float = DEFAULT_ZERO_TOL,
    vof_tol: float = DEFAULT_VOF_TOL,
    eps1: float = DEFAULT_EPS1,
    gamma_tol: float = DEFAULT_GAMMA_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    primary: tuple[int, TruncatedPolyhedron] | None = None,
) -> PositioningResult:
    """Place {<x - base, n1> <= s} holding alpha1, then {<x - base, n2> <= t} inside the rest holding alpha2.

    Both fractions refer to the whole polyhedron. Nearly (anti)parallel
    normals are solved as two independent single-plane problems on P.
    A primary solve for the same (n1, alpha1) may be passed in as
    (evaluation count, truncated polyhedron).
    """
    check_fractions(alpha1, alpha2, eps1)
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    kind = degeneracy_class(n1, n2, gamma_tol)
    if kind is not DegeneracyClass.GENERAL:
        s, c1 = position_single(P, n1, alpha1, zero_tol, vof_tol, max_iter)
        second = alpha1 + alpha2 if kind is DegeneracyClass.PARALLEL else alpha2
        t, c2 = position_single(P, n2, second, zero_tol, vof_tol, max_iter)
        r1 = abs(primary_volume_fraction(P, n1, s, zero_tol).value - alpha1)
        r2 = abs(primary_volume_fraction(P, n2, t, zero_tol).value - second)
        topo = TopologyClass.PARALLEL if kind is DegeneracyClass.PARALLEL else TopologyClass.ANTIPARALLEL
        return PositioningResult(s, t, c1, c2, topo, r1, r2)

    if primary is None:
        primary = primary_stage(P, n1, alpha1, zero_tol, vof_tol, max_iter)
    c1, T = primary
    s = T.s_star
    r1 = abs(T.primary_fraction - alpha1)
    target = alpha2 / (1.0 - T.primary_fraction)
    coeffs = T.secondary(n2, gamma_tol)
    table = coeffs.brackets
    cut = T.cut_volume

    def evaluate(x: float) -> VolumeEvaluation:
        v, d1, d2, d3 = coeffs.volume(x, zero_tol)
        return VolumeEvaluation(v / cut, d1 / cut, d2 / cut, d3 / cut)

    t, c2 = find_position(evaluate, table, target, vof_tol * P.volume / cut, max_iter)
    r2 = abs(coeffs.volume(t, zero_tol)[0] / P.volume - alpha2)
    return PositioningResult(s, t, c1, c2, classify_topology(T, n2, t, zero_tol), r1, r2)
