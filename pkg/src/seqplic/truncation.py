"""Once-truncated polyhedron described through its truncated faces.

Truncating by the primary plane never builds new connectivity: each face
keeps the parts of its edges that lie on the positive side of the plane,
and these pieces (not necessarily a closed chain) carry everything the
secondary volume function needs. Coefficients that depend on the secondary
normal are collected in :class:`SecondaryCoefficients`, computed once per
normal and reused for every secondary distance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .brackets import BracketTable, build_bracket_table
from .errors import EmptyTruncation, FullTruncation, ParallelEdge
from .geometry import DEFAULT_ZERO_TOL, Polyhedron, edge_status, vertex_status
from .planes import DEFAULT_GAMMA_TOL, DEFAULT_MU_TOL, IntersectionFrame, PlaneConfig, face_direction, intersection_frame


class EdgeOrigin(str, Enum):
    COPIED = "copied"  # exterior edge, kept whole
    HEAD = "head"  # start vertex exterior, cut at the plane
    TAIL = "tail"  # end vertex exterior, cut at the plane


@dataclass(frozen=True)
class TruncatedEdge:
    v1: np.ndarray
    v2: np.ndarray
    origin_case: EdgeOrigin
    parent_edge: tuple[int, int]

    def length_coeffs(self, n2, base) -> tuple[float, float]:
        """(L0, L1) with L0 + t*L1 the fraction of the edge below level t, from v1."""
        n2 = np.asarray(n2, dtype=float)
        rise = float((self.v2 - self.v1) @ n2)
        return float((np.asarray(base) - self.v1) @ n2) / rise, 1.0 / rise


def edge_intersection_point(x_m, x_m1, n1, s: float, base=(0.0, 0.0, 0.0), tol: float = 1e-300) -> np.ndarray:
    """Point of the segment [x_m, x_m1] on the plane <x - base, n1> = s.

    Raises:
        ParallelEdge: the segment has no extent along n1.
    """
    x_m = np.asarray(x_m, dtype=float)
    x_m1 = np.asarray(x_m1, dtype=float)
    n1 = np.asarray(n1, dtype=float)
    rise = float((x_m1 - x_m) @ n1)
    if abs(rise) <= tol:
        raise ParallelEdge("edge is parallel to the plane")
    beta = (s + float((np.asarray(base, dtype=float) - x_m) @ n1)) / rise
    return x_m + beta * (x_m1 - x_m)


@dataclass(frozen=True, eq=False)
class TruncatedPolyhedron:
    """P ∩ {<x - base, n1> >= s} represented by truncated face edges.

    Flat arrays (coordinates relative to the parent's base point):
        edge_offsets: CSR offsets of truncated edges per face.
        edge_p, edge_q: truncated edge endpoints.
        edge_co_normals, edge_lengths: inherited co-normal and new length.
        p_on_plane, q_on_plane: endpoint lies on the primary plane.
    Per face:
        area_minus: area below the primary plane.
        area_plus: area above it (zero for faces without truncated edges).
        active: the face keeps at least one truncated edge.
    """

    parent: Polyhedron
    primary_plane: PlaneConfig
    zero_tol: float
    edges: tuple[tuple[TruncatedEdge, ...], ...]
    edge_offsets: np.ndarray
    edge_p: np.ndarray
    edge_q: np.ndarray
    edge_co_normals: np.ndarray
    edge_lengths: np.ndarray
    p_on_plane: np.ndarray
    q_on_plane: np.ndarray
    area_minus: np.ndarray
    area_plus: np.ndarray
    active: np.ndarray
    primary_fraction: float
    cut_volume: float
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n1(self) -> np.ndarray:
        return self.primary_plane.normal

    @property
    def s_star(self) -> float:
        return self.primary_plane.signed_distance

    def cut_points(self) -> np.ndarray:
        """All vertices of the truncated faces (relative coordinates)."""
        return np.concatenate([self.edge_p, self.edge_q])

    def secondary(self, n2, gamma_tol: float = DEFAULT_GAMMA_TOL, mu_tol: float = DEFAULT_MU_TOL) -> "SecondaryCoefficients":
        """Coefficients for secondary normal n2, built once and cached."""
        n2 = np.asarray(n2, dtype=float)
        key = (n2.tobytes(), gamma_tol, mu_tol)
        hit = self._cache.get(key)
        if hit is None:
            if len(self._cache) > 64:
                self._cache.clear()
            hit = _build_secondary(self, n2, gamma_tol, mu_tol)
            self._cache[key] = hit
        return hit


def truncate_faces(P: Polyhedron, n1, s_star: float, zero_tol: float = DEFAULT_ZERO_TOL) -> TruncatedPolyhedron:
    """Keep the parts of all face edges with <x - base, n1> >= s_star.

    Interior edges are dropped and exterior ones copied; intersected edges
    are cut at the plane. Degenerate statuses follow the left-limit
    convention: an edge touching the plane from outside, or lying in it, is
    copied, one touching it from inside is dropped. Faces lying entirely in
    the plane are skipped.

    Raises:
        EmptyTruncation: nothing of P lies strictly above the plane.
        FullTruncation: nothing of P lies strictly below the plane.
    """
    n1 = np.asarray(n1, dtype=float)
    rel = P.relative_vertices
    level = rel @ n1 - s_star
    status = np.array([vertex_status(x, zero_tol) for x in level])
    if not np.any(status > 0):
        raise EmptyTruncation("plane lies above the polyhedron")
    if not np.any(status < 0):
        raise FullTruncation("plane lies below the polyhedron")

    per_face: list[tuple[TruncatedEdge, ...]] = []
    ps, qs, cns, p_on, q_on = [], [], [], [], []
    offsets = [0]
    area_minus = np.zeros(P.n_faces)
    area_plus = np.zeros(P.n_faces)
    active = np.zeros(P.n_faces, dtype=bool)
    for k, loop in enumerate(P.faces):
        lo, hi = int(P.face_offsets[k]), int(P.face_offsets[k + 1])
        kept: list[TruncatedEdge] = []
        if np.any(status[list(loop)] != 0):
            m = len(loop)
            for j in range(m):
                a, b = loop[j], loop[(j + 1) % m]
                code = edge_status(status[a], status[b])
                if code in (-1, -2):
                    continue
                if code in (1, 2, 3):
                    p, q, case = rel[a], rel[b], EdgeOrigin.COPIED
                elif status[a] > 0:
                    p, q, case = rel[a], edge_intersection_point(rel[a], rel[b], n1, s_star), EdgeOrigin.HEAD
                else:
                    p, q, case = edge_intersection_point(rel[a], rel[b], n1, s_star), rel[b], EdgeOrigin.TAIL
                kept.append(TruncatedEdge(P.base_point + p, P.base_point + q, case, (k, j)))
                ps.append(p)
                qs.append(q)
                cns.append(P.edge_co_normals[lo + j])
                p_on.append(case is EdgeOrigin.TAIL or status[a] == 0)
                q_on.append(case is EdgeOrigin.HEAD or status[b] == 0)
        per_face.append(tuple(kept))
        offsets.append(offsets[-1] + len(kept))
        if kept:
            a_minus, _, _ = _kernels.face_halfspace_area(
                rel, P.face_loop, lo, hi, P.edge_co_normals, P.edge_lengths,
                P.face_normals[k], P.face_areas[k], n1, s_star, zero_tol,
            )
            area_minus[k] = a_minus
            area_plus[k] = P.face_areas[k] - a_minus
            active[k] = True
        elif np.any(status[list(loop)] != 0):
            area_minus[k] = P.face_areas[k]

    vol_below = _kernels.primary_sum(
        rel, P.face_offsets, P.face_loop, P.edge_co_normals, P.edge_lengths,
        P.face_normals, P.face_areas, n1, s_star, zero_tol,
    )[0]
    fraction = vol_below / P.volume
    edge_p = np.array(ps, dtype=float).reshape(-1, 3)
    edge_q = np.array(qs, dtype=float).reshape(-1, 3)
    return TruncatedPolyhedron(
        parent=P,
        primary_plane=PlaneConfig(n1, float(s_star), P.base_point),
        zero_tol=zero_tol,
        edges=tuple(per_face),
        edge_offsets=np.array(offsets, dtype=np.int64),
        edge_p=edge_p,
        edge_q=edge_q,
        edge_co_normals=np.array(cns, dtype=float).reshape(-1, 3),
        edge_lengths=np.linalg.norm(edge_q - edge_p, axis=1),
        p_on_plane=np.array(p_on, dtype=bool),
        q_on_plane=np.array(q_on, dtype=bool),
        area_minus=area_minus,
        area_plus=area_plus,
        active=active,
        primary_fraction=float(fraction),
        cut_volume=float(P.volume * (1.0 - fraction)),
    )


def _length_coeffs(lam_p: np.ndarray, lam_q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rise = lam_q - lam_p
    with np.errstate(divide="ignore", invalid="ignore"):
        l1 = np.where(rise != 0.0, 1.0 / rise, 0.0)
    return -lam_p * l1, l1


@dataclass(frozen=True, eq=False)
class SecondaryCoefficients:
    """Everything about the secondary normal that does not depend on t.

    Per face: volume coefficients ``w0 - t*w1``; the four delimiters (lowest
    and highest secondary level over the truncated face and over its cut
    segment); switches for the branch selection; anchors of the two moving
    origins. Per truncated and per original edge: endpoint levels, length
    coefficients and co-normal distances.
    """

    n2: np.ndarray
    frame: IntersectionFrame
    sf_min: np.ndarray
    sf_max: np.ndarray
    st_min: np.ndarray
    st_max: np.ndarray
    has_cap: np.ndarray
    triple_ok: np.ndarray
    cut_levels: np.ndarray
    brackets: BracketTable
    kernel_args: tuple

    def volume(self, t: float, tol: float) -> tuple[float, float, float, float]:
        return _kernels.secondary_sum(float(t), tol, *self.kernel_args)


def _build_secondary(T: TruncatedPolyhedron, n2: np.ndarray, gamma_tol: float, mu_tol: float) -> SecondaryCoefficients:
    P = T.parent
    rel = P.relative_vertices
    frame = intersection_frame(T.n1, n2, T.s_star, base=np.zeros(3), gamma_tol=gamma_tol)
    nf = P.n_faces
    normals = P.face_normals

    first = rel[P.face_loop[P.face_offsets[:-1]]]
    w0 = np.einsum("ij,ij->i", first - frame.y0, normals)
    w1 = normals @ frame.tau
    cos2 = normals @ n2
    denom = 1.0 - cos2 * cos2
    parallel = denom < _kernels._PARALLEL_TOL
    safe = np.where(parallel, 1.0, denom)
    nt_anchor = first @ n2

    # truncated edges
    e_off = T.edge_offsets
    face_of_edge = np.repeat(np.arange(nf), np.diff(e_off))
    lam_p = T.edge_p @ n2
    lam_q = T.edge_q @ n2
    e_l0, e_l1 = _length_coeffs(lam_p, lam_q)
    cn = T.edge_co_normals
    e_nt_base = np.einsum("ij,ij->i", T.edge_p - first[face_of_edge], cn)
    e_nt_slope = (cn @ n2) / safe[face_of_edge]

    sf_min = np.full(nf, np.inf)
    sf_max = np.full(nf, -np.inf)
    st_min = np.full(nf, np.inf)
    st_max = np.full(nf, -np.inf)
    has_cap = np.zeros(nf, dtype=bool)
    triple_ok = np.zeros(nf, dtype=bool)
    tri_anchor = np.zeros(nf)
    e_tri_base = np.zeros(len(lam_p))
    e_tri_slope = np.zeros(len(lam_p))
    for k in np.flatnonzero(T.active):
        lo, hi = e_off[k], e_off[k + 1]
        levels = np.concatenate([lam_p[lo:hi], lam_q[lo:hi]])
        sf_min[k] = levels.min()
        sf_max[k] = levels.max()
        on_plane = np.concatenate([T.p_on_plane[lo:hi], T.q_on_plane[lo:hi]])
        if not on_plane.any():
            continue
        has_cap[k] = True
        cap_pts = np.concatenate([T.edge_p[lo:hi], T.edge_q[lo:hi]])[on_plane]
        cap_levels = levels[on_plane]
        i_min = int(np.argmin(cap_levels))
        st_min[k] = cap_levels[i_min]
        st_max[k] = cap_levels.max()
        if abs(float(frame.mu @ normals[k])) >= mu_tol and st_max[k] > st_min[k]:
            tau_k, _ = face_direction(frame, normals[k])
            triple_ok[k] = True
            anchor = cap_pts[i_min]
            tri_anchor[k] = st_min[k]
            e_tri_base[lo:hi] = np.einsum("ij,ij->i", T.edge_p[lo:hi] - anchor, cn[lo:hi])
            e_tri_slope[lo:hi] = cn[lo:hi] @ tau_k

    # original edges, used on convex faces away from the cut segment
    loop = P.face_loop
    nxt = np.empty_like(loop)
    for k in range(nf):
        lo, hi = P.face_offsets[k], P.face_offsets[k + 1]
        nxt[lo:hi] = np.roll(loop[lo:hi], -1)
    face_of_orig = np.repeat(np.arange(nf), np.diff(P.face_offsets))
    o_lam_p = rel[loop] @ n2
    o_lam_q = rel[nxt] @ n2
    o_l0, o_l1 = _length_coeffs(o_lam_p, o_lam_q)
    o_base = np.einsum("ij,ij->i", rel[loop] - first[face_of_orig], P.edge_co_normals)
    o_slope = (P.edge_co_normals @ n2) / safe[face_of_orig]

    all_levels = np.concatenate([lam_p, lam_q])
    args = (
        T.active.astype(np.bool_),
        w0,
        w1,
        sf_min,
        sf_max,
        st_min,
        st_max,
        has_cap,
        triple_ok,
        parallel,
        P.convex_faces.astype(np.bool_),
        T.area_plus,
        T.area_minus,
        tri_anchor,
        nt_anchor,
        e_off,
        lam_p,
        lam_q,
        T.edge_lengths,
        e_l0,
        e_l1,
        e_tri_base,
        e_tri_slope,
        e_nt_base,
        e_nt_slope,
        np.ascontiguousarray(P.face_offsets),
        o_lam_p,
        o_lam_q,
        np.ascontiguousarray(P.edge_lengths),
        o_l0,
        o_l1,
        o_base,
        o_slope,
    )
    return SecondaryCoefficients(
        n2=n2,
        frame=frame,
        sf_min=sf_min,
        sf_max=sf_max,
        st_min=st_min,
        st_max=st_max,
        has_cap=has_cap,
        triple_ok=triple_ok,
        cut_levels=all_levels,
        brackets=build_bracket_table(T.cut_points(), n2, zero_tol=T.zero_tol),
        kernel_args=args,
    )
