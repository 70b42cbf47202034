"""Compiled inner loops of the face-based volume functions.

All coordinates are relative to the polyhedron's base point, so a level set
is a plain dot product. Every routine returns a value together with its
left-sided derivatives: a vertex whose level lies within ``tol`` of the
query distance counts as exterior, which is what the function looks like an
infinitesimal step to the left.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_PARALLEL_TOL = 1e-28


@njit(cache=True, nogil=True)
def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


@njit(cache=True, nogil=True)
def face_halfspace_area(rel, loop, lo, hi, co_normals, lengths, normal, area, n, d, tol):
    """Area of face ∩ {<x, n> <= d} and its first two derivatives in d.

    The 2D divergence theorem is applied with an origin on the cutting line,
    anchored near the face's first vertex so the edge coefficients stay
    bounded whenever the line actually crosses the face.
    """
    m = hi - lo
    n_in = 0
    for j in range(lo, hi):
        if _dot(rel[loop[j]], n) - d <= -tol:
            n_in += 1
    if n_in == m:
        return area, 0.0, 0.0
    if n_in == 0:
        return 0.0, 0.0, 0.0
    c = _dot(normal, n)
    denom = 1.0 - c * c
    if denom < _PARALLEL_TOL:
        if 2 * n_in > m:
            return area, 0.0, 0.0
        return 0.0, 0.0, 0.0
    x1 = rel[loop[lo]]
    lam1 = _dot(x1, n)
    acc0 = 0.0
    acc1 = 0.0
    acc2 = 0.0
    for j in range(lo, hi):
        jn = lo + (j - lo + 1) % m
        xa = rel[loop[j]]
        xb = rel[loop[jn]]
        la = _dot(xa, n)
        lb = _dot(xb, n)
        ina = la - d <= -tol
        inb = lb - d <= -tol
        if not ina and not inb:
            continue
        cn = co_normals[j]
        coef = (_dot(xa, cn) - _dot(x1, cn)) - (d - lam1) * _dot(n, cn) / denom
        dcoef = -_dot(n, cn) / denom
        if ina and inb:
            ell = lengths[j]
            dell = 0.0
        else:
            if ina:
                rate = 1.0 / (lb - la)
                frac = (d - la) * rate
            else:
                rate = 1.0 / (la - lb)
                frac = (d - lb) * rate
            if frac >= 1.0:
                ell = lengths[j]
                dell = 0.0
            elif frac <= 0.0:
                continue
            else:
                ell = lengths[j] * frac
                dell = lengths[j] * rate
        acc0 += coef * ell
        acc1 += dcoef * ell + coef * dell
        acc2 += 2.0 * dcoef * dell
    return 0.5 * acc0, 0.5 * acc1, 0.5 * acc2


@njit(cache=True, nogil=True)
def primary_sum(rel, offsets, loop, co_normals, lengths, normals, areas, n, s, tol):
    """Volume of P ∩ {<x, n> <= s} with derivatives up to third order."""
    v0 = 0.0
    v1 = 0.0
    v2 = 0.0
    v3 = 0.0
    for k in range(offsets.shape[0] - 1):
        lo = offsets[k]
        hi = offsets[k + 1]
        a0, a1, a2 = face_halfspace_area(rel, loop, lo, hi, co_normals, lengths, normals[k], areas[k], n, s, tol)
        if a0 == 0.0 and a1 == 0.0:
            continue
        g = _dot(n, normals[k])
        w = _dot(rel[loop[lo]], normals[k]) - s * g
        v0 += w * a0
        v1 += -g * a0 + w * a1
        v2 += -2.0 * g * a1 + w * a2
        v3 += -3.0 * g * a2
    return v0 / 3.0, v1 / 3.0, v2 / 3.0, v3 / 3.0


@njit(cache=True, nogil=True)
def immersed_length(t, tol, lam_p, lam_q, length, l0, l1):
    """Length of edge [p, q] inside {level <= t} and its t-derivative.

    ``l0 + t*l1`` is the fraction measured from p; it only matters when
    exactly one endpoint is interior.
    """
    in_p = lam_p - t <= -tol
    in_q = lam_q - t <= -tol
    if in_p and in_q:
        return length, 0.0
    if not in_p and not in_q:
        return 0.0, 0.0
    if in_p:
        frac = l0 + t * l1
        rate = l1
    else:
        frac = 1.0 - (l0 + t * l1)
        rate = -l1
    if frac >= 1.0:
        return length, 0.0
    if frac <= 0.0:
        return 0.0, 0.0
    return length * frac, length * rate


@njit(cache=True, nogil=True)
def edge_sum(t, tol, lo, hi, lam_p, lam_q, length, l0, l1, base, slope, anchor, complement):
    """Half the sum of coefficient times immersed length over edges lo:hi.

    The coefficient of edge j is ``base[j] - (t - anchor) * slope[j]``, i.e.
    the co-normal distance from an origin moving linearly with t. With
    ``complement`` the non-immersed part of each edge is used instead.
    """
    acc0 = 0.0
    acc1 = 0.0
    acc2 = 0.0
    for j in range(lo, hi):
        ell, dell = immersed_length(t, tol, lam_p[j], lam_q[j], length[j], l0[j], l1[j])
        if complement:
            ell = length[j] - ell
            dell = -dell
        if ell == 0.0 and dell == 0.0:
            continue
        coef = base[j] - (t - anchor) * slope[j]
        acc0 += coef * ell
        acc1 += -slope[j] * ell + coef * dell
        acc2 += -2.0 * slope[j] * dell
    return 0.5 * acc0, 0.5 * acc1, 0.5 * acc2


@njit(cache=True, nogil=True)
def secondary_sum(
    t,
    tol,
    active,
    w0,
    w1,
    sf_min,
    sf_max,
    st_min,
    st_max,
    has_cap,
    triple_ok,
    parallel,
    convex,
    area_plus,
    area_minus,
    tri_anchor,
    nt_anchor,
    e_off,
    e_lam_p,
    e_lam_q,
    e_len,
    e_l0,
    e_l1,
    e_tri_base,
    e_tri_slope,
    e_nt_base,
    e_nt_slope,
    o_off,
    o_lam_p,
    o_lam_q,
    o_len,
    o_l0,
    o_l1,
    o_base,
    o_slope,
):
    """Volume of P_cut ∩ {<x, n2> <= t} with derivatives up to third order.

    Per face the immersed area follows a case split on t: zero below the
    face's lowest truncated vertex, the full truncated area above its
    highest, the triple-line origin while t sweeps the face's cut segment,
    and an origin on the secondary line elsewhere.
    """
    v0 = 0.0
    v1 = 0.0
    v2 = 0.0
    v3 = 0.0
    for k in range(active.shape[0]):
        if not active[k] or t <= sf_min[k]:
            continue
        if t > sf_max[k]:
            a0 = area_plus[k]
            a1 = 0.0
            a2 = 0.0
        elif parallel[k]:
            continue
        elif has_cap[k] and triple_ok[k] and st_min[k] < t and t <= st_max[k]:
            a0, a1, a2 = edge_sum(
                t, tol, e_off[k], e_off[k + 1], e_lam_p, e_lam_q, e_len, e_l0, e_l1,
                e_tri_base, e_tri_slope, tri_anchor[k], False,
            )
        elif convex[k]:
            a0, a1, a2 = edge_sum(
                t, tol, o_off[k], o_off[k + 1], o_lam_p, o_lam_q, o_len, o_l0, o_l1,
                o_base, o_slope, nt_anchor[k], False,
            )
            if has_cap[k] and t > st_max[k]:
                a0 -= area_minus[k]
        elif has_cap[k] and t > st_max[k]:
            g0, g1, g2 = edge_sum(
                t, tol, e_off[k], e_off[k + 1], e_lam_p, e_lam_q, e_len, e_l0, e_l1,
                e_nt_base, e_nt_slope, nt_anchor[k], True,
            )
            a0 = area_plus[k] - g0
            a1 = -g1
            a2 = -g2
        else:
            a0, a1, a2 = edge_sum(
                t, tol, e_off[k], e_off[k + 1], e_lam_p, e_lam_q, e_len, e_l0, e_l1,
                e_nt_base, e_nt_slope, nt_anchor[k], False,
            )
        w = w0[k] - t * w1[k]
        g = w1[k]
        v0 += w * a0
        v1 += -g * a0 + w * a1
        v2 += -2.0 * g * a1 + w * a2
        v3 += -3.0 * g * a2
    return v0 / 3.0, v1 / 3.0, v2 / 3.0, v3 / 3.0
