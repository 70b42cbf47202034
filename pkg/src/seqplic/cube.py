"""Closed-form plane position in a cube, and a clipping-based bisection baseline.

Positions from :func:`cube_explicit_position` are measured either from the
cube corner that minimizes <x, n> ("corner" frame) or from the cube centre
("centre" frame, the library convention). For a cube of edge dx the two
differ by dx/2 * (|n_1| + |n_2| + |n_3|).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .errors import NoConvergence, StarPointViolation

_ZERO_COMPONENT = 1e-12
_MAX_FACES = 8
_MAX_FACE_VERTS = 16

# baseline exit codes
NON_WETTED, FULLY_WETTED, TRIPLE, NOT_CONVERGED = 0, 1, 2, -1


@njit(cache=True)
def _corner_position_lower(n1, n2, n3, alpha):
    """Unit-cube position for alpha <= 1/2, components sorted n1 >= n2 >= n3 >= 0."""
    if n2 <= _ZERO_COMPONENT:
        return alpha
    if n3 <= _ZERO_COMPONENT:
        phi = math.atan2(n2, n1)
        tphi = math.tan(phi)
        if alpha <= 0.5 * tphi:
            return math.sqrt(alpha * math.sin(2.0 * phi))
        return math.sin(phi) + math.cos(phi) * (alpha - 0.5 * tphi)
    prod = n1 * n2 * n3
    b1 = n3 * n3 / (6.0 * n1 * n2)
    b2 = (n2**3 - (n2 - n3) ** 3) / (6.0 * prod)
    wide = n1 >= n2 + n3
    if wide:
        b3 = (n2 + n3) / (2.0 * n1)
    else:
        b3 = (n1**3 - (n1 - n2) ** 3 - (n1 - n3) ** 3) / (6.0 * prod)
    if alpha <= b1:
        return (6.0 * alpha * prod) ** (1.0 / 3.0)
    if alpha <= b2:
        return 0.5 * n3 + math.sqrt(2.0 * alpha * n1 * n2 - n3 * n3 / 12.0)
    if alpha <= b3:
        arg = 0.375 * math.sqrt(2.0 / (n2 * n3)) * (n2 + n3 - 2.0 * n1 * alpha)
        arg = min(1.0, max(-1.0, arg))
        return n2 + n3 - math.sqrt(8.0 * n2 * n3) * math.cos(math.acos(arg) / 3.0 + math.pi / 3.0)
    if wide:
        return 0.5 * (2.0 * alpha * n1 + n2 + n3)
    total = n1 + n2 + n3
    p = 0.75 * (2.0 * n1 * n1 - total * total + 2.0 * n2 * n2 + 2.0 * n3 * n3)
    q = 1.5 * prod * (2.0 * alpha - 1.0)
    arg = 1.5 * q / p * math.sqrt(-3.0 / p)
    arg = min(1.0, max(-1.0, arg))
    return 0.5 * total + 2.0 * math.sqrt(-p / 3.0) * math.cos(math.acos(arg) / 3.0 - 2.0 * math.pi / 3.0)


@njit(cache=True)
def _corner_position(nx, ny, nz, alpha):
    a, b, c = abs(nx), abs(ny), abs(nz)
    # sort descending
    if a < b:
        a, b = b, a
    if b < c:
        b, c = c, b
    if a < b:
        a, b = b, a
    if alpha <= 0.5:
        return _corner_position_lower(a, b, c, alpha)
    return a + b + c - _corner_position_lower(a, b, c, 1.0 - alpha)


@njit(cache=True)
def _centre_position(n, alpha, dx):
    s = _corner_position(n[0], n[1], n[2], alpha)
    return dx * (s - 0.5 * (abs(n[0]) + abs(n[1]) + abs(n[2])))


def cube_breakpoints(n) -> np.ndarray:
    """Fractions in [0, 1/2] where the cube's explicit inverse switches branch."""
    n1, n2, n3 = sorted(np.abs(np.asarray(n, dtype=float)), reverse=True)
    prod = n1 * n2 * n3
    b1 = n3 * n3 / (6.0 * n1 * n2)
    b2 = (n2**3 - (n2 - n3) ** 3) / (6.0 * prod)
    if n1 >= n2 + n3:
        b3 = (n2 + n3) / (2.0 * n1)
    else:
        b3 = (n1**3 - (n1 - n2) ** 3 - (n1 - n3) ** 3) / (6.0 * prod)
    return np.array([0.0, b1, b2, b3, 0.5])


def cube_branch_position(n, alpha: float, branch: int) -> float:
    """Corner-frame position from branch 1..4 of the fully oblique formula, unit cube."""
    n1, n2, n3 = sorted(np.abs(np.asarray(n, dtype=float)), reverse=True)
    bp = cube_breakpoints(n)
    # evaluate the requested branch by placing alpha just inside it
    lo, hi = bp[branch - 1], bp[branch]
    if not lo <= alpha <= hi:
        raise ValueError(f"alpha {alpha!r} outside branch {branch} range [{lo!r}, {hi!r}]")
    return _branch_value(n1, n2, n3, alpha, branch)


def _branch_value(n1, n2, n3, alpha, branch):
    prod = n1 * n2 * n3
    if branch == 1:
        return (6.0 * alpha * prod) ** (1.0 / 3.0)
    if branch == 2:
        return 0.5 * n3 + math.sqrt(max(2.0 * alpha * n1 * n2 - n3 * n3 / 12.0, 0.0))
    if branch == 3:
        arg = min(1.0, max(-1.0, 0.375 * math.sqrt(2.0 / (n2 * n3)) * (n2 + n3 - 2.0 * n1 * alpha)))
        return n2 + n3 - math.sqrt(8.0 * n2 * n3) * math.cos(math.acos(arg) / 3.0 + math.pi / 3.0)
    if n1 >= n2 + n3:
        return 0.5 * (2.0 * alpha * n1 + n2 + n3)
    total = n1 + n2 + n3
    p = 0.75 * (2.0 * n1 * n1 - total * total + 2.0 * n2 * n2 + 2.0 * n3 * n3)
    q = 1.5 * prod * (2.0 * alpha - 1.0)
    arg = min(1.0, max(-1.0, 1.5 * q / p * math.sqrt(-3.0 / p)))
    return 0.5 * total + 2.0 * math.sqrt(-p / 3.0) * math.cos(math.acos(arg) / 3.0 - 2.0 * math.pi / 3.0)


def cube_explicit_position(n, alpha: float, dx: float = 1.0, frame: str = "corner") -> float:
    """Offset of the plane with normal n cutting fraction alpha from a cube of edge dx.

    frame="corner" measures from the cube corner minimizing <x, n>,
    frame="centre" from the cube centre.
    """
    n = np.asarray(n, dtype=float)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha {alpha!r} not in (0, 1)")
    if frame == "corner":
        return float(dx * _corner_position(n[0], n[1], n[2], float(alpha)))
    if frame in ("centre", "center"):
        return float(_centre_position(n, float(alpha), float(dx)))
    raise ValueError(f"unknown frame {frame!r}")


# ---------------------------------------------------------------------------
# convex clipping with rebuilt connectivity


@njit(cache=True)
def _cube_faces(dx):
    half = 0.5 * dx
    corners = np.array(
        [[-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1], [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1]],
        dtype=np.float64,
    ) * half
    loops = np.array([[0, 3, 2, 1], [4, 5, 6, 7], [0, 1, 5, 4], [2, 3, 7, 6], [0, 4, 7, 3], [1, 2, 6, 5]])
    fv = np.zeros((_MAX_FACES, _MAX_FACE_VERTS, 3))
    fc = np.zeros(_MAX_FACES, dtype=np.int64)
    for k in range(6):
        for j in range(4):
            fv[k, j] = corners[loops[k, j]]
        fc[k] = 4
    return fv, fc, 6


@njit(cache=True)
def _clip_convex(fv, fc, nf, normal, offset, tol):
    """Part of a convex body with <x, normal> <= offset, as new face arrays.

    Each face polygon is clipped on its own; the cap polygon is assembled
    from the crossing points and on-plane vertices, ordered by angle.
    Returns (faces, counts, n_faces, status) with status -1 for an empty
    result, 1 for an untouched body, 0 otherwise.
    """
    out_v = np.zeros((_MAX_FACES + 1, _MAX_FACE_VERTS, 3))
    out_c = np.zeros(_MAX_FACES + 1, dtype=np.int64)
    any_out = False
    any_in = False
    for k in range(nf):
        for j in range(fc[k]):
            dist = fv[k, j, 0] * normal[0] + fv[k, j, 1] * normal[1] + fv[k, j, 2] * normal[2] - offset
            if dist > tol:
                any_out = True
            elif dist < -tol:
                any_in = True
    if not any_out:
        return fv.copy(), fc.copy(), nf, 1
    if not any_in:
        return out_v, out_c, 0, -1
    cap = np.zeros((4 * _MAX_FACE_VERTS, 3))
    ncap = 0
    m = 0
    for k in range(nf):
        cnt = 0
        for j in range(fc[k]):
            a = fv[k, j]
            b = fv[k, (j + 1) % fc[k]]
            da = a[0] * normal[0] + a[1] * normal[1] + a[2] * normal[2] - offset
            db = b[0] * normal[0] + b[1] * normal[1] + b[2] * normal[2] - offset
            if abs(da) <= tol:
                da = 0.0
            if abs(db) <= tol:
                db = 0.0
            if da <= 0.0:
                out_v[m, cnt] = a
                cnt += 1
                if da == 0.0:
                    cap[ncap] = a
                    ncap += 1
            if da * db < 0.0:
                w = da / (da - db)
                x = a + w * (b - a)
                out_v[m, cnt] = x
                cnt += 1
                cap[ncap] = x
                ncap += 1
        if cnt >= 3:
            out_c[m] = cnt
            m += 1
    # dedupe cap points
    uniq = np.zeros((ncap, 3))
    nu = 0
    for i in range(ncap):
        dup = False
        for j in range(nu):
            d = cap[i] - uniq[j]
            if d[0] * d[0] + d[1] * d[1] + d[2] * d[2] <= 1e-24:
                dup = True
                break
        if not dup:
            uniq[nu] = cap[i]
            nu += 1
    if nu >= 3:
        centre = np.zeros(3)
        for i in range(nu):
            centre += uniq[i]
        centre /= nu
        u = uniq[0] - centre
        u /= math.sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2])
        w = np.array([
            normal[1] * u[2] - normal[2] * u[1],
            normal[2] * u[0] - normal[0] * u[2],
            normal[0] * u[1] - normal[1] * u[0],
        ])
        ang = np.zeros(nu)
        for i in range(nu):
            d = uniq[i] - centre
            ang[i] = math.atan2(d[0] * w[0] + d[1] * w[1] + d[2] * w[2], d[0] * u[0] + d[1] * u[1] + d[2] * u[2])
        order = np.argsort(ang)
        for i in range(nu):
            out_v[m, i] = uniq[order[i]]
        out_c[m] = nu
        m += 1
    return out_v, out_c, m, 0


@njit(cache=True)
def _fan_volume(fv, fc, nf, strict):
    apex = np.zeros(3)
    total_pts = 0
    for k in range(nf):
        for j in range(fc[k]):
            apex += fv[k, j]
            total_pts += 1
    if total_pts == 0:
        return 0.0, True
    apex /= total_pts
    vol = 0.0
    ok = True
    for k in range(nf):
        p0 = fv[k, 0] - apex
        for j in range(1, fc[k] - 1):
            p1 = fv[k, j] - apex
            p2 = fv[k, j + 1] - apex
            tet = (
                p0[0] * (p1[1] * p2[2] - p1[2] * p2[1])
                - p0[1] * (p1[0] * p2[2] - p1[2] * p2[0])
                + p0[2] * (p1[0] * p2[1] - p1[1] * p2[0])
            ) / 6.0
            if strict and tet < -1e-14:
                ok = False
            vol += tet
    return vol, ok


def decomposition_volume(vertices, faces, normal, offset: float, tol: float = 1e-14) -> float:
    """Volume of a convex polyhedron's part with <x, normal> <= offset.

    The body is clipped face by face, the cap rebuilt from the crossing
    points, and the volume summed over tetrahedra from the vertex mean.
    Vertices within tol of the plane snap onto it, so a grazing cut returns
    the unclipped (or empty) volume.

    Raises:
        StarPointViolation: a fan tetrahedron has negative volume (non-convex input).
    """
    vertices = np.asarray(vertices, dtype=float)
    if len(faces) > _MAX_FACES or any(len(f) > _MAX_FACE_VERTS - 2 for f in faces):
        raise ValueError("polyhedron too large for the fixed-size clipper")
    fv = np.zeros((_MAX_FACES, _MAX_FACE_VERTS, 3))
    fc = np.zeros(_MAX_FACES, dtype=np.int64)
    for k, loop in enumerate(faces):
        fv[k, : len(loop)] = vertices[list(loop)]
        fc[k] = len(loop)
    nv, nc, m, status = _clip_convex(fv, fc, len(faces), np.asarray(normal, dtype=float), float(offset), tol)
    if status < 0:
        return 0.0
    vol, ok = _fan_volume(nv, nc, m, True)
    if not ok:
        raise StarPointViolation("negative fan tetrahedron")
    return float(vol)


# ---------------------------------------------------------------------------
# baseline secondary positioning


@njit(cache=True)
def _baseline(n1, alpha1, n2, alpha2, eps, dx, max_iter, tol):
    total = dx**3
    s = _centre_position(n1, alpha1, dx)
    cv, cc, cn = _cube_faces(dx)
    neg = -n1
    pv, pc, pn, _ = _clip_convex(cv, cc, cn, neg, -s, tol)

    def error(t):
        qv, qc, qn, st = _clip_convex(pv, pc, pn, n2, t, tol)
        if st < 0:
            return alpha2
        vol, _ = _fan_volume(qv, qc, qn, False)
        return alpha2 - vol / total

    t = _centre_position(n2, alpha2, dx)
    d = error(t)
    count = 1
    if abs(d) < eps:
        return t, count, NON_WETTED
    lo = alpha2 + d if d > 0.0 else alpha2
    hi = alpha1 + alpha2
    t = _centre_position(n2, hi, dx)
    d = error(t)
    count += 1
    if abs(d) < eps:
        return t, count, FULLY_WETTED
    if d < 0.0:
        hi = hi + d
    else:
        lo = max(lo, hi + d)
    while count < max_iter:
        if hi < lo:
            hi = lo
        a = 0.5 * (lo + hi)
        a = min(max(a, 1e-300), 1.0 - 1e-16)
        t = _centre_position(n2, a, dx)
        d = error(t)
        count += 1
        if abs(d) < eps:
            return t, count, TRIPLE
        if d > 0.0:
            lo = max(lo, a + d)
        else:
            hi = min(hi, a + d)
    return t, count, NOT_CONVERGED


def baseline_position_secondary(
    n1, alpha1: float, n2, alpha2: float, eps: float = 1e-12, dx: float = 1.0, max_iter: int = 200, zero_tol: float = 1e-14
) -> tuple[float, int, str]:
    """Secondary offset in a cube by error-accelerated bisection on whole-cell fractions.

    Returns (t, evaluation count, topology) with t in the centre frame and
    topology one of "non_wetted", "fully_wetted", "triple". Each evaluation
    clips the once-cut cube and sums tetrahedra.

    Raises:
        NoConvergence: after max_iter evaluations.
    """
    t, count, code = _baseline(
        np.asarray(n1, dtype=float), float(alpha1), np.asarray(n2, dtype=float), float(alpha2),
        float(eps), float(dx), int(max_iter), float(zero_tol),
    )
    if code == NOT_CONVERGED:
        raise NoConvergence(f"baseline stalled after {count} evaluations")
    return float(t), int(count), {NON_WETTED: "non_wetted", FULLY_WETTED: "fully_wetted", TRIPLE: "triple"}[code]
