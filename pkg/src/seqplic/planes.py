"""Planes as level sets, their intersection line, and per-face origins."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateNormals, LineParallelToFace

DEFAULT_GAMMA_TOL = 1e-12
DEFAULT_MU_TOL = 1e-12


@dataclass(frozen=True)
class PlaneConfig:
    """Plane {x : <x - base_point, normal> = signed_distance}."""

    normal: np.ndarray
    signed_distance: float
    base_point: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError("plane normal must have unit length")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "base_point", np.asarray(self.base_point, dtype=float))

    def levelset(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.base_point) @ self.normal

    def in_negative_halfspace(self, x) -> np.ndarray:
        return self.levelset(x) <= self.signed_distance

    def flipped(self) -> "PlaneConfig":
        """Same plane, opposite orientation (swaps the half-spaces)."""
        return PlaneConfig(-self.normal, -self.signed_distance, self.base_point)


@dataclass(frozen=True)
class IntersectionFrame:
    """Parametrisation y0 + t*tau + u*mu of the line where both planes meet.

    ``y0`` is stored relative to ``base`` when built with a zero base.
    """

    y0: np.ndarray
    tau: np.ndarray
    mu: np.ndarray
    gamma: float

    def point(self, t: float, u: float = 0.0) -> np.ndarray:
        return self.y0 + t * self.tau + u * self.mu


class DegeneracyClass(str, Enum):
    GENERAL = "general"
    PARALLEL = "parallel"
    ANTIPARALLEL = "antiparallel"


def degeneracy_class(n1, n2, gamma_tol: float = DEFAULT_GAMMA_TOL) -> DegeneracyClass:
    gamma = float(np.dot(n1, n2))
    if gamma >= 1.0 - gamma_tol:
        return DegeneracyClass.PARALLEL
    if gamma <= -1.0 + gamma_tol:
        return DegeneracyClass.ANTIPARALLEL
    return DegeneracyClass.GENERAL


def intersection_frame(n1, n2, s: float, base=(0.0, 0.0, 0.0), gamma_tol: float = DEFAULT_GAMMA_TOL) -> IntersectionFrame:
    """Frame of the line shared by planes (n1, s) and (n2, t) for every t.

    Raises:
        DegenerateNormals: if |<n1, n2>| >= 1 - gamma_tol.
    """
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    gamma = float(n1 @ n2)
    if abs(gamma) >= 1.0 - gamma_tol:
        raise DegenerateNormals(f"<n1, n2> = {gamma!r}")
    scale = 1.0 / (1.0 - gamma * gamma)
    y0 = np.asarray(base, dtype=float) + s * scale * (n1 - gamma * n2)
    tau = scale * (n2 - gamma * n1)
    mu = scale * np.cross(n1, n2)
    return IntersectionFrame(y0=y0, tau=tau, mu=mu, gamma=gamma)


def face_direction(frame: IntersectionFrame, face_normal) -> tuple[np.ndarray, float]:
    """In-face direction of the face origin per unit secondary distance.

    Returns ``(tau_k, <mu, n_face>)``; ``tau_k`` is only meaningful when the
    second entry is nonzero.
    """
    face_normal = np.asarray(face_normal, dtype=float)
    mu_dot = float(frame.mu @ face_normal)
    tau_k = frame.tau - (float(frame.tau @ face_normal) / mu_dot) * frame.mu
    return tau_k, mu_dot


def face_origin(
    frame: IntersectionFrame,
    t: float,
    face_vertex,
    face_normal,
    char_length: float = 1.0,
    mu_tol: float = DEFAULT_MU_TOL,
) -> np.ndarray:
    """Point where the intersection line pierces the face plane.

    The result lies on both planes and on the plane of the face; it moves
    along ``tau_k`` as t changes.

    Raises:
        LineParallelToFace: the line is (numerically) parallel to the face,
            i.e. |<mu, n_face>| < mu_tol * (1 + |t| / char_length).
    """
    face_normal = np.asarray(face_normal, dtype=float)
    face_vertex = np.asarray(face_vertex, dtype=float)
    mu_dot = float(frame.mu @ face_normal)
    if abs(mu_dot) < mu_tol * (1.0 + abs(t) / char_length):
        raise LineParallelToFace(f"<mu, n_face> = {mu_dot!r}")
    y0k = frame.y0 - (float((frame.y0 - face_vertex) @ face_normal) / mu_dot) * frame.mu
    tau_k = frame.tau - (float(frame.tau @ face_normal) / mu_dot) * frame.mu
    return y0k + t * tau_k
