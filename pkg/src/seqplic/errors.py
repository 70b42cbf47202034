"""Exception types raised by the library."""

from __future__ import annotations


class GeometryError(ValueError):
    """Base class for invalid polyhedron input."""


class NonPlanarFace(GeometryError):
    pass


class DegenerateFace(GeometryError):
    pass


class OpenSurface(GeometryError):
    pass


class StarPointViolation(GeometryError):
    """A fan tetrahedron came out with negative volume beyond tolerance."""


class DegenerateNormals(ValueError):
    """The two plane normals are (anti)parallel; no intersection line exists."""


class LineParallelToFace(ValueError):
    """The intersection line runs parallel to a face plane."""


class ParallelEdge(ValueError):
    """An edge flagged as intersected is parallel to the cutting plane."""


class EmptyTruncation(ValueError):
    """The cutting plane leaves nothing on its positive side."""


class FullTruncation(ValueError):
    """The cutting plane removes nothing from the polyhedron."""


class NoConvergence(RuntimeError):
    """A root finder exhausted its iteration budget."""


class InfeasibleFractions(ValueError):
    """Volume fractions outside the admissible region."""
