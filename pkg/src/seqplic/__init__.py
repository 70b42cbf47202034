"""Sequential positioning of two nested planes in arbitrary polyhedra.

The primary plane cuts a fraction alpha1 off a polyhedron; the secondary
plane then cuts fraction alpha2 (of the whole cell) off the remainder.
Volumes come from face-wise divergence sums, so the remainder never needs
explicit connectivity.
"""

from .brackets import BracketTable, build_bracket_table
from .cube import baseline_position_secondary, cube_breakpoints, cube_explicit_position, decomposition_volume
from .errors import (
    DegenerateFace,
    DegenerateNormals,
    EmptyTruncation,
    FullTruncation,
    GeometryError,
    InfeasibleFractions,
    LineParallelToFace,
    NoConvergence,
    NonPlanarFace,
    OpenSurface,
    ParallelEdge,
    StarPointViolation,
)
from .geometry import Polyhedron, build_polyhedron, edge_status, vertex_status
from .planes import DegeneracyClass, IntersectionFrame, PlaneConfig, degeneracy_class, intersection_frame
from .positioning import (
    PositioningResult,
    TopologyClass,
    classify_topology,
    find_position,
    initial_guess,
    position_sequential,
    position_single,
)
from .shapes import notched_cube, read_off, regular_dodecahedron, shape_by_name, unit_cube
from .truncation import TruncatedEdge, TruncatedPolyhedron, edge_intersection_point, truncate_faces
from .volume import VolumeEvaluation, immersed_edge_length, primary_volume_fraction, secondary_volume_fraction

__all__ = [name for name in dir() if not name.startswith("_")]
