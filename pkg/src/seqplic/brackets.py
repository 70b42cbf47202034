"""Sorted vertex distances that split a volume function into cubic pieces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DEFAULT_ZERO_TOL


@dataclass(frozen=True)
class BracketTable:
    """Sorted distinct vertex distances; bracket i is (positions[i], positions[i+1]]."""

    positions: np.ndarray

    @property
    def lower(self) -> float:
        return float(self.positions[0])

    @property
    def upper(self) -> float:
        return float(self.positions[-1])

    def __len__(self) -> int:
        return len(self.positions)

    def locate(self, x: float) -> int:
        """Index i with positions[i] < x <= positions[i+1], clamped to valid brackets."""
        i = int(np.searchsorted(self.positions, x, side="left")) - 1
        return min(max(i, 0), len(self.positions) - 2)


def build_bracket_table(points, n, base=(0.0, 0.0, 0.0), zero_tol: float = DEFAULT_ZERO_TOL) -> BracketTable:
    """Projections of the points onto n, sorted, with near-duplicates merged."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        raise ValueError("empty point set")
    levels = np.sort((pts - np.asarray(base, dtype=float)) @ np.asarray(n, dtype=float))
    keep = [levels[0]]
    for x in levels[1:]:
        if x - keep[-1] >= zero_tol:
            keep.append(x)
    return BracketTable(np.array(keep))
