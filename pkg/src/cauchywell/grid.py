"""Uniform midpoint grids and the finite spherical well potential.

Lengths are measured in units of the well radius, so the well occupies
``r < 1`` (or ``|x| < 1`` on the line).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

GridKind = Literal["symmetric", "radial"]

WELL_RADIUS = 1.0
DEFAULT_CUTOFF = 50.0
DEFAULT_STEP = 0.001
MAX_NODES = 2_000_000


@dataclass(frozen=True)
class RadialGrid:
    """Cell-centred uniform grid on ``[-a, a]`` (symmetric) or ``[0, a]`` (radial).

    Nodes sit at cell midpoints, so neither ``x = 0`` nor ``r = 0`` is ever a
    node. The node array is read-only.
    """

    kind: GridKind
    cutoff_a: float
    step_dx: float
    nodes: np.ndarray = field(repr=False, compare=False)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def length(self) -> float:
        return 2 * self.cutoff_a if self.kind == "symmetric" else self.cutoff_a

    @property
    def window(self) -> int:
        """Largest index offset ``k`` with ``k * dx <= a``."""
        return int(np.floor(self.cutoff_a / self.step_dx + 1e-9))

    def mirror_index(self) -> np.ndarray:
        """Index of the node ``-x`` for every node ``x`` (symmetric grids only)."""
        if self.kind != "symmetric":
            raise ValueError("mirror map is only defined on symmetric grids")
        return np.arange(self.size)[::-1].copy()

    def coarsened(self, factor: int = 2) -> "RadialGrid":
        return make_grid(self.kind, self.cutoff_a, self.step_dx * factor)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RadialGrid):
            return NotImplemented
        return (self.kind, self.size, self.cutoff_a, self.step_dx) == (
            other.kind, other.size, other.cutoff_a, other.step_dx)

    def __hash__(self) -> int:
        return hash((self.kind, self.size, self.cutoff_a, self.step_dx))


def make_grid(kind: GridKind, cutoff_a: float = DEFAULT_CUTOFF,
              step_dx: float = DEFAULT_STEP) -> RadialGrid:
    """Build a midpoint grid.

    The number of cells is ``round(length / step_dx)``; ``cutoff_a`` must be a
    whole number of cells (to one part in 1e6) so that the cells tile the
    interval exactly.
    """
    if kind not in ("symmetric", "radial"):
        raise ValueError(f"unknown grid kind {kind!r}")
    if not step_dx > 0:
        raise ValueError(f"step must be positive, got {step_dx}")
    if cutoff_a < WELL_RADIUS:
        raise ValueError(f"cutoff {cutoff_a} lies inside the well (radius {WELL_RADIUS})")
    length = 2 * cutoff_a if kind == "symmetric" else cutoff_a
    cells = int(round(length / step_dx))
    if abs(cells * step_dx - length) > 1e-6 * length:
        raise ValueError(f"cutoff {cutoff_a} is not a whole number of cells of width {step_dx}")
    if cells > MAX_NODES:
        raise ValueError(f"{cells} nodes exceeds the limit of {MAX_NODES}")
    if kind == "symmetric" and cells % 2:
        raise ValueError("symmetric grid needs an even number of cells")
    j = np.arange(cells, dtype=float)
    start = -cutoff_a if kind == "symmetric" else 0.0
    nodes = start + (j + 0.5) * step_dx
    nodes.setflags(write=False)
    return RadialGrid(kind, float(cutoff_a), float(step_dx), nodes)


@dataclass(frozen=True)
class WellPotential:
    """Step potential: 0 for ``r < 1`` and ``v0`` for ``r >= 1``."""

    v0: float
    well_radius: float = WELL_RADIUS

    def __post_init__(self):
        if not self.v0 > 0:
            raise ValueError(f"v0 must be positive, got {self.v0}")

    def __call__(self, r) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=float))
        return np.where(r < self.well_radius, 0.0, self.v0)

    evaluate = __call__
