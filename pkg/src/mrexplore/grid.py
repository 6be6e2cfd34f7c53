"""Occupancy grid types, coordinate transforms, entropy and map fusion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Cell states. Unknown uses the ROS occupancy-grid convention of -1.
UNKNOWN = -1
FREE = 0
OCCUPIED = 1

# Default per-class occupancy probabilities. Unknown sits at maximum
# entropy; known classes get small symmetric margins so traversed,
# already-mapped space contributes little path entropy.
P_UNKNOWN = 0.5
P_FREE = 0.05
P_OCCUPIED = 0.95


@dataclass
class OccupancyGrid:
    """Tri-state 2D occupancy grid with world-frame metadata.

    Cell states live in a (height, width) int8 array; linear index is
    col + row * width. Per-cell occupancy probability is derived from
    the cell's class via the configured class probabilities.
    """

    resolution: float
    origin_x: float
    origin_y: float
    width: int
    height: int
    cells: np.ndarray = field(default=None)  # type: ignore[assignment]
    p_unknown: float = P_UNKNOWN
    p_free: float = P_FREE
    p_occupied: float = P_OCCUPIED

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("grid dimensions must be positive")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.cells is None:
            self.cells = np.full((self.height, self.width), UNKNOWN, dtype=np.int8)
        else:
            self.cells = np.asarray(self.cells, dtype=np.int8)
            if self.cells.shape != (self.height, self.width):
                raise ValueError("cells shape does not match width/height")

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(
            self.resolution, self.origin_x, self.origin_y,
            self.width, self.height, self.cells.copy(),
            self.p_unknown, self.p_free, self.p_occupied,
        )

    def in_bounds(self, cx: int, cy: int) -> bool:
        return 0 <= cx < self.width and 0 <= cy < self.height

    def state_at(self, cx: int, cy: int) -> int:
        return int(self.cells[cy, cx])

    def probability_at(self, cx: int, cy: int) -> float:
        s = self.cells[cy, cx]
        if s == UNKNOWN:
            return self.p_unknown
        if s == FREE:
            return self.p_free
        return self.p_occupied

    def class_probabilities(self) -> dict[int, float]:
        return {UNKNOWN: self.p_unknown, FREE: self.p_free, OCCUPIED: self.p_occupied}

    def known_count(self) -> int:
        return int(np.count_nonzero(self.cells != UNKNOWN))

    def unknown_count(self) -> int:
        return int(np.count_nonzero(self.cells == UNKNOWN))


@dataclass
class GroundTruthMap:
    """Binary simulation world: every cell is Free or Occupied."""

    resolution: float
    origin_x: float
    origin_y: float
    width: int
    height: int
    cells: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("grid dimensions must be positive")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.cells is None:
            self.cells = np.full((self.height, self.width), FREE, dtype=np.int8)
        else:
            self.cells = np.asarray(self.cells, dtype=np.int8)
            if self.cells.shape != (self.height, self.width):
                raise ValueError("cells shape does not match width/height")
        if np.any(self.cells == UNKNOWN):
            raise ValueError("ground truth map may not contain unknown cells")

    def in_bounds(self, cx: int, cy: int) -> bool:
        return 0 <= cx < self.width and 0 <= cy < self.height

    def blank_grid(self, **probs) -> OccupancyGrid:
        """All-unknown OccupancyGrid with this map's geometry."""
        return OccupancyGrid(
            self.resolution, self.origin_x, self.origin_y,
            self.width, self.height, None, **probs,
        )


def world_to_grid(x: float, y: float, grid) -> tuple[int, int]:
    """World point -> integer cell coords; out-of-bounds coords are returned
    as-is for the caller to bounds-check."""
    cx = math.floor((x - grid.origin_x) / grid.resolution)
    cy = math.floor((y - grid.origin_y) / grid.resolution)
    return cx, cy


def grid_to_world(cx: int, cy: int, grid) -> tuple[float, float]:
    """Cell coords -> world coordinates of the cell center."""
    x = grid.origin_x + (cx + 0.5) * grid.resolution
    y = grid.origin_y + (cy + 0.5) * grid.resolution
    return x, y


def cell_entropy(p: float) -> float:
    """Bernoulli entropy in bits, with 0*log2(0) taken as 0."""
    if p < 0.0 or p > 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


def map_entropy(grid: OccupancyGrid) -> float:
    """Total entropy of the grid in bits (sum of per-cell entropies).

    Cells share class probabilities, so the sum reduces to counting
    cells per class; this keeps an all-unknown N-cell grid at exactly
    N bits.
    """
    total = 0.0
    for state, p in grid.class_probabilities().items():
        n = int(np.count_nonzero(grid.cells == state))
        if n:
            total += n * cell_entropy(p)
    return total


def merge_maps(grids: list[OccupancyGrid]) -> OccupancyGrid:
    """Cell-wise fusion of same-resolution grids over their union bounding box.

    Known states override Unknown; Occupied overrides Free on conflict.
    """
    if not grids:
        raise ValueError("nothing to merge")
    res = grids[0].resolution
    for g in grids[1:]:
        if abs(g.resolution - res) > 1e-12:
            raise ValueError("cannot merge grids with mismatched resolutions")

    min_x = min(g.origin_x for g in grids)
    min_y = min(g.origin_y for g in grids)
    max_x = max(g.origin_x + g.width * res for g in grids)
    max_y = max(g.origin_y + g.height * res for g in grids)
    width = int(round((max_x - min_x) / res))
    height = int(round((max_y - min_y) / res))

    first = grids[0]
    merged = OccupancyGrid(
        res, min_x, min_y, width, height, None,
        first.p_unknown, first.p_free, first.p_occupied,
    )
    # Precedence Occupied > Free > Unknown, implemented as a max over ranks.
    rank_of = {UNKNOWN: 0, FREE: 1, OCCUPIED: 2}
    state_of_rank = np.array([UNKNOWN, FREE, OCCUPIED], dtype=np.int8)
    ranks = np.zeros((height, width), dtype=np.int8)
    lut = np.zeros(256, dtype=np.int8)
    for s, r in rank_of.items():
        lut[np.int8(s).view(np.uint8)] = r

    for g in grids:
        off_x = (g.origin_x - min_x) / res
        off_y = (g.origin_y - min_y) / res
        ox, oy = int(round(off_x)), int(round(off_y))
        if abs(off_x - ox) > 1e-6 or abs(off_y - oy) > 1e-6:
            raise ValueError("grid origins are not aligned to the cell lattice")
        sub = ranks[oy:oy + g.height, ox:ox + g.width]
        np.maximum(sub, lut[g.cells.view(np.uint8)], out=sub)

    merged.cells = state_of_rank[ranks]
    return merged


def coverage_percent(grid: OccupancyGrid, truth: GroundTruthMap) -> float:
    """Percentage of truth cells the grid has resolved to a known state."""
    _check_geometry(grid, truth)
    total = truth.width * truth.height
    return 100.0 * grid.known_count() / total


def inflate_obstacles(grid: OccupancyGrid, cells: int) -> OccupancyGrid:
    """New grid with Occupied dilated by `cells` (Chebyshev radius).

    Used to keep the point robot away from walls when planning.
    """
    if cells <= 0:
        return grid.copy()
    occ = grid.cells == OCCUPIED
    grown = occ.copy()
    for _ in range(cells):
        padded = np.pad(grown, 1, mode="constant")
        grown = (
            padded[0:-2, 0:-2] | padded[0:-2, 1:-1] | padded[0:-2, 2:]
            | padded[1:-1, 0:-2] | padded[1:-1, 1:-1] | padded[1:-1, 2:]
            | padded[2:, 0:-2] | padded[2:, 1:-1] | padded[2:, 2:]
        )
    out = grid.copy()
    out.cells[grown] = OCCUPIED
    return out


def _check_geometry(a, b):
    same = (
        a.width == b.width and a.height == b.height
        and abs(a.resolution - b.resolution) < 1e-12
        and abs(a.origin_x - b.origin_x) < 1e-9
        and abs(a.origin_y - b.origin_y) < 1e-9
    )
    if not same:
        raise ValueError("grid geometries do not match")
