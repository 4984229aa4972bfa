"""A* shortest paths on the occupancy grid, with obstacle inflation.

Moves are 8-connected with sqrt(2)-cost diagonals. A diagonal move is only
allowed when both adjacent orthogonal cells are free (no corner cutting).
Cells within the inflation radius of any occupied cell count as occupied.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grid import SemanticOccupancyGrid

DEFAULT_INFLATION = 0.3  # m, safety radius around the robot

_SQRT2 = math.sqrt(2.0)
# (dx, dy, cost factor); fixed order keeps the search deterministic
_MOVES = (
    (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
    (1, 1, _SQRT2), (1, -1, _SQRT2), (-1, 1, _SQRT2), (-1, -1, _SQRT2),
)


class GridPlanError(RuntimeError):
    pass


@dataclass
class MetricPath:
    points: list[tuple[float, float]]
    length: float

    def to_dict(self) -> dict:
        return {"points": [[x, y] for x, y in self.points], "length": self.length}


def inflated_obstacles(grid: SemanticOccupancyGrid, inflation: float) -> np.ndarray:
    """Boolean plane marking cells occupied or within `inflation` meters of one."""
    occ = grid.occupied
    if inflation <= 0:
        return occ.copy()
    r = int(math.floor(inflation / grid.resolution + 1e-9))
    if r == 0:
        return occ.copy()
    out = occ.copy()
    h, w = occ.shape
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            if dx == 0 and dy == 0:
                continue
            if (dx * dx + dy * dy) * grid.resolution ** 2 > inflation ** 2 + 1e-12:
                continue
            src_y = slice(max(0, -dy), min(h, h - dy))
            src_x = slice(max(0, -dx), min(w, w - dx))
            dst_y = slice(max(0, dy), min(h, h + dy))
            dst_x = slice(max(0, dx), min(w, w + dx))
            out[dst_y, dst_x] |= occ[src_y, src_x]
    return out


def astar(
    grid: SemanticOccupancyGrid,
    start: Sequence[float],
    goal: Sequence[float],
    inflation: float = DEFAULT_INFLATION,
    blocked: np.ndarray | None = None,
) -> MetricPath:
    """Minimum-length 8-connected path between two world points.

    Returns cell-center points. The Euclidean heuristic is admissible for
    these move costs, so the result length is optimal. `blocked` lets callers
    reuse a precomputed inflation plane.
    """
    if blocked is None:
        blocked = inflated_obstacles(grid, inflation)
    res = grid.resolution

    s = grid.world_to_cell(start[0], start[1])
    g = grid.world_to_cell(goal[0], goal[1])
    for name, (ix, iy) in (("start", s), ("goal", g)):
        if not grid.in_bounds(ix, iy):
            raise GridPlanError(f"{name} {tuple(map(float, (start if name == 'start' else goal)))} outside the grid")
        if blocked[iy, ix]:
            raise GridPlanError(f"{name} cell {ix, iy} is occupied after inflation")

    if s == g:
        return MetricPath(points=[grid.cell_center(*s)], length=0.0)

    def h(ix: int, iy: int) -> float:
        return math.hypot(ix - g[0], iy - g[1]) * res

    g_cost: dict[tuple[int, int], float] = {s: 0.0}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    counter = 0
    heap: list[tuple[float, int, tuple[int, int]]] = [(h(*s), counter, s)]
    closed: set[tuple[int, int]] = set()

    while heap:
        _, _, cell = heapq.heappop(heap)
        if cell in closed:
            continue
        closed.add(cell)
        if cell == g:
            cells = [cell]
            while cells[-1] != s:
                cells.append(parent[cells[-1]])
            cells.reverse()
            points = [grid.cell_center(ix, iy) for ix, iy in cells]
            return MetricPath(points=points, length=g_cost[g])
        cx, cy = cell
        base = g_cost[cell]
        for dx, dy, factor in _MOVES:
            nx, ny = cx + dx, cy + dy
            if not grid.in_bounds(nx, ny) or blocked[ny, nx]:
                continue
            if dx != 0 and dy != 0 and (blocked[cy, nx] or blocked[ny, cx]):
                continue  # corner cut
            cand = base + factor * res
            if cand < g_cost.get((nx, ny), math.inf) - 1e-12:
                g_cost[(nx, ny)] = cand
                parent[(nx, ny)] = cell
                counter += 1
                heapq.heappush(heap, (cand + h(nx, ny), counter, (nx, ny)))

    raise GridPlanError(f"no path from {tuple(s)} to {tuple(g)} after inflation")


def stitch(
    grid: SemanticOccupancyGrid,
    pose: Sequence[float],
    waypoints: Sequence[Sequence[float]],
    inflation: float = DEFAULT_INFLATION,
) -> MetricPath:
    """Concatenate A* segments pose -> w1 -> ... -> wn, dropping duplicate junctions.

    `waypoints` is typically a semantic route's x_y_path. A route that needs
    no movement comes back as an empty path of length 0.
    """
    blocked = inflated_obstacles(grid, inflation)
    points: list[tuple[float, float]] = []
    total = 0.0
    cursor = (float(pose[0]), float(pose[1]))
    for k, wp in enumerate(waypoints):
        try:
            seg = astar(grid, cursor, wp, inflation, blocked=blocked)
        except GridPlanError as exc:
            raise GridPlanError(f"waypoint {k} at {tuple(map(float, wp))}: {exc}") from None
        if points and seg.points and seg.points[0] == points[-1]:
            points.extend(seg.points[1:])
        else:
            points.extend(seg.points)
        total += seg.length
        cursor = (float(wp[0]), float(wp[1]))
    if len(points) < 2:
        return MetricPath(points=[], length=0.0)
    return MetricPath(points=points, length=total)
