"""Bayesian merging of live scans into the semantic occupancy grid.

Occupancy evidence accumulates additively in log-odds space: cells a beam
passes through collect free evidence, the cell at the beam's endpoint
collects occupied evidence. Class labels are never touched by merging, so
walls keep their a-priori material class and obstacles discovered at runtime
stay class 0 (unclassified).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import SemanticOccupancyGrid
from .localization import LaserScan, OutOfBoundsError, Pose2D

# re-exported for convenience: the log-odds transform pair lives with the grid
from .grid import logodds, probability  # noqa: F401


@dataclass(frozen=True)
class InverseSensorParams:
    """Evidence increments and saturation bounds for merging."""

    l_occ: float = 0.85
    l_free: float = -0.4
    l_min: float = -5.0
    l_max: float = 5.0

    def __post_init__(self) -> None:
        if self.l_occ <= 0 or self.l_free >= 0:
            raise ValueError("l_occ must be positive and l_free negative")
        if self.l_min >= self.l_max:
            raise ValueError("l_min must be below l_max")


def merge_scan(
    grid: SemanticOccupancyGrid,
    pose: Pose2D,
    scan: LaserScan,
    model: InverseSensorParams = InverseSensorParams(),
) -> SemanticOccupancyGrid:
    """Return a new grid with one scan merged in from the given pose.

    For every beam, cells strictly before the endpoint receive l_free; the
    endpoint cell receives l_occ if the beam actually hit something (range
    below the sensor maximum). Log-odds saturate at [l_min, l_max].
    """
    if not grid.contains_point(pose.x, pose.y):
        raise OutOfBoundsError(f"pose ({pose.x}, {pose.y}) outside the grid")

    out = grid.copy()
    l = out.log_odds
    h, w = l.shape
    angles = pose.theta + scan.angle_min + np.arange(scan.beam_count) * scan.angle_increment
    ranges = np.asarray(scan.ranges, dtype=float)

    ix0, iy0 = grid.world_to_cell(pose.x, pose.y)
    ex = pose.x + ranges * np.cos(angles)
    ey = pose.y + ranges * np.sin(angles)
    res = grid.resolution
    x1 = np.floor((ex - grid.origin[0]) / res).astype(np.int64)
    y1 = np.floor((ey - grid.origin[1]) / res).astype(np.int64)

    # batch Bresenham from the robot cell to every beam endpoint; free cells
    # collect along the way, endpoint cells collect occupancy evidence
    x = np.full(scan.beam_count, ix0, dtype=np.int64)
    y = np.full(scan.beam_count, iy0, dtype=np.int64)
    dx = np.abs(x1 - x)
    dy = -np.abs(y1 - y)
    sx = np.where(x < x1, 1, -1)
    sy = np.where(y < y1, 1, -1)
    err = dx + dy

    free_cells: list[np.ndarray] = []
    hit_mask = ranges < scan.range_max - 1e-9
    inb_end = (x1 >= 0) & (x1 < w) & (y1 >= 0) & (y1 < h)
    occ_flat = (y1[hit_mask & inb_end] * w + x1[hit_mask & inb_end]).copy()

    max_steps = int((dx - dy).max(initial=0)) + 2
    for _ in range(max_steps):
        at_end = (x == x1) & (y == y1)
        inb = (x >= 0) & (x < w) & (y >= 0) & (y < h)
        record = ~at_end & inb
        if record.any():
            free_cells.append(y[record] * w + x[record])
        keep = np.nonzero(~at_end & inb)[0]  # rays leaving the grid stop marching
        if keep.size == 0:
            break
        x, y, x1, y1, err, dx, dy, sx, sy = (
            a[keep] for a in (x, y, x1, y1, err, dx, dy, sx, sy)
        )
        e2 = 2 * err
        step_x = e2 >= dy
        step_y = e2 <= dx
        err = err + np.where(step_x, dy, 0) + np.where(step_y, dx, 0)
        x = x + np.where(step_x, sx, 0)
        y = y + np.where(step_y, sy, 0)

    flat = l.reshape(-1)
    if free_cells:
        np.add.at(flat, np.concatenate(free_cells), model.l_free)
    if occ_flat.size:
        np.add.at(flat, occ_flat, model.l_occ)

    np.clip(l, model.l_min, model.l_max, out=l)
    return out
