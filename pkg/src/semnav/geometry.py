"""Small planar geometry helpers shared by the building model and the grids."""

from __future__ import annotations

import math
from typing import Iterator, Sequence

Point = tuple[float, float]


def polygon_area(polygon: Sequence[Point]) -> float:
    """Signed shoelace area (positive for counter-clockwise vertex order)."""
    acc = 0.0
    n = len(polygon)
    for i in range(n):
        x0, y0 = polygon[i]
        x1, y1 = polygon[(i + 1) % n]
        acc += x0 * y1 - x1 * y0
    return 0.5 * acc


def point_in_polygon(point: Point, polygon: Sequence[Point]) -> bool:
    """Even-odd ray test. Points exactly on an edge may land on either side."""
    x, y = point
    inside = False
    n = len(polygon)
    for i in range(n):
        x0, y0 = polygon[i]
        x1, y1 = polygon[(i + 1) % n]
        if (y0 > y) != (y1 > y):
            t = (y - y0) / (y1 - y0)
            if x < x0 + t * (x1 - x0):
                inside = not inside
    return inside


def _segments_intersect(p1: Point, p2: Point, p3: Point, p4: Point) -> bool:
    """Proper intersection of open segments p1p2 and p3p4 (shared endpoints do not count)."""

    def orient(a: Point, b: Point, c: Point) -> float:
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0


def polygon_is_simple(polygon: Sequence[Point]) -> bool:
    """True when no two non-adjacent edges cross."""
    n = len(polygon)
    if n < 3:
        return False
    edges = [(polygon[i], polygon[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j == i + 1) or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(edges[i][0], edges[i][1], edges[j][0], edges[j][1]):
                return False
    return True


def bresenham_cells(ix0: int, iy0: int, ix1: int, iy1: int) -> Iterator[tuple[int, int]]:
    """Integer Bresenham line between two cells, endpoints included."""
    dx = abs(ix1 - ix0)
    dy = -abs(iy1 - iy0)
    sx = 1 if ix0 < ix1 else -1
    sy = 1 if iy0 < iy1 else -1
    err = dx + dy
    x, y = ix0, iy0
    while True:
        yield x, y
        if x == ix1 and y == iy1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy


def traverse_segment_cells(
    p0: Point, p1: Point, origin: Point, resolution: float
) -> Iterator[tuple[int, int]]:
    """Yield every grid cell the segment p0..p1 passes through (Amanatides-Woo walk).

    Unlike a plain Bresenham line between the endpoint cells, this walk is
    watertight: it visits every cell the continuous segment intersects, which
    is what wall rasterization needs.
    """
    ox, oy = origin
    x0 = (p0[0] - ox) / resolution
    y0 = (p0[1] - oy) / resolution
    x1 = (p1[0] - ox) / resolution
    y1 = (p1[1] - oy) / resolution

    ix, iy = int(math.floor(x0)), int(math.floor(y0))
    ix1, iy1 = int(math.floor(x1)), int(math.floor(y1))
    dx, dy = x1 - x0, y1 - y0
    step_x = 1 if dx > 0 else -1
    step_y = 1 if dy > 0 else -1

    if dx != 0:
        t_delta_x = abs(1.0 / dx)
        next_vx = ix + (1 if step_x > 0 else 0)
        t_max_x = abs((next_vx - x0) / dx)
    else:
        t_delta_x = math.inf
        t_max_x = math.inf
    if dy != 0:
        t_delta_y = abs(1.0 / dy)
        next_vy = iy + (1 if step_y > 0 else 0)
        t_max_y = abs((next_vy - y0) / dy)
    else:
        t_delta_y = math.inf
        t_max_y = math.inf

    yield ix, iy
    guard = 4 * (abs(ix1 - ix) + abs(iy1 - iy)) + 8
    for _ in range(guard):
        if ix == ix1 and iy == iy1:
            return
        if t_max_x < t_max_y:
            ix += step_x
            t_max_x += t_delta_x
        else:
            iy += step_y
            t_max_y += t_delta_y
        yield ix, iy
