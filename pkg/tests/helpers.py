"""Shared test utilities: independent oracles and fixture generators.

The oracles here deliberately re-implement behavior from scratch (brute-force
enumeration, uniform-cost search, dense sampling) so the tests check the
library against an independent route to the same answer.
"""

from __future__ import annotations

import math

import numpy as np

from semnav.building import BuildingGraph, WeightConfig, edge_weight, load_building
from semnav.grid import SemanticOccupancyGrid
from semnav.uwb import RangeObservation


# ---------------------------------------------------------------------------
# brute-force route oracle


def brute_force_min_weight(
    graph: BuildingGraph, start: str, goal: str, cfg: WeightConfig, now: float
) -> float | None:
    """Minimum route weight over all simple room sequences, by DFS enumeration.

    For each hop the cheapest hyperedge between the two rooms is taken, which
    is always optimal since door choice does not constrain later hops.
    """
    node_w = {rid: graph.node_weight(rid, cfg, now) for rid in graph.nodes}
    edge_min: dict[tuple[str, str], float] = {}
    for edge in graph.hyperedges.values():
        key = (edge.tail_room, edge.head_room)
        w = edge_weight(edge, cfg)
        if key not in edge_min or w < edge_min[key]:
            edge_min[key] = w
    adj: dict[str, list[tuple[str, float]]] = {}
    for (tail, head), w in edge_min.items():
        adj.setdefault(tail, []).append((head, w))

    best: list[float | None] = [None]

    def dfs(room: str, visited: frozenset, cost: float) -> None:
        if room == goal:
            if best[0] is None or cost < best[0]:
                best[0] = cost
            return
        for head, w in adj.get(room, ()):
            if head in visited:
                continue
            dfs(head, visited | {head}, cost + w + node_w[head])

    dfs(start, frozenset({start}), node_w[start])
    return best[0]


def rooms_reachable_avoiding(
    graph: BuildingGraph, start: str, goal: str, banned: set[str]
) -> bool:
    """BFS connectivity query that never enters `banned` rooms."""
    if start in banned or goal in banned:
        return False
    seen = {start}
    frontier = [start]
    while frontier:
        room = frontier.pop()
        if room == goal:
            return True
        for edge in graph.edges_from(room):
            head = edge.head_room
            if head not in seen and head not in banned:
                seen.add(head)
                frontier.append(head)
    return False


# ---------------------------------------------------------------------------
# random building generator


def random_building(rng: np.random.Generator, n_rooms: int | None = None,
                    hazard_prob: float = 0.15) -> BuildingGraph:
    """Random connected building with 2..8 rooms, mixed materials, random
    door swings, and occasional parallel doors."""
    if n_rooms is None:
        n_rooms = int(rng.integers(2, 9))
    materials = [
        {"id": 0, "name": "unknown", "detectable_by_lidar": True},
        {"id": 1, "name": "concrete", "detectable_by_lidar": True},
        {"id": 2, "name": "glass", "detectable_by_lidar": False},
    ]
    rooms = []
    for i in range(n_rooms):
        x0 = float(i * 2)
        scanned = rng.random() < 0.6
        age = float(rng.uniform(0, 21 * 24 * 3600))
        rooms.append({
            "id": f"R{i}",
            "name": f"Room {i}",
            "center": [x0 + 1.0, 1.0],
            "area_m2": float(rng.uniform(10.0, 150.0)),
            "polygon": [[x0, 0.0], [x0 + 2.0, 0.0], [x0 + 2.0, 2.0], [x0, 2.0]],
            "walls": [
                {"id": f"w{i}-{k}", "material": int(2 if rng.random() < 0.2 else 1)}
                for k in range(4)
            ],
            "last_scan": (1767225600.0 - age) if scanned else None,
            "hazard": "high" if rng.random() < hazard_prob else "none",
        })

    doors = []
    order = list(rng.permutation(n_rooms))
    for i in range(1, n_rooms):  # spanning tree keeps it connected
        a, b = order[i - 1], order[i]
        doors.append((a, b))
    extra = int(rng.integers(0, n_rooms))
    for _ in range(extra):
        a, b = rng.integers(0, n_rooms, 2)
        if a != b:
            doors.append((int(a), int(b)))

    door_docs = []
    for k, (a, b) in enumerate(doors):
        door_docs.append({
            "id": f"D{k}",
            "rooms": [f"R{a}", f"R{b}"],
            "location": [float(a + b), 1.0],
            "swing": {
                "a_to_b": "push" if rng.random() < 0.5 else "pull",
                "b_to_a": "push" if rng.random() < 0.5 else "pull",
            },
        })
    return load_building({"materials": materials, "rooms": rooms, "doors": door_docs})


# ---------------------------------------------------------------------------
# uniform-cost-search oracle for the grid planner


_ORACLE_MOVES = [
    (0, 1, 1.0), (0, -1, 1.0), (1, 0, 1.0), (-1, 0, 1.0),
    (-1, -1, math.sqrt(2.0)), (-1, 1, math.sqrt(2.0)),
    (1, -1, math.sqrt(2.0)), (1, 1, math.sqrt(2.0)),
]


def ucs_path_length(
    blocked: np.ndarray, start: tuple[int, int], goal: tuple[int, int], resolution: float
) -> float | None:
    """Dijkstra over the same move set and corner rule; None when unreachable."""
    import heapq

    h, w = blocked.shape
    if blocked[start[1], start[0]] or blocked[goal[1], goal[0]]:
        return None
    dist = {start: 0.0}
    heap = [(0.0, start)]
    done = set()
    while heap:
        d, cell = heapq.heappop(heap)
        if cell in done:
            continue
        done.add(cell)
        if cell == goal:
            return d * resolution
        cx, cy = cell
        for dx, dy, cost in _ORACLE_MOVES:
            nx, ny = cx + dx, cy + dy
            if not (0 <= nx < w and 0 <= ny < h) or blocked[ny, nx]:
                continue
            if dx != 0 and dy != 0 and (blocked[cy, nx] or blocked[ny, cx]):
                continue
            nd = d + cost
            if nd < dist.get((nx, ny), math.inf) - 1e-12:
                dist[(nx, ny)] = nd
                heapq.heappush(heap, (nd, (nx, ny)))
    return None


def random_grid(
    rng: np.random.Generator, width: int, height: int, fill: float = 0.2,
    resolution: float = 0.1,
) -> SemanticOccupancyGrid:
    grid = SemanticOccupancyGrid.blank(resolution, (0.0, 0.0), width, height)
    occupied = rng.random((height, width)) < fill
    grid.log_odds[occupied] = 2.0
    grid.classes[occupied] = 1
    return grid


# ---------------------------------------------------------------------------
# UWB helpers


def winding_positions(n: int = 200, center=(3.0, 0.0)) -> np.ndarray:
    """Deterministic wavy loop around the test area; consecutive spacing is a
    bit over 0.1 m and the spread is strongly non-colinear."""
    i = np.arange(n)
    phi = 0.05 * i
    r = 2.5 + 1.5 * np.sin(5.0 * phi)
    x = center[0] + r * np.cos(phi)
    y = center[1] + r * np.sin(phi)
    return np.column_stack([x, y])


def ranges_for_anchor(
    positions: np.ndarray, anchor: tuple[float, float, float], tag_height: float = 0.78,
    sigma: float = 0.0, rng: np.random.Generator | None = None, anchor_id: str = "A",
) -> list[RangeObservation]:
    ax, ay, az = anchor
    out = []
    for k, (x, y) in enumerate(positions):
        d = math.sqrt((ax - x) ** 2 + (ay - y) ** 2 + (az - tag_height) ** 2)
        if sigma > 0 and rng is not None:
            d += float(rng.normal(0.0, sigma))
        out.append(RangeObservation(
            anchor_id=anchor_id, robot_position=(float(x), float(y), tag_height),
            range=max(d, 1e-9), t=float(k),
        ))
    return out


BENCH_ANCHORS = {
    "34": (6.62, 1.44, 1.66),
    "36": (-1.11, 1.61, 1.68),
    "38": (3.52, -2.72, 1.86),
    "40": (4.40, 2.65, 1.87),
}
