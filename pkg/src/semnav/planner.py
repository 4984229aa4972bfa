"""Room-level route planning over the building hypergraph.

Finds the minimum-total-weight room/door sequence between two rooms. The
total of a route is the sum of all traversed room weights (start and goal
included) plus the weights of the directed door hyperedges used. Routes are
direction sensitive because every door has one hyperedge per direction.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .building import (
    BuildingGraph,
    UnknownRoomError,
    WeightConfig,
    edge_weight,
    touch_scan,
)


@dataclass(frozen=True)
class PathWarning:
    room_id: str
    reason: str  # "on_path": high-weight room on the route; "bypassed": hazardous room avoided
    weight: float

    def to_dict(self) -> dict:
        return {"room_id": self.room_id, "reason": self.reason, "weight": self.weight}


@dataclass
class SemanticPath:
    """Alternating room/door id sequence with matching coordinates."""

    semantic_path: list[str]
    x_y_path: list[tuple[float, float]]
    total_weight: float
    warnings: list[PathWarning] = field(default_factory=list)

    @property
    def rooms(self) -> list[str]:
        return self.semantic_path[0::2]

    @property
    def doors(self) -> list[str]:
        return self.semantic_path[1::2]

    def to_dict(self) -> dict:
        return {
            "semantic_path": list(self.semantic_path),
            "x_y_path": [[x, y] for x, y in self.x_y_path],
            "total_weight": self.total_weight,
            "warnings": [w.to_dict() for w in self.warnings],
        }


class NoPathError(RuntimeError):
    """Start and goal are not connected."""


def _dijkstra(
    graph: BuildingGraph, start: str, goal: str, cfg: WeightConfig, now: float,
) -> tuple[float, list[str]]:
    """Label-setting search; labels order by (cost, id sequence) so equal-cost
    routes resolve to the lexicographically smallest alternating id sequence."""
    node_w = {rid: graph.node_weight(rid, cfg, now) for rid in graph.nodes}

    start_label = (node_w[start], (start,))
    heap: list[tuple[float, tuple[str, ...], str]] = [(start_label[0], start_label[1], start)]
    settled: set[str] = set()
    while heap:
        cost, seq, room = heapq.heappop(heap)
        if room in settled:
            continue
        settled.add(room)
        if room == goal:
            return cost, list(seq)
        for edge in graph.edges_from(room):
            head = edge.head_room
            if head in settled:
                continue
            new_cost = cost + edge_weight(edge, cfg) + node_w[head]
            heapq.heappush(heap, (new_cost, seq + (edge.door_id, head), head))
    raise NoPathError(f"no route from '{start}' to '{goal}'")


def plan(
    graph: BuildingGraph, start: str, goal: str, cfg: WeightConfig, now: float,
) -> SemanticPath:
    """Plan the optimal room/door sequence from start to goal.

    Warnings report two situations: a room on the returned route whose weight
    reaches cfg.warning_threshold ("on_path"), and a hazardous room that the
    route deliberately avoids although it lies on the route that would be
    optimal if hazards were free ("bypassed") -- the operator should know the
    detour exists.
    """
    graph.room(start)
    graph.room(goal)

    cost, seq = _dijkstra(graph, start, goal, cfg, now)

    xy: list[tuple[float, float]] = []
    for i, element in enumerate(seq):
        if i % 2 == 0:
            xy.append(graph.nodes[element].center)
        else:
            xy.append(graph.hyperedges[(element, seq[i - 1])].location)

    route_rooms = seq[0::2]
    warnings: list[PathWarning] = []
    for rid in route_rooms:
        w = graph.node_weight(rid, cfg, now)
        if w >= cfg.warning_threshold:
            warnings.append(PathWarning(room_id=rid, reason="on_path", weight=w))

    if cfg.w_h_high > 0:
        no_hazard_cfg = replace(cfg, w_h_high=0.0)
        try:
            _, ref_seq = _dijkstra(graph, start, goal, no_hazard_cfg, now)
        except NoPathError:
            ref_seq = []
        on_route = set(route_rooms)
        for rid in ref_seq[0::2]:
            if rid in on_route:
                continue
            w = graph.node_weight(rid, cfg, now)
            if w >= cfg.warning_threshold:
                warnings.append(PathWarning(room_id=rid, reason="bypassed", weight=w))

    return SemanticPath(
        semantic_path=list(seq),
        x_y_path=xy,
        total_weight=cost,
        warnings=warnings,
    )


def path_weight(graph: BuildingGraph, semantic_path: Sequence[str], cfg: WeightConfig, now: float) -> float:
    """Recompute a route's total weight from the graph (consistency check hook)."""
    total = 0.0
    for i, element in enumerate(semantic_path):
        if i % 2 == 0:
            total += graph.node_weight(element, cfg, now)
        else:
            total += edge_weight(graph.hyperedges[(element, semantic_path[i - 1])], cfg)
    return total


def replan_after_visit(
    graph: BuildingGraph, path_so_far: SemanticPath | Iterable[str], now: float,
) -> BuildingGraph:
    """Mark every room of a traveled route as freshly scanned.

    Subsequent plans then price those rooms in the most-recent scan band,
    nudging the next route toward unexplored parts of the building. Door ids
    in the sequence are ignored; an id that is neither a room nor a door
    raises UnknownRoomError.
    """
    if isinstance(path_so_far, SemanticPath):
        elements: Iterable[str] = path_so_far.rooms
    else:
        elements = path_so_far
    doors = graph.door_ids()
    updated = graph
    for element in elements:
        if element in doors and element not in graph.nodes:
            continue
        if element not in graph.nodes:
            raise UnknownRoomError(element)
        updated = touch_scan(updated, element, now)
    return updated
