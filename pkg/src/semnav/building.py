"""Building knowledge model: rooms, doors, walls, materials, and traversal weights.

The building is a directed hypergraph. Rooms are nodes; every physical door
contributes two directed hyperedges (one per crossing direction) so that door
swing can price pushing and pulling differently. Room weights combine four
components: wall material, floor area, time since the last scan, and hazard.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Mapping

from .geometry import point_in_polygon, polygon_area, polygon_is_simple, traverse_segment_cells
from .grid import P_FREE_PRIOR, P_OCC_PRIOR, SemanticOccupancyGrid

WEEK_S = 7 * 24 * 3600.0
DOOR_WIDTH = 0.9  # m of wall cleared around each door location


class BuildingError(ValueError):
    """Base class for building-document problems."""


class SchemaError(BuildingError):
    """Malformed document: bad JSON, missing field, wrong type. Message carries the field path."""


class IntegrityError(BuildingError):
    """A reference points at an id that does not exist. Message names the dangling id."""


class GeometryError(BuildingError):
    """Degenerate room polygon or an unrealizable door gap."""


class UnknownRoomError(KeyError):
    """Room id not present in the graph."""


@dataclass(frozen=True)
class MaterialClass:
    id: int
    name: str
    detectable_by_lidar: bool


@dataclass(frozen=True)
class RoomNode:
    room_id: str
    name: str
    center: tuple[float, float]
    area: float
    wall_ids: tuple[str, ...]
    wall_materials: tuple[int, ...]  # parallel to wall_ids; material class ids
    last_scan: float | None  # POSIX seconds, None = never scanned
    hazard: str  # "none" | "high"
    polygon: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class DoorHyperedge:
    door_id: str
    tail_room: str
    head_room: str
    location: tuple[float, float]
    direction_cost: str  # "push" | "pull"


@dataclass(frozen=True)
class WeightConfig:
    """Traversal weight constants. All weights are costs; lower totals are preferred."""

    w_m_invisible: float = 12.0
    w_m_visible: float = 4.0
    area_thresholds: tuple[float, float] = (50.0, 100.0)
    area_weights: tuple[float, float, float] = (2.0, 8.0, 12.0)
    scan_thresholds: tuple[float, float] = (WEEK_S, 2 * WEEK_S)  # seconds of scan age
    scan_weights: tuple[float, float, float] = (10.0, 6.0, 0.0)
    w_h_high: float = 500.0
    w_d_push: float = 2.0
    w_d_pull: float = 6.0
    warning_threshold: float = 500.0

    def __post_init__(self) -> None:
        numbers = (
            self.w_m_invisible, self.w_m_visible, *self.area_weights,
            *self.scan_weights, self.w_h_high, self.w_d_push, self.w_d_pull,
            self.warning_threshold,
        )
        if any(not math.isfinite(v) or v < 0 for v in numbers):
            raise ValueError("all weights must be finite and >= 0")
        if not self.area_thresholds[0] < self.area_thresholds[1]:
            raise ValueError("area thresholds must be strictly increasing")
        if not self.scan_thresholds[0] < self.scan_thresholds[1]:
            raise ValueError("scan thresholds must be strictly increasing")

    def to_dict(self) -> dict:
        return {
            "w_m_invisible": self.w_m_invisible,
            "w_m_visible": self.w_m_visible,
            "area_thresholds": list(self.area_thresholds),
            "area_weights": list(self.area_weights),
            "scan_thresholds": list(self.scan_thresholds),
            "scan_weights": list(self.scan_weights),
            "w_h_high": self.w_h_high,
            "w_d_push": self.w_d_push,
            "w_d_pull": self.w_d_pull,
            "warning_threshold": self.warning_threshold,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "WeightConfig":
        kwargs = {}
        for key in (
            "w_m_invisible", "w_m_visible", "w_h_high", "w_d_push", "w_d_pull",
            "warning_threshold",
        ):
            if key in doc:
                kwargs[key] = float(doc[key])
        for key in ("area_thresholds", "scan_thresholds"):
            if key in doc:
                kwargs[key] = tuple(float(v) for v in doc[key])
        for key in ("area_weights", "scan_weights"):
            if key in doc:
                kwargs[key] = tuple(float(v) for v in doc[key])
        return cls(**kwargs)


@dataclass
class BuildingGraph:
    """Directed hypergraph of rooms and doors. Treat instances as immutable;
    operations that change the building return a new graph."""

    nodes: dict[str, RoomNode]
    hyperedges: dict[tuple[str, str], DoorHyperedge]  # keyed by (door_id, tail_room)
    materials: tuple[MaterialClass, ...]
    out_edges: dict[str, tuple[tuple[str, str], ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.out_edges:
            adj: dict[str, list[tuple[str, str]]] = {rid: [] for rid in self.nodes}
            for key, edge in self.hyperedges.items():
                adj[edge.tail_room].append(key)
            self.out_edges = {rid: tuple(sorted(keys)) for rid, keys in adj.items()}

    def room(self, room_id: str) -> RoomNode:
        try:
            return self.nodes[room_id]
        except KeyError:
            raise UnknownRoomError(room_id) from None

    def edges_from(self, room_id: str) -> list[DoorHyperedge]:
        return [self.hyperedges[k] for k in self.out_edges.get(room_id, ())]

    @property
    def material_by_id(self) -> dict[int, MaterialClass]:
        return {m.id: m for m in self.materials}

    def detectable_classes(self) -> frozenset[int]:
        """Material class ids a lidar can see (the sensor mask for ray casting)."""
        return frozenset(m.id for m in self.materials if m.detectable_by_lidar)

    def door_ids(self) -> frozenset[str]:
        return frozenset(e.door_id for e in self.hyperedges.values())

    def room_of_point(self, x: float, y: float) -> str | None:
        for rid in sorted(self.nodes):
            if point_in_polygon((x, y), self.nodes[rid].polygon):
                return rid
        return None

    def node_weight(self, room_id: str, cfg: WeightConfig, now: float) -> float:
        return node_weight(self.room(room_id), cfg, now, self.material_by_id)


def parse_timestamp(value) -> float | None:
    """ISO-8601 string (or epoch number) to POSIX seconds; None passes through."""
    if value is None:
        return None
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).replace("Z", "+00:00")
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def _require(doc: Mapping, key: str, path: str):
    if key not in doc:
        raise SchemaError(f"{path}: missing required field '{key}'")
    return doc[key]


def _point(value, path: str) -> tuple[float, float]:
    try:
        x, y = float(value[0]), float(value[1])
    except (TypeError, ValueError, IndexError):
        raise SchemaError(f"{path}: expected a [x, y] pair") from None
    return (x, y)


def load_building(document: str | Mapping) -> BuildingGraph:
    """Parse and validate a building description (JSON text or an already-parsed dict).

    Every physical door in the document becomes two directed hyperedges. Raises
    SchemaError / IntegrityError / GeometryError with the offending field path
    or id in the message.
    """
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    else:
        doc = document
    if not isinstance(doc, Mapping):
        raise SchemaError("top level: expected a JSON object")

    materials: list[MaterialClass] = []
    seen_ids: set[int] = set()
    for i, mat in enumerate(doc.get("materials", [])):
        path = f"materials[{i}]"
        mid = int(_require(mat, "id", path))
        if mid < 0:
            raise SchemaError(f"{path}: material id must be >= 0")
        if mid in seen_ids:
            raise SchemaError(f"{path}: duplicate material id {mid}")
        seen_ids.add(mid)
        materials.append(MaterialClass(
            id=mid,
            name=str(_require(mat, "name", path)),
            detectable_by_lidar=bool(_require(mat, "detectable_by_lidar", path)),
        ))
    if 0 not in seen_ids:
        materials.insert(0, MaterialClass(id=0, name="unknown", detectable_by_lidar=True))
        seen_ids.add(0)

    nodes: dict[str, RoomNode] = {}
    for i, room in enumerate(_require(doc, "rooms", "top level")):
        path = f"rooms[{i}]"
        rid = str(_require(room, "id", path))
        if rid in nodes:
            raise SchemaError(f"{path}: duplicate room id '{rid}'")
        polygon = tuple(_point(p, f"{path}.polygon[{j}]")
                        for j, p in enumerate(_require(room, "polygon", path)))
        if len(polygon) < 3 or abs(polygon_area(polygon)) <= 0.0:
            raise GeometryError(f"room '{rid}': degenerate polygon")
        if not polygon_is_simple(polygon):
            raise GeometryError(f"room '{rid}': polygon is self-intersecting")
        center = _point(_require(room, "center", path), f"{path}.center")
        if not point_in_polygon(center, polygon):
            raise GeometryError(f"room '{rid}': center lies outside its polygon")
        area = float(_require(room, "area_m2", path))
        if area <= 0:
            raise GeometryError(f"room '{rid}': area must be positive")
        walls = _require(room, "walls", path)
        if len(walls) != len(polygon):
            raise SchemaError(
                f"{path}.walls: expected one wall per polygon edge "
                f"({len(polygon)} edges, got {len(walls)})"
            )
        wall_ids, wall_mats = [], []
        for j, wall in enumerate(walls):
            wpath = f"{path}.walls[{j}]"
            wall_ids.append(str(_require(wall, "id", wpath)))
            mat = int(_require(wall, "material", wpath))
            if mat not in seen_ids:
                raise IntegrityError(f"{wpath}: unknown material id {mat}")
            wall_mats.append(mat)
        hazard = str(room.get("hazard", "none"))
        if hazard not in ("none", "high"):
            raise SchemaError(f"{path}.hazard: expected 'none' or 'high', got '{hazard}'")
        try:
            last_scan = parse_timestamp(room.get("last_scan"))
        except ValueError:
            raise SchemaError(f"{path}.last_scan: not an ISO-8601 timestamp") from None
        nodes[rid] = RoomNode(
            room_id=rid,
            name=str(room.get("name", rid)),
            center=center,
            area=area,
            wall_ids=tuple(wall_ids),
            wall_materials=tuple(wall_mats),
            last_scan=last_scan,
            hazard=hazard,
            polygon=polygon,
        )

    hyperedges: dict[tuple[str, str], DoorHyperedge] = {}
    door_ids: set[str] = set()
    for i, door in enumerate(_require(doc, "doors", "top level")):
        path = f"doors[{i}]"
        did = str(_require(door, "id", path))
        if did in door_ids:
            raise SchemaError(f"{path}: duplicate door id '{did}'")
        door_ids.add(did)
        rooms = _require(door, "rooms", path)
        if len(rooms) != 2:
            raise SchemaError(f"{path}.rooms: expected exactly two room ids")
        room_a, room_b = str(rooms[0]), str(rooms[1])
        if room_a == room_b:
            raise SchemaError(f"{path}: door '{did}' connects a room to itself")
        for rid in (room_a, room_b):
            if rid not in nodes:
                raise IntegrityError(f"door '{did}' references unknown room '{rid}'")
        location = _point(_require(door, "location", path), f"{path}.location")
        swing = _require(door, "swing", path)
        for direction, tail, head in (("a_to_b", room_a, room_b), ("b_to_a", room_b, room_a)):
            cost = str(_require(swing, direction, f"{path}.swing"))
            if cost not in ("push", "pull"):
                raise SchemaError(f"{path}.swing.{direction}: expected 'push' or 'pull'")
            hyperedges[(did, tail)] = DoorHyperedge(
                door_id=did, tail_room=tail, head_room=head,
                location=location, direction_cost=cost,
            )

    return BuildingGraph(nodes=nodes, hyperedges=hyperedges, materials=tuple(materials))


def load_building_file(path) -> BuildingGraph:
    from pathlib import Path

    return load_building(Path(path).read_text(encoding="utf-8"))


def _band(value: float, thresholds: tuple[float, float], weights) -> float:
    """Half-open bands [0, t0), [t0, t1), [t1, inf)."""
    if value < thresholds[0]:
        return weights[0]
    if value < thresholds[1]:
        return weights[1]
    return weights[2]


def node_weight(
    room: RoomNode, cfg: WeightConfig, now: float,
    materials: Mapping[int, MaterialClass],
) -> float:
    """Total room weight: material + area + scan-age + hazard components.

    The material component is the worst over the room's walls: a single wall
    that the lidar cannot see makes the whole room count as hard-to-sense.
    Rooms that were never scanned use the oldest scan band (weight 0), which
    makes them the most attractive to visit.
    """
    w_m = cfg.w_m_visible
    for mat_id in room.wall_materials:
        mat = materials.get(mat_id)
        if mat is not None and not mat.detectable_by_lidar:
            w_m = cfg.w_m_invisible
            break
    w_a = _band(room.area, cfg.area_thresholds, cfg.area_weights)
    if room.last_scan is None:
        w_s = cfg.scan_weights[2]
    else:
        w_s = _band(max(now - room.last_scan, 0.0), cfg.scan_thresholds, cfg.scan_weights)
    w_h = cfg.w_h_high if room.hazard == "high" else 0.0
    return w_m + w_a + w_s + w_h


def edge_weight(edge: DoorHyperedge, cfg: WeightConfig) -> float:
    return cfg.w_d_push if edge.direction_cost == "push" else cfg.w_d_pull


def touch_scan(graph: BuildingGraph, room_id: str, now: float) -> BuildingGraph:
    """Return a new graph with the room's last_scan set to `now`."""
    room = graph.room(room_id)
    nodes = dict(graph.nodes)
    nodes[room_id] = replace(room, last_scan=float(now))
    return BuildingGraph(
        nodes=nodes, hyperedges=graph.hyperedges, materials=graph.materials,
        out_edges=graph.out_edges,
    )


def rasterize(graph: BuildingGraph, resolution: float) -> SemanticOccupancyGrid:
    """Paint wall segments into a fresh grid and clear a gap at every door.

    Walls become occupied cells (p = 0.95) carrying the wall's material class;
    everything else is free (p = 0.05, class 0). The grid covers every room
    polygon plus a one-cell margin. Rooms are painted in sorted id order, so
    the result is deterministic; where two rooms share a wall the later room's
    material wins.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if not graph.nodes:
        raise ValueError("building has no rooms")

    xs = [p[0] for room in graph.nodes.values() for p in room.polygon]
    ys = [p[1] for room in graph.nodes.values() for p in room.polygon]
    origin = (min(xs) - resolution, min(ys) - resolution)
    width = int(math.ceil((max(xs) - min(xs)) / resolution)) + 2
    height = int(math.ceil((max(ys) - min(ys)) / resolution)) + 2

    grid = SemanticOccupancyGrid.blank(resolution, origin, width, height, p=P_FREE_PRIOR)

    for rid in sorted(graph.nodes):
        room = graph.nodes[rid]
        n = len(room.polygon)
        for j in range(n):
            p0, p1 = room.polygon[j], room.polygon[(j + 1) % n]
            mat = room.wall_materials[j]
            for ix, iy in traverse_segment_cells(p0, p1, origin, resolution):
                if grid.in_bounds(ix, iy):
                    grid.set_cell(ix, iy, P_OCC_PRIOR, mat)

    half_gap = DOOR_WIDTH / 2.0
    done_doors: set[str] = set()
    for key in sorted(graph.hyperedges):
        edge = graph.hyperedges[key]
        if edge.door_id in done_doors:
            continue
        done_doors.add(edge.door_id)
        dx, dy = edge.location
        ix0, iy0 = grid.world_to_cell(dx - half_gap, dy - half_gap)
        ix1, iy1 = grid.world_to_cell(dx + half_gap, dy + half_gap)
        cleared = 0
        for iy in range(iy0, iy1 + 1):
            for ix in range(ix0, ix1 + 1):
                if not grid.in_bounds(ix, iy):
                    continue
                cx, cy = grid.cell_center(ix, iy)
                if (cx - dx) ** 2 + (cy - dy) ** 2 <= half_gap ** 2:
                    grid.set_cell(ix, iy, P_FREE_PRIOR, 0)
                    cleared += 1
        if cleared == 0:
            raise GeometryError(
                f"door '{edge.door_id}': gap of {DOOR_WIDTH} m vanishes at resolution {resolution} m"
            )

    return grid
