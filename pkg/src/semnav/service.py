"""HTTP service exposing the navigation stack to the operator console.

Endpoints (all JSON):
  GET  /building   building description as loaded
  GET  /rooms      room list with live attributes for the side panel
  GET  /map        belief grid snapshot (occupancy, classes, version)
  GET  /weights    current planner weight configuration
  PUT  /weights    replace the weight configuration (422 on invalid values)
  POST /plan       {"goal_room": id} -> semantic route + metric path (409 while moving)
  POST /move       execute the last plan (409 while moving or without a plan)
  POST /stop       abort the running mission
  GET  /telemetry  server-sent event stream, 10 Hz ticks, resumable by event id

One mission runs at a time; commands arriving mid-mission get 409 conflicts.
"""

from __future__ import annotations

import json
import math
import queue
import threading
import time
from collections import deque
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .building import UnknownRoomError, WeightConfig, load_building_file
from .planner import NoPathError
from .gridplanner import GridPlanError
from .scenario import NavigationStack, ScenarioConfig, load_scenario
from .localization import Pose2D


class TelemetryHub:
    """Fan-out of telemetry events to any number of stream subscribers, with a
    replay ring so clients can resume from their last seen event id."""

    def __init__(self, ring_size: int = 4096):
        self._ring: deque[tuple[int, str]] = deque(maxlen=ring_size)
        self._subscribers: list[queue.Queue] = []
        self._lock = threading.Lock()
        self._next_id = 1

    def publish(self, event: dict) -> int:
        with self._lock:
            event_id = self._next_id
            self._next_id += 1
            payload = json.dumps({"id": event_id, **event}, sort_keys=True)
            self._ring.append((event_id, payload))
            for q in self._subscribers:
                q.put((event_id, payload))
        return event_id

    def subscribe(self, last_event_id: int = 0) -> tuple[queue.Queue, list[tuple[int, str]]]:
        q: queue.Queue = queue.Queue()
        with self._lock:
            backlog = [(i, p) for i, p in self._ring if i > last_event_id]
            self._subscribers.append(q)
        return q, backlog

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)


class ConflictError(RuntimeError):
    pass


class OperatorService:
    """Owns one navigation stack and serializes mission commands against it."""

    def __init__(
        self,
        building_path: str | Path,
        seed: int = 0,
        tick_sleep: float = 0.1,
        scenario_path: str | Path | None = None,
    ):
        self.building_path = Path(building_path)
        self.building_doc = json.loads(self.building_path.read_text(encoding="utf-8"))
        if scenario_path:
            config = load_scenario(scenario_path)
            config.seed = seed
        else:
            graph = load_building_file(self.building_path)
            first_room = graph.nodes[sorted(graph.nodes)[0]]
            config = ScenarioConfig(
                building_path=self.building_path,
                initial_pose=Pose2D(first_room.center[0], first_room.center[1], 0.0),
                missions=[],
                seed=seed,
            )
        self.config = config
        self.stack = NavigationStack(load_building_file(config.building_path), config)
        self.tick_sleep = tick_sleep
        self.hub = TelemetryHub()
        self.lock = threading.RLock()
        self.moving = False
        self._stop = threading.Event()
        self._worker: threading.Thread | None = None

    # ----- queries -------------------------------------------------------

    def rooms_info(self) -> list[dict]:
        with self.lock:
            graph = self.stack.graph
            now = self.stack.now
            out = []
            for rid in sorted(graph.nodes):
                room = graph.nodes[rid]
                mats = graph.material_by_id
                out.append({
                    "id": rid,
                    "name": room.name,
                    "center": [room.center[0], room.center[1]],
                    "area_m2": room.area,
                    "materials": sorted({mats[m].name for m in room.wall_materials if m in mats}),
                    "scan_age_s": None if room.last_scan is None else max(now - room.last_scan, 0.0),
                    "hazard": room.hazard,
                    "weight": graph.node_weight(rid, self.stack.weights, now),
                })
            return out

    def map_snapshot(self) -> dict:
        with self.lock:
            grid = self.stack.belief
            return {
                "resolution": grid.resolution,
                "origin": [grid.origin[0], grid.origin[1]],
                "width": grid.width,
                "height": grid.height,
                "p": [[round(float(v), 3) for v in row] for row in grid.p],
                "classes": [[int(v) for v in row] for row in grid.classes],
                "version": self.stack.map_version,
            }

    def get_weights(self) -> dict:
        with self.lock:
            return self.stack.weights.to_dict()

    def put_weights(self, doc: dict) -> dict:
        try:
            weights = WeightConfig.from_dict(doc)
        except (ValueError, TypeError) as exc:
            raise ValueError(f"invalid weights: {exc}") from None
        with self.lock:
            self.stack.weights = weights
            return weights.to_dict()

    # ----- commands ------------------------------------------------------

    def plan(self, goal_room: str) -> dict:
        with self.lock:
            if self.moving:
                raise ConflictError("mission in progress")
            if goal_room not in self.stack.graph.nodes:
                raise UnknownRoomError(goal_room)
            semantic, metric = self.stack.plan_to(goal_room)
            return {
                "goal": goal_room,
                "semantic_path": semantic.to_dict(),
                "metric_path": metric.to_dict(),
            }

    def move(self) -> dict:
        with self.lock:
            if self.moving:
                raise ConflictError("mission in progress")
            if self.stack.current_metric is None:
                raise ConflictError("no plan to execute")
            self.moving = True
            self._stop.clear()
            self._worker = threading.Thread(target=self._mission_worker, daemon=True)
            self._worker.start()
            return {"status": "moving"}

    def stop(self) -> dict:
        self._stop.set()
        worker = self._worker
        if worker is not None:
            worker.join(timeout=5.0)
        return {"status": "stopped" if not self.moving else "stopping"}

    def _mission_worker(self) -> None:
        goal = None
        arrived = False
        try:
            with self.lock:
                semantic = self.stack.current_semantic
                metric = self.stack.current_metric
                goal = semantic.rooms[-1] if semantic else None
                points = metric.points if metric else []
            if not points:
                arrived = True
                return
            gx, gy = points[-1]
            best = math.inf
            since_progress = 0.0
            for _ in range(self.config.max_mission_ticks):
                if self._stop.is_set():
                    break
                with self.lock:
                    event = self.stack.tick()
                self.hub.publish(event)
                if event["arrived"]:
                    arrived = True
                    break
                with self.lock:
                    pose = self.stack.world.true_pose
                d = math.hypot(gx - pose.x, gy - pose.y)
                if d < best - 1e-3:
                    best = d
                    since_progress = 0.0
                else:
                    since_progress += self.config.dt
                    if since_progress >= self.stack.gains.stuck_timeout:
                        break
                if self.tick_sleep > 0:
                    time.sleep(self.tick_sleep)
        finally:
            with self.lock:
                if arrived and self.stack.current_semantic is not None:
                    from .planner import replan_after_visit

                    self.stack.graph = replan_after_visit(
                        self.stack.graph, self.stack.current_semantic, self.stack.now
                    )
                self.moving = False
            self.hub.publish({
                "type": "mission",
                "goal": goal,
                "arrived": arrived,
                "t": round(self.stack.world.time, 6),
            })


def _json_bytes(payload) -> bytes:
    return json.dumps(payload, sort_keys=True).encode("utf-8")


class _Handler(BaseHTTPRequestHandler):
    service: OperatorService
    static_dir: Path | None = None
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, code: int, payload, content_type: str = "application/json") -> None:
        body = _json_bytes(payload) if content_type == "application/json" else payload
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, code: int, message: str) -> None:
        self._send(code, {"error": message})

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            return json.loads(raw)
        except json.JSONDecodeError:
            raise ValueError("request body is not valid JSON") from None

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        path = self.path.split("?")[0].rstrip("/") or "/"
        service = self.service
        if path == "/building":
            self._send(200, service.building_doc)
        elif path == "/rooms":
            self._send(200, service.rooms_info())
        elif path == "/map":
            self._send(200, service.map_snapshot())
        elif path == "/weights":
            self._send(200, service.get_weights())
        elif path == "/telemetry":
            self._stream_telemetry()
        elif self.static_dir is not None:
            self._serve_static(path)
        else:
            self._error(404, f"no such endpoint: {path}")

    def do_PUT(self):
        path = self.path.rstrip("/")
        if path != "/weights":
            self._error(404, f"no such endpoint: {path}")
            return
        try:
            payload = self._body()
            self._send(200, self.service.put_weights(payload))
        except ValueError as exc:
            self._error(422, str(exc))

    def do_POST(self):
        path = self.path.rstrip("/")
        service = self.service
        try:
            if path == "/plan":
                body = self._body()
                goal = body.get("goal_room")
                if not goal:
                    self._error(422, "body must contain goal_room")
                    return
                self._send(200, service.plan(str(goal)))
            elif path == "/move":
                self._send(200, service.move())
            elif path == "/stop":
                self._send(200, service.stop())
            else:
                self._error(404, f"no such endpoint: {path}")
        except UnknownRoomError as exc:
            self._error(404, f"unknown room: {exc.args[0]}")
        except ConflictError as exc:
            self._error(409, str(exc))
        except (NoPathError, GridPlanError, ValueError) as exc:
            self._error(422, str(exc))

    def _stream_telemetry(self) -> None:
        last_id = 0
        header = self.headers.get("Last-Event-ID")
        if header and header.isdigit():
            last_id = int(header)
        if "last_event_id=" in self.path:
            try:
                last_id = int(self.path.split("last_event_id=")[1].split("&")[0])
            except ValueError:
                pass
        q, backlog = self.service.hub.subscribe(last_id)
        self.send_response(200)
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-cache")
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        try:
            for event_id, payload in backlog:
                self.wfile.write(f"id: {event_id}\ndata: {payload}\n\n".encode())
            self.wfile.flush()
            while True:
                try:
                    event_id, payload = q.get(timeout=1.0)
                    self.wfile.write(f"id: {event_id}\ndata: {payload}\n\n".encode())
                except queue.Empty:
                    self.wfile.write(b": keep-alive\n\n")
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError):
            pass
        finally:
            self.service.hub.unsubscribe(q)

    def _serve_static(self, path: str) -> None:
        assert self.static_dir is not None
        rel = "index.html" if path == "/" else path.lstrip("/")
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            self._error(404, f"not found: {path}")
            return
        types = {".html": "text/html", ".js": "text/javascript", ".css": "text/css",
                 ".map": "application/json"}
        body = target.read_bytes()
        self._send(200, body, content_type=types.get(target.suffix, "application/octet-stream"))


def make_server(
    service: OperatorService, port: int = 0, static_dir: str | Path | None = None
) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {
        "service": service,
        "static_dir": Path(static_dir) if static_dir else None,
    })
    server = ThreadingHTTPServer(("127.0.0.1", port), handler)
    server.daemon_threads = True
    return server


def serve_forever(service: OperatorService, port: int, static_dir=None) -> None:
    server = make_server(service, port, static_dir)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        service.stop()
        server.server_close()
