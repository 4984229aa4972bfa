from __future__ import annotations

import json
import threading
import time
from http import client as http_client
from pathlib import Path

import pytest

from semnav.service import OperatorService, make_server

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture()
def server():
    service = OperatorService(FIXTURES / "building_4room_hazard.json", seed=4, tick_sleep=0.0)
    # start from the lab so plans match the planner-level fixtures
    from semnav.localization import Pose2D
    from semnav.scenario import NavigationStack, ScenarioConfig
    from semnav.building import load_building_file

    config = ScenarioConfig(
        building_path=FIXTURES / "building_4room_hazard.json",
        initial_pose=Pose2D(2.5, 4.0, 0.0),
        missions=[],
        seed=4,
        n_particles=150,
        beam_stride=3,
    )
    service.config = config
    service.stack = NavigationStack(load_building_file(config.building_path), config)
    httpd = make_server(service, port=0)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield service, httpd.server_address[1]
    service.stop()
    httpd.shutdown()
    httpd.server_close()


def request(port, method, path, body=None, headers=None):
    conn = http_client.HTTPConnection("127.0.0.1", port, timeout=20)
    payload = json.dumps(body) if body is not None else None
    conn.request(method, path, payload, {"Content-Type": "application/json", **(headers or {})})
    resp = conn.getresponse()
    data = resp.read()
    conn.close()
    return resp.status, json.loads(data) if data else None


def wait_idle(service, timeout=60.0):
    t0 = time.time()
    while service.moving and time.time() - t0 < timeout:
        time.sleep(0.05)
    assert not service.moving


class TestQueries:
    def test_building_document(self, server):
        service, port = server
        status, doc = request(port, "GET", "/building")
        assert status == 200
        assert {r["id"] for r in doc["rooms"]} == {
            "lab-west", "corridor-south", "corridor-north", "store-east",
        }

    def test_rooms_panel_attributes(self, server):
        _, port = server
        status, rooms = request(port, "GET", "/rooms")
        assert status == 200
        by_id = {r["id"]: r for r in rooms}
        assert by_id["store-east"]["materials"] == ["concrete", "glass"]
        assert by_id["corridor-south"]["hazard"] == "high"
        assert by_id["corridor-south"]["weight"] == 506.0
        assert by_id["lab-west"]["scan_age_s"] is None

    def test_map_snapshot_shape(self, server):
        _, port = server
        status, snap = request(port, "GET", "/map")
        assert status == 200
        assert snap["width"] == 162 and snap["height"] == 82
        assert len(snap["p"]) == snap["height"]
        assert len(snap["p"][0]) == snap["width"]
        assert snap["version"] == 0

    def test_unknown_endpoint_404(self, server):
        _, port = server
        status, _ = request(port, "GET", "/bogus")
        assert status == 404


class TestWeights:
    def test_roundtrip(self, server):
        _, port = server
        status, w = request(port, "GET", "/weights")
        assert status == 200 and w["w_h_high"] == 500.0
        w["w_d_pull"] = 9.0
        status, updated = request(port, "PUT", "/weights", w)
        assert status == 200 and updated["w_d_pull"] == 9.0
        status, again = request(port, "GET", "/weights")
        assert again == updated

    def test_invalid_weights_422(self, server):
        _, port = server
        status, err = request(port, "PUT", "/weights", {"w_h_high": -3})
        assert status == 422
        assert "weights" in err["error"]

    def test_weight_change_flips_planner_argmin(self, server):
        # hazard building: default plan avoids the south corridor; zeroing the
        # hazard weight makes the (shorter) south corridor optimal again
        _, port = server
        status, before = request(port, "POST", "/plan", {"goal_room": "store-east"})
        assert status == 200
        assert before["semantic_path"]["semantic_path"][0::2] == [
            "lab-west", "corridor-north", "store-east",
        ]
        _, w = request(port, "GET", "/weights")
        w["w_h_high"] = 0.0
        status, _ = request(port, "PUT", "/weights", w)
        assert status == 200
        status, after = request(port, "POST", "/plan", {"goal_room": "store-east"})
        assert status == 200
        assert after["semantic_path"]["semantic_path"][0::2] == [
            "lab-west", "corridor-south", "store-east",
        ]


class TestMissionLifecycle:
    def test_plan_unknown_room_404(self, server):
        _, port = server
        status, err = request(port, "POST", "/plan", {"goal_room": "nowhere"})
        assert status == 404
        assert "nowhere" in err["error"]

    def test_move_without_plan_conflicts(self, server):
        _, port = server
        status, err = request(port, "POST", "/move")
        assert status == 409

    def test_full_mission_and_conflicts(self, server):
        service, port = server
        status, plan = request(port, "POST", "/plan", {"goal_room": "corridor-north"})
        assert status == 200
        assert plan["metric_path"]["length"] > 0
        status, _ = request(port, "POST", "/move")
        assert status == 200
        status, err = request(port, "POST", "/plan", {"goal_room": "lab-west"})
        assert status == 409
        status, err = request(port, "POST", "/move")
        assert status == 409
        wait_idle(service)
        status, snap = request(port, "GET", "/map")
        assert snap["version"] > 0

    def test_stop_aborts_mission(self, server):
        service, port = server
        service.tick_sleep = 0.05  # slow enough to catch it moving
        request(port, "POST", "/plan", {"goal_room": "store-east"})
        request(port, "POST", "/move")
        time.sleep(0.2)
        status, out = request(port, "POST", "/stop")
        assert status == 200
        assert not service.moving


class TestTelemetryStream:
    def read_events(self, port, n, last_event_id=None, timeout=30.0):
        conn = http_client.HTTPConnection("127.0.0.1", port, timeout=timeout)
        headers = {}
        if last_event_id is not None:
            headers["Last-Event-ID"] = str(last_event_id)
        conn.request("GET", "/telemetry", None, headers)
        resp = conn.getresponse()
        events = []
        buf = b""
        t0 = time.time()
        while len(events) < n and time.time() - t0 < timeout:
            chunk = resp.read1(8192)
            if not chunk:
                break
            buf += chunk
            while b"\n\n" in buf:
                block, buf = buf.split(b"\n\n", 1)
                for line in block.decode().splitlines():
                    if line.startswith("data: "):
                        events.append(json.loads(line[6:]))
        conn.close()
        return events

    def test_stream_is_monotonic_and_lossless(self, server):
        service, port = server
        request(port, "POST", "/plan", {"goal_room": "corridor-south"})
        request(port, "POST", "/move")
        events = self.read_events(port, 25)
        assert len(events) >= 25
        ids = [e["id"] for e in events]
        assert ids == list(range(ids[0], ids[0] + len(ids)))
        ticks = [e for e in events if e["type"] == "tick"]
        ts = [e["t"] for e in ticks]
        assert all(b > a for a, b in zip(ts, ts[1:]))
        request(port, "POST", "/stop")
        wait_idle(service)

    def test_resume_from_last_event_id(self, server):
        service, port = server
        request(port, "POST", "/plan", {"goal_room": "corridor-south"})
        request(port, "POST", "/move")
        first = self.read_events(port, 10)
        wait_idle(service)
        resumed = self.read_events(port, 5, last_event_id=first[4]["id"])
        assert resumed[0]["id"] == first[5]["id"]
        assert resumed[0]["seq"] == first[5]["seq"]
