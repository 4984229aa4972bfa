"""Headless scenario runs: the full navigation stack in a seeded closed loop.

A scenario file names a building, an initial pose, UWB anchors and a list of
goal rooms. Each mission is planned on the hypergraph, stitched into a metric
path, and driven tick by tick: simulate motion and sensors, update the
particle filter, merge the scan into the belief map, log telemetry. Runs are
fully deterministic for a given seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .building import BuildingGraph, WeightConfig, load_building_file, rasterize
from .gridplanner import MetricPath, stitch
from .localization import (
    BeamModelParams,
    ParticleSet,
    Pose2D,
    estimate_pose,
    gaussian_particles,
    measurement_update,
    motion_update,
    resample,
)
from .mapmerge import InverseSensorParams, merge_scan
from .planner import SemanticPath, plan, replan_after_visit
from .simulator import (
    DEFAULT_DT,
    LidarConfig,
    PursuitGains,
    VelocityCommand,
    WorldState,
    pursuit_command,
    simulate_odometry,
    simulate_ranges,
    simulate_scan,
    step,
)
from .uwb import DEFAULT_TAG_HEIGHT, RangeObservation, locate_anchors

# fixed reference clock so runs do not depend on the wall clock
DEFAULT_EPOCH = 1767225600.0  # 2026-01-01T00:00:00Z


@dataclass
class ScenarioConfig:
    building_path: Path
    initial_pose: Pose2D
    missions: list[str]
    anchors: list[tuple[str, tuple[float, float, float]]] = field(default_factory=list)
    seed: int = 0
    resolution: float = 0.1
    dt: float = DEFAULT_DT
    epoch: float = DEFAULT_EPOCH
    weights: WeightConfig = field(default_factory=WeightConfig)
    n_particles: int = 500
    beam_stride: int | None = None
    n_beams: int = 60
    z_max: float = 6.0
    sigma_lidar: float = 0.02
    alphas: tuple[float, float, float, float] = (0.02, 0.005, 0.02, 0.005)
    sigma_uwb: float = 0.1
    tag_height: float = DEFAULT_TAG_HEIGHT
    inflation: float = 0.25
    initial_sigma_xy: float = 0.2
    initial_sigma_theta: float = 0.1
    max_mission_ticks: int = 4000
    # measurement model used by the filter (the simulated lidar is sharper)
    sigma_hit: float = 0.2
    beam_mix: tuple[float, float, float, float] = (0.7, 0.05, 0.05, 0.2)
    # particle corrections run only after enough motion accumulates, so each
    # update sees genuinely new evidence
    update_min_trans: float = 0.15
    update_min_rot: float = 0.3


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    pose = doc["initial_pose"]
    kwargs = {}
    for key in (
        "seed", "resolution", "dt", "epoch", "n_particles", "beam_stride", "n_beams",
        "z_max", "sigma_lidar", "sigma_uwb", "tag_height", "inflation",
        "initial_sigma_xy", "initial_sigma_theta", "max_mission_ticks",
        "sigma_hit", "update_min_trans", "update_min_rot",
    ):
        if key in doc:
            kwargs[key] = doc[key]
    if "alphas" in doc:
        kwargs["alphas"] = tuple(float(a) for a in doc["alphas"])
    if "beam_mix" in doc:
        kwargs["beam_mix"] = tuple(float(v) for v in doc["beam_mix"])
    return ScenarioConfig(
        building_path=(path.parent / doc["building"]).resolve(),
        initial_pose=Pose2D(float(pose["x"]), float(pose["y"]), float(pose.get("theta", 0.0))),
        missions=[str(m) for m in doc["missions"]],
        anchors=[
            (str(a["id"]), (float(a["position"][0]), float(a["position"][1]), float(a["position"][2])))
            for a in doc.get("anchors", [])
        ],
        weights=WeightConfig.from_dict(doc.get("weights", {})),
        **kwargs,
    )


class NavigationStack:
    """Owns the coupled state of one robot: building graph, belief map, world,
    particle filter, and the currently executing mission."""

    def __init__(self, graph: BuildingGraph, config: ScenarioConfig):
        self.graph = graph
        self.config = config
        self.weights = config.weights
        self.truth = rasterize(graph, config.resolution)
        self.belief = self.truth.copy()
        self.map_version = 0
        mask = graph.detectable_classes()
        self.lidar = LidarConfig(
            n_beams=config.n_beams, z_max=config.z_max, sigma=config.sigma_lidar, mask=mask
        )
        zh, zs, zm, zr = config.beam_mix
        self.beam_params = BeamModelParams(
            z_hit=zh, z_short=zs, z_max_w=zm, z_rand=zr,
            sigma_hit=config.sigma_hit, sensor_class_mask=mask,
        )
        self.rng = np.random.default_rng(config.seed)
        self.world = WorldState(
            true_pose=config.initial_pose, grid=self.truth,
            anchors=tuple(config.anchors), time=0.0,
        )
        self.particles: ParticleSet = gaussian_particles(
            config.initial_pose, config.n_particles, self.rng,
            sigma_xy=config.initial_sigma_xy, sigma_theta=config.initial_sigma_theta,
        )
        self.estimate = estimate_pose(self.particles)
        self.seq = 0
        self.gains = PursuitGains(v_max=0.4, lookahead=0.45)
        self.current_semantic: SemanticPath | None = None
        self.current_metric: MetricPath | None = None
        self.waypoint_index = 0
        self.ranging_log: list[RangeObservation] = []
        self.sensor_log: list[dict] = []
        self.mcl_cycles = 0
        self._acc_trans = math.inf  # force a correction on the very first tick
        self._acc_rot = math.inf

    @property
    def now(self) -> float:
        return self.config.epoch + self.world.time

    def current_room(self) -> str | None:
        return self.graph.room_of_point(self.estimate.x, self.estimate.y)

    def plan_to(self, goal_room: str) -> tuple[SemanticPath, MetricPath]:
        start = self.current_room()
        if start is None:
            raise ValueError("robot position is not inside any room")
        semantic = plan(self.graph, start, goal_room, self.weights, self.now)
        metric = stitch(
            self.belief, (self.estimate.x, self.estimate.y),
            semantic.x_y_path, self.config.inflation,
        )
        self.current_semantic = semantic
        self.current_metric = metric
        self.waypoint_index = 0
        return semantic, metric

    def _advance_waypoint(self) -> None:
        assert self.current_semantic is not None
        xy = self.current_semantic.x_y_path
        while self.waypoint_index < len(xy) - 1:
            wx, wy = xy[self.waypoint_index]
            if math.hypot(wx - self.estimate.x, wy - self.estimate.y) < 0.5:
                self.waypoint_index += 1
            else:
                break

    def tick(self) -> dict:
        """One control / sense / localize / merge cycle. Returns the telemetry event."""
        if self.current_metric is None:
            raise RuntimeError("no active mission")
        dt = self.config.dt
        cmd = pursuit_command(self.world.true_pose, self.current_metric.points, self.gains)
        arrived = cmd is None
        prev_world = self.world
        if not arrived:
            self.world = step(self.world, cmd, dt)
        else:
            self.world = step(prev_world, VelocityCommand(0.0, 0.0), dt)

        odo = simulate_odometry(prev_world, self.world, self.config.alphas, self.rng)
        scan = simulate_scan(self.world, self.lidar, self.rng)
        self.sensor_log.append({
            "t": round(self.world.time, 6),
            "odom_delta": odo.to_dict(),
            "scan": scan.to_dict(),
        })
        self.particles = motion_update(self.particles, odo, self.rng)
        self._acc_trans += abs(odo.delta_trans)
        self._acc_rot += abs(odo.delta_rot1) + abs(odo.delta_rot2)
        diverged = False
        if (self._acc_trans >= self.config.update_min_trans
                or self._acc_rot >= self.config.update_min_rot):
            self.particles, diverged = measurement_update(
                self.particles, scan, self.belief, self.beam_params,
                beam_stride=self.config.beam_stride, rng=self.rng,
            )
            self.particles = resample(self.particles, self.rng)
            self.mcl_cycles += 1
            self._acc_trans = 0.0
            self._acc_rot = 0.0
        self.estimate = estimate_pose(self.particles)
        self.belief = merge_scan(self.belief, self.estimate, scan, InverseSensorParams())
        self.map_version += 1
        if self.world.anchors:
            self.ranging_log.extend(
                simulate_ranges(self.world, self.config.tag_height, self.config.sigma_uwb, self.rng)
            )
        self._advance_waypoint()

        self.seq += 1
        return {
            "type": "tick",
            "seq": self.seq,
            "t": round(self.world.time, 6),
            "pose_est": _pose_dict(self.estimate),
            "pose_true": _pose_dict(self.world.true_pose),
            "spread": round(self.particles.spread(), 6),
            "waypoint_index": self.waypoint_index,
            "collided": self.world.collided,
            "diverged": diverged,
            "arrived": arrived,
            "map_version": self.map_version,
            "mcl_cycles": self.mcl_cycles,
            "route_warnings": len(self.current_semantic.warnings) if self.current_semantic else 0,
        }

    def run_mission(self, goal_room: str, on_event=None) -> dict:
        """Plan to a room and drive until arrival, stall, or the tick cap."""
        semantic, metric = self.plan_to(goal_room)
        plan_event = {
            "type": "plan",
            "seq": self.seq,
            "t": round(self.world.time, 6),
            "goal": goal_room,
            "semantic_path": semantic.to_dict(),
            "metric_length": round(metric.length, 6),
        }
        if on_event:
            on_event(plan_event)
        gx, gy = metric.points[-1] if metric.points else (self.world.true_pose.x, self.world.true_pose.y)
        best = math.hypot(gx - self.world.true_pose.x, gy - self.world.true_pose.y)
        since_progress = 0.0
        arrived = not metric.points
        for _ in range(self.config.max_mission_ticks):
            if arrived:
                break
            event = self.tick()
            if on_event:
                on_event(event)
            if event["arrived"]:
                arrived = True
                break
            d = math.hypot(gx - self.world.true_pose.x, gy - self.world.true_pose.y)
            if d < best - 1e-3:
                best = d
                since_progress = 0.0
            else:
                since_progress += self.config.dt
                if since_progress >= self.gains.stuck_timeout:
                    break
        self.graph = replan_after_visit(self.graph, semantic, self.now)
        return {
            "goal": goal_room,
            "arrived": arrived,
            "semantic_path": semantic.to_dict(),
            "metric_length": round(metric.length, 6),
            "final_time": round(self.world.time, 6),
        }


def _pose_dict(pose: Pose2D) -> dict:
    return {"x": round(pose.x, 6), "y": round(pose.y, 6), "theta": round(pose.theta, 6)}


def run_scenario(
    config: ScenarioConfig, out_dir: str | Path, seed: int | None = None
) -> dict:
    """Run every mission of a scenario and write telemetry, plans, the ranging
    log, and (when anchors exist) the UWB report into out_dir.

    Returns the run summary. Identical config and seed produce byte-identical
    output files.
    """
    if seed is not None:
        config.seed = seed
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    graph = load_building_file(config.building_path)
    stack = NavigationStack(graph, config)

    telemetry_path = out / "telemetry.jsonl"
    missions = []
    with telemetry_path.open("w", encoding="utf-8") as stream:
        def emit(event: dict) -> None:
            stream.write(json.dumps(event, sort_keys=True) + "\n")

        for goal in config.missions:
            missions.append(stack.run_mission(goal, on_event=emit))

    (out / "plans.json").write_text(
        json.dumps({"missions": missions}, indent=2, sort_keys=True), encoding="utf-8"
    )

    with (out / "sensor_log.jsonl").open("w", encoding="utf-8") as stream:
        for record in stack.sensor_log:
            stream.write(json.dumps(record, sort_keys=True) + "\n")

    summary = {
        "missions": missions,
        "success": all(m["arrived"] for m in missions),
        "ticks": stack.seq,
        "sim_time": round(stack.world.time, 6),
    }

    if config.anchors:
        ranging_path = out / "ranging_log.jsonl"
        with ranging_path.open("w", encoding="utf-8") as stream:
            for obs in stack.ranging_log:
                stream.write(json.dumps(obs.to_dict(), sort_keys=True) + "\n")
        heights = {aid: pos[2] for aid, pos in config.anchors}
        truth = {aid: list(pos) for aid, pos in config.anchors}
        report = locate_anchors(stack.ranging_log, heights, ground_truth=truth)
        (out / "uwb_report.json").write_text(
            json.dumps(report, indent=2, sort_keys=True), encoding="utf-8"
        )
        summary["uwb"] = report

    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True), encoding="utf-8"
    )
    return summary


def replay_sensor_log(
    records,
    grid,
    params: BeamModelParams,
    particles: ParticleSet,
    rng: np.random.Generator,
    beam_stride: int | None = None,
) -> list[tuple[float, Pose2D]]:
    """Run the particle filter offline over a recorded scan/odometry log.

    `records` is an iterable of {t, odom_delta, scan} dicts (or a path to a
    JSON-lines file of them). Returns the pose estimate after every record.
    """
    from .localization import LaserScan, OdometryDelta, resample as resample_particles

    if isinstance(records, (str, Path)):
        with Path(records).open(encoding="utf-8") as stream:
            records = [json.loads(line) for line in stream if line.strip()]

    estimates: list[tuple[float, Pose2D]] = []
    for record in records:
        delta = OdometryDelta.from_dict(record["odom_delta"])
        scan = LaserScan.from_dict(record["scan"])
        particles = motion_update(particles, delta, rng)
        particles, _ = measurement_update(particles, scan, grid, params,
                                          beam_stride=beam_stride, rng=rng)
        particles = resample_particles(particles, rng)
        estimates.append((float(record["t"]), estimate_pose(particles)))
    return estimates
