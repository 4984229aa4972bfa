"""Desk-scale 2-D world simulation.

Differential-drive kinematics, a semantic lidar (glass and other undetectable
materials are transparent to it), noisy odometry, UWB ranging, and a
pure-pursuit waypoint follower. The same ray-casting core drives both the
simulated lidar (against the ground-truth grid) and the localization filter
(against the belief grid); only the class mask differs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .geometry import traverse_segment_cells
from .grid import SemanticOccupancyGrid
from .gridplanner import MetricPath
from .localization import (
    LaserScan,
    OdometryDelta,
    Pose2D,
    blocking_plane,
    normalize_angle,
    raycast_batch,
)
from .uwb import DEFAULT_TAG_HEIGHT, RangeObservation

V_MAX = 0.5  # m/s
W_MAX = 1.0  # rad/s
DEFAULT_DT = 0.1  # s


@dataclass(frozen=True)
class VelocityCommand:
    linear: float
    angular: float

    def __post_init__(self) -> None:
        if abs(self.linear) > V_MAX + 1e-9:
            raise ValueError(f"|linear| exceeds {V_MAX} m/s")
        if abs(self.angular) > W_MAX + 1e-9:
            raise ValueError(f"|angular| exceeds {W_MAX} rad/s")


@dataclass(frozen=True)
class LidarConfig:
    """Simulated scanner geometry and noise."""

    n_beams: int = 60
    angle_min: float = -math.pi
    fov: float = 2.0 * math.pi
    z_max: float = 6.0
    sigma: float = 0.02
    mask: frozenset[int] = frozenset()  # detectable material classes

    @property
    def angle_increment(self) -> float:
        return self.fov / self.n_beams


@dataclass(frozen=True)
class WorldState:
    true_pose: Pose2D
    grid: SemanticOccupancyGrid  # ground truth; may differ from the a-priori map
    anchors: tuple[tuple[str, tuple[float, float, float]], ...] = ()
    time: float = 0.0
    collided: bool = False


def step(world: WorldState, cmd: VelocityCommand, dt: float) -> WorldState:
    """Advance the unicycle model by dt. Motion whose swept segment crosses an
    occupied cell is blocked: the pose stays put and the collision flag is
    raised (rotation still happens)."""
    if not 0.0 < dt <= 0.5:
        raise ValueError("dt must be in (0, 0.5]")
    pose = world.true_pose
    theta = pose.theta + cmd.angular * dt
    x = pose.x + cmd.linear * math.cos(pose.theta) * dt
    y = pose.y + cmd.linear * math.sin(pose.theta) * dt

    grid = world.grid
    blocked = False
    for ix, iy in traverse_segment_cells((pose.x, pose.y), (x, y), grid.origin, grid.resolution):
        if not grid.in_bounds(ix, iy) or bool(grid.occupied[iy, ix]):
            blocked = True
            break
    if blocked:
        new_pose = Pose2D(pose.x, pose.y, normalize_angle(theta))
    else:
        new_pose = Pose2D(x, y, normalize_angle(theta))
    return replace(world, true_pose=new_pose, time=world.time + dt, collided=blocked)


def simulate_scan(
    world: WorldState, lidar: LidarConfig, rng: np.random.Generator | None = None
) -> LaserScan:
    """Ray cast every beam on the ground-truth grid with the lidar's class
    mask (undetectable walls are transparent), then add Gaussian range noise."""
    pose = world.true_pose
    angles = pose.theta + lidar.angle_min + np.arange(lidar.n_beams) * lidar.angle_increment
    origins = np.tile([[pose.x, pose.y]], (lidar.n_beams, 1))
    blocking = blocking_plane(world.grid, lidar.mask)
    z = raycast_batch(world.grid, origins, angles, lidar.z_max, blocking=blocking)
    if rng is not None and lidar.sigma > 0:
        z = z + rng.normal(0.0, lidar.sigma, lidar.n_beams)
    z = np.clip(z, 1e-6, lidar.z_max)
    return LaserScan(
        angle_min=lidar.angle_min,
        angle_increment=lidar.angle_increment,
        ranges=z,
        range_max=lidar.z_max,
    )


def true_delta(prev: Pose2D, nxt: Pose2D) -> tuple[float, float, float]:
    """Exact rot1 / translate / rot2 decomposition of a pose change."""
    dx, dy = nxt.x - prev.x, nxt.y - prev.y
    trans = math.hypot(dx, dy)
    if trans < 1e-12:
        rot1 = 0.0
    else:
        rot1 = normalize_angle(math.atan2(dy, dx) - prev.theta)
    rot2 = normalize_angle(nxt.theta - prev.theta - rot1)
    return rot1, trans, rot2


def simulate_odometry(
    world_prev: WorldState,
    world_next: WorldState,
    alphas: tuple[float, float, float, float],
    rng: np.random.Generator | None = None,
) -> OdometryDelta:
    """Odometry reading for one tick: the true motion decomposition corrupted
    by the same noise family the filter's motion model assumes."""
    rot1, trans, rot2 = true_delta(world_prev.true_pose, world_next.true_pose)
    a1, a2, a3, a4 = alphas
    if rng is not None:
        sd_r1 = math.sqrt(a1 * rot1 * rot1 + a2 * trans * trans)
        sd_tr = math.sqrt(a3 * trans * trans + a4 * (rot1 * rot1 + rot2 * rot2))
        sd_r2 = math.sqrt(a1 * rot2 * rot2 + a2 * trans * trans)
        if sd_r1 > 0:
            rot1 = rot1 + rng.normal(0.0, sd_r1)
        if sd_tr > 0:
            trans = trans + rng.normal(0.0, sd_tr)
        if sd_r2 > 0:
            rot2 = rot2 + rng.normal(0.0, sd_r2)
    return OdometryDelta(delta_rot1=rot1, delta_trans=max(trans, 0.0) if trans >= 0 else trans,
                         delta_rot2=rot2, alphas=alphas)


def simulate_ranges(
    world: WorldState,
    tag_height: float = DEFAULT_TAG_HEIGHT,
    sigma_uwb: float = 0.1,
    rng: np.random.Generator | None = None,
) -> list[RangeObservation]:
    """One UWB range sample per anchor from the robot's current tag position."""
    pose = world.true_pose
    out: list[RangeObservation] = []
    for anchor_id, (ax, ay, az) in world.anchors:
        d = math.sqrt((ax - pose.x) ** 2 + (ay - pose.y) ** 2 + (az - tag_height) ** 2)
        if rng is not None and sigma_uwb > 0:
            d += float(rng.normal(0.0, sigma_uwb))
        out.append(RangeObservation(
            anchor_id=anchor_id,
            robot_position=(pose.x, pose.y, tag_height),
            range=max(d, 1e-6),
            t=world.time,
        ))
    return out


@dataclass(frozen=True)
class PursuitGains:
    lookahead: float = 0.5
    k_heading: float = 2.5
    goal_tolerance: float = 0.15
    stuck_timeout: float = 10.0  # s without progress before aborting
    v_max: float = V_MAX
    w_max: float = W_MAX


def pursuit_command(
    pose: Pose2D, points: Sequence[tuple[float, float]], gains: PursuitGains = PursuitGains()
) -> VelocityCommand | None:
    """Pure-pursuit style tracking command toward a polyline path.

    Returns None once the pose is within goal_tolerance of the final point.
    The linear speed scales down with heading error so the robot turns in
    place when badly misaligned.
    """
    if not points:
        return None
    gx, gy = points[-1]
    if math.hypot(gx - pose.x, gy - pose.y) <= gains.goal_tolerance:
        return None

    nearest = min(
        range(len(points)),
        key=lambda i: (points[i][0] - pose.x) ** 2 + (points[i][1] - pose.y) ** 2,
    )
    target = points[-1]
    for i in range(nearest, len(points)):
        if math.hypot(points[i][0] - pose.x, points[i][1] - pose.y) >= gains.lookahead:
            target = points[i]
            break

    heading_err = normalize_angle(math.atan2(target[1] - pose.y, target[0] - pose.x) - pose.theta)
    w = max(-gains.w_max, min(gains.w_max, gains.k_heading * heading_err))
    v = gains.v_max * max(0.0, math.cos(heading_err))
    dist_to_goal = math.hypot(gx - pose.x, gy - pose.y)
    v = min(v, max(0.5 * dist_to_goal, 0.05))
    return VelocityCommand(linear=min(v, gains.v_max), angular=w)


@dataclass
class FollowResult:
    world: WorldState
    commands: list[VelocityCommand] = field(default_factory=list)
    poses: list[Pose2D] = field(default_factory=list)
    arrived: bool = False
    aborted: bool = False
    collisions: int = 0


def follow_path(
    world: WorldState,
    path: MetricPath,
    gains: PursuitGains = PursuitGains(),
    dt: float = DEFAULT_DT,
    max_ticks: int = 20000,
) -> FollowResult:
    """Drive the world along a metric path until arrival, a stuck timeout,
    or the tick cap. An empty path means there is nothing to do."""
    result = FollowResult(world=world)
    if not path.points:
        result.arrived = True
        return result

    gx, gy = path.points[-1]
    best = math.hypot(gx - world.true_pose.x, gy - world.true_pose.y)
    since_progress = 0.0
    for _ in range(max_ticks):
        cmd = pursuit_command(result.world.true_pose, path.points, gains)
        if cmd is None:
            result.arrived = True
            return result
        result.world = step(result.world, cmd, dt)
        result.commands.append(cmd)
        result.poses.append(result.world.true_pose)
        if result.world.collided:
            result.collisions += 1
        d = math.hypot(gx - result.world.true_pose.x, gy - result.world.true_pose.y)
        if d < best - 1e-3:
            best = d
            since_progress = 0.0
        else:
            since_progress += dt
            if since_progress >= gains.stuck_timeout:
                result.aborted = True
                return result
    result.aborted = True
    return result
