"""Semantic Monte Carlo localization.

Particle filter against the semantic occupancy grid. The measurement model is
the classic four-density beam mixture, with one twist: the ray caster that
predicts beam ranges skips occupied cells whose material class the sensor
cannot detect (a lidar looks straight through a glass wall), so map and
sensor stay consistent in buildings with mixed wall materials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.special import erf

from .grid import SemanticOccupancyGrid

_SQRT2 = math.sqrt(2.0)
_DENSITY_FLOOR = 1e-300  # keeps log-space weights finite

MAX_BEAMS_PER_UPDATE = 60
DEFAULT_PARTICLES = 1000


class OutOfBoundsError(ValueError):
    """Pose lies outside the grid."""


def normalize_angle(theta):
    """Wrap angle(s) into (-pi, pi]."""
    wrapped = math.pi - np.mod(math.pi - np.asarray(theta, dtype=float), 2.0 * math.pi)
    return float(wrapped) if wrapped.ndim == 0 else wrapped


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "theta": self.theta}


@dataclass(frozen=True)
class Particle:
    pose: Pose2D
    weight: float


@dataclass
class LaserScan:
    angle_min: float
    angle_increment: float
    ranges: np.ndarray
    range_max: float

    def __post_init__(self) -> None:
        self.ranges = np.asarray(self.ranges, dtype=float)
        if self.ranges.size < 1:
            raise ValueError("scan needs at least one beam")
        if np.any(self.ranges <= 0) or np.any(self.ranges > self.range_max + 1e-9):
            raise ValueError("ranges must lie in (0, range_max]")

    @property
    def beam_count(self) -> int:
        return int(self.ranges.size)

    def to_dict(self) -> dict:
        return {
            "angle_min": self.angle_min,
            "angle_increment": self.angle_increment,
            "ranges": [float(r) for r in self.ranges],
            "range_max": self.range_max,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LaserScan":
        return cls(
            angle_min=float(doc["angle_min"]),
            angle_increment=float(doc["angle_increment"]),
            ranges=np.asarray(doc["ranges"], dtype=float),
            range_max=float(doc["range_max"]),
        )


@dataclass(frozen=True)
class BeamModelParams:
    """Mixture weights and shape parameters of the beam measurement model.

    sensor_class_mask holds the material class ids this sensor can detect;
    class 0 (unknown) is always treated as detectable. The max-range
    component is spread over the final `max_window` meters so the mixture
    stays a proper density.
    """

    z_hit: float = 0.8
    z_short: float = 0.05
    z_max_w: float = 0.05
    z_rand: float = 0.10
    sigma_hit: float = 0.1
    lambda_short: float = 1.0
    sensor_class_mask: frozenset[int] = frozenset()
    max_window: float = 0.1

    def __post_init__(self) -> None:
        weights = (self.z_hit, self.z_short, self.z_max_w, self.z_rand)
        if any(w < 0 for w in weights):
            raise ValueError("mixture weights must be >= 0")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise ValueError("mixture weights must sum to 1")
        if self.sigma_hit <= 0 or self.lambda_short <= 0 or self.max_window <= 0:
            raise ValueError("sigma_hit, lambda_short and max_window must be positive")


@dataclass(frozen=True)
class OdometryDelta:
    """Relative motion in rot1 / translate / rot2 form, with motion-noise alphas."""

    delta_rot1: float
    delta_trans: float
    delta_rot2: float
    alphas: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if any(a < 0 for a in self.alphas):
            raise ValueError("noise alphas must be >= 0")

    def to_dict(self) -> dict:
        return {
            "delta_rot1": self.delta_rot1,
            "delta_trans": self.delta_trans,
            "delta_rot2": self.delta_rot2,
            "alphas": list(self.alphas),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "OdometryDelta":
        return cls(
            delta_rot1=float(doc["delta_rot1"]),
            delta_trans=float(doc["delta_trans"]),
            delta_rot2=float(doc["delta_rot2"]),
            alphas=tuple(float(a) for a in doc.get("alphas", (0, 0, 0, 0))),
        )


@dataclass
class ParticleSet:
    """Pose hypotheses as a (N, 3) array plus normalized weights."""

    poses: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        self.poses = np.asarray(self.poses, dtype=float).reshape(-1, 3)
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if self.poses.shape[0] != self.weights.shape[0]:
            raise ValueError("poses and weights must have the same length")

    def __len__(self) -> int:
        return self.poses.shape[0]

    @classmethod
    def from_particles(cls, particles: Iterable[Particle]) -> "ParticleSet":
        items = list(particles)
        poses = np.array([[p.pose.x, p.pose.y, p.pose.theta] for p in items], dtype=float)
        weights = np.array([p.weight for p in items], dtype=float)
        return cls(poses, weights).normalized()

    @classmethod
    def single(cls, pose: Pose2D) -> "ParticleSet":
        return cls(np.array([[pose.x, pose.y, pose.theta]]), np.array([1.0]))

    def particles(self) -> list[Particle]:
        return [
            Particle(Pose2D(x, y, th), w)
            for (x, y, th), w in zip(self.poses, self.weights)
        ]

    def normalized(self) -> "ParticleSet":
        total = self.weights.sum()
        if total <= 0:
            raise ValueError("total particle weight must be positive")
        return ParticleSet(self.poses.copy(), self.weights / total)

    def ess(self) -> float:
        """Effective sample size 1 / sum(w^2)."""
        return float(1.0 / np.sum(self.weights ** 2))

    def spread(self) -> float:
        """RMS distance of particles from their weighted mean position."""
        mx = float(np.dot(self.weights, self.poses[:, 0]))
        my = float(np.dot(self.weights, self.poses[:, 1]))
        d2 = (self.poses[:, 0] - mx) ** 2 + (self.poses[:, 1] - my) ** 2
        return float(math.sqrt(np.dot(self.weights, d2)))


def blocking_plane(grid: SemanticOccupancyGrid, mask: Iterable[int]) -> np.ndarray:
    """Cells that stop a beam: occupied and of a class the sensor detects.

    Class 0 always blocks (an unclassified obstacle is assumed detectable).
    """
    occupied = grid.occupied
    classes = grid.classes
    top = int(classes.max(initial=0))
    allowed = np.zeros(top + 1, dtype=bool)
    allowed[0] = True
    for c in mask:
        if 0 <= int(c) <= top:
            allowed[int(c)] = True
    return occupied & allowed[classes]


def raycast_batch(
    grid: SemanticOccupancyGrid,
    origins: np.ndarray,
    angles: np.ndarray,
    z_max: float,
    mask: Iterable[int] = (),
    blocking: np.ndarray | None = None,
) -> np.ndarray:
    """Bresenham ray cast for many rays at once.

    origins: (R, 2) world coordinates; angles: (R,) world-frame directions.
    Returns (R,) distances to the first blocking cell's center, or z_max when
    nothing blocks the beam within range (including rays leaving the grid).
    """
    origins = np.asarray(origins, dtype=float).reshape(-1, 2)
    angles = np.asarray(angles, dtype=float).reshape(-1)
    if blocking is None:
        blocking = blocking_plane(grid, mask)
    res = grid.resolution
    ox, oy = grid.origin
    h, w = blocking.shape

    x = np.floor((origins[:, 0] - ox) / res).astype(np.int64)
    y = np.floor((origins[:, 1] - oy) / res).astype(np.int64)
    ex = origins[:, 0] + z_max * np.cos(angles)
    ey = origins[:, 1] + z_max * np.sin(angles)
    x1 = np.floor((ex - ox) / res).astype(np.int64)
    y1 = np.floor((ey - oy) / res).astype(np.int64)

    dx = np.abs(x1 - x)
    dy = -np.abs(y1 - y)
    sx = np.where(x < x1, 1, -1)
    sy = np.where(y < y1, 1, -1)
    err = dx + dy

    blocking_flat = blocking.reshape(-1)
    dist = np.full(origins.shape[0], float(z_max))
    idx = np.arange(origins.shape[0])  # rays still marching, as global indices
    done = np.zeros(origins.shape[0], dtype=bool)
    max_steps = int((dx - dy).max(initial=0)) + 2

    # march in chunks: record visited cells for CHUNK plain bresenham steps,
    # then resolve first hits for the whole chunk in one gather
    chunk = 16
    for _ in range(max_steps // chunk + 1):
        n = x.shape[0]
        lin_rows = np.empty((chunk, n), dtype=np.int64)
        valid_rows = np.empty((chunk, n), dtype=bool)
        for s in range(chunk):
            inb = (x.astype(np.uint64) < w) & (y.astype(np.uint64) < h)
            valid_rows[s] = inb & ~done
            lin_rows[s] = np.where(inb, y * w + x, 0)
            done = done | ~inb | ((x == x1) & (y == y1))
            e2 = 2 * err
            step_x = e2 >= dy
            step_y = e2 <= dx
            err = err + np.where(step_x, dy, 0) + np.where(step_y, dx, 0)
            x = x + np.where(step_x, sx, 0)
            y = y + np.where(step_y, sy, 0)
        hits = blocking_flat[lin_rows] & valid_rows
        any_hit = hits.any(axis=0)
        if any_hit.any():
            first = hits.argmax(axis=0)
            cells = lin_rows[first, np.arange(n)][any_hit]
            gi = idx[any_hit]
            cx = ox + (cells % w + 0.5) * res
            cy = oy + (cells // w + 0.5) * res
            dist[gi] = np.minimum(np.hypot(cx - origins[gi, 0], cy - origins[gi, 1]), z_max)
        alive = np.nonzero(~done & ~any_hit)[0]
        if alive.size == 0:
            break
        idx, x, y, x1, y1, err, dx, dy, sx, sy = (
            a[alive] for a in (idx, x, y, x1, y1, err, dx, dy, sx, sy)
        )
        done = np.zeros(alive.size, dtype=bool)

    return dist


def raycast_semantic(
    grid: SemanticOccupancyGrid,
    pose: Pose2D,
    beam_angle: float,
    z_max: float,
    mask: Iterable[int] = (),
) -> float:
    """Distance the sensor would report along one beam.

    beam_angle is relative to the pose heading. Occupied cells whose class is
    not in `mask` are skipped: the beam passes through obstacles this sensor
    cannot see. Raises OutOfBoundsError when the pose is outside the grid.
    """
    if not grid.contains_point(pose.x, pose.y):
        raise OutOfBoundsError(f"pose ({pose.x}, {pose.y}) outside the grid")
    out = raycast_batch(
        grid,
        np.array([[pose.x, pose.y]]),
        np.array([pose.theta + beam_angle]),
        z_max,
        mask=mask,
    )
    return float(out[0])


def _truncated_gaussian(z, z_star, sigma, z_max):
    """N(z; z_star, sigma) renormalized on [0, z_max]."""
    pdf = np.exp(-0.5 * ((z - z_star) / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))
    hi = 0.5 * (1.0 + erf((z_max - z_star) / (sigma * _SQRT2)))
    lo = 0.5 * (1.0 + erf((0.0 - z_star) / (sigma * _SQRT2)))
    eta = np.maximum(hi - lo, 1e-12)
    return pdf / eta


def beam_density(z, z_star, z_max: float, params: BeamModelParams):
    """Four-density beam mixture, vector friendly. Every component is a proper
    density on [0, z_max], so the mixture integrates to one."""
    z = np.asarray(z, dtype=float)
    z_star = np.asarray(z_star, dtype=float)

    out = np.zeros(np.broadcast(z, z_star).shape)
    if params.z_hit > 0:
        out = out + params.z_hit * _truncated_gaussian(z, z_star, params.sigma_hit, z_max)
    if params.z_short > 0:
        lam = params.lambda_short
        norm = 1.0 - math.exp(-lam * z_max)
        out = out + params.z_short * lam * np.exp(-lam * z) / norm
    if params.z_max_w > 0:
        window = min(params.max_window, z_max)
        out = out + params.z_max_w * (z >= z_max - window) / window
    if params.z_rand > 0:
        out = out + params.z_rand / z_max
    return np.maximum(out, _DENSITY_FLOOR)


def beam_likelihood(z: float, z_star: float, z_max: float, params: BeamModelParams) -> float:
    """Likelihood of measuring z when the map predicts z_star."""
    return float(beam_density(z, z_star, z_max, params))


def measurement_update(
    particles: ParticleSet,
    scan: LaserScan,
    grid: SemanticOccupancyGrid,
    params: BeamModelParams,
    beam_stride: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[ParticleSet, bool]:
    """Reweight particles by the scan likelihood (product over sampled beams).

    Likelihoods accumulate in log space. If the total weight collapses to
    zero, the filter reinitializes uniformly over free space and returns
    diverged=True.
    """
    n = len(particles)
    k = scan.beam_count
    if beam_stride is None:
        beam_stride = max(1, math.ceil(k / MAX_BEAMS_PER_UPDATE))
    idx = np.arange(0, k, beam_stride)
    beam_angles = scan.angle_min + idx * scan.angle_increment
    z = scan.ranges[idx]

    blocking = blocking_plane(grid, params.sensor_class_mask)
    world_angles = particles.poses[:, 2:3] + beam_angles[None, :]
    origins = np.repeat(particles.poses[:, :2], idx.size, axis=0)
    z_star = raycast_batch(
        grid, origins, world_angles.ravel(), scan.range_max, blocking=blocking
    ).reshape(n, idx.size)

    log_lik = np.log(beam_density(z[None, :], z_star, scan.range_max, params)).sum(axis=1)
    log_w = np.log(np.maximum(particles.weights, _DENSITY_FLOOR)) + log_lik
    log_w -= log_w.max()
    w = np.exp(log_w)
    total = w.sum()
    if not np.isfinite(total) or total <= 0.0:
        if rng is None:
            rng = np.random.default_rng()
        return uniform_free_particles(grid, n, rng), True
    return ParticleSet(particles.poses.copy(), w / total), False


def motion_update(
    particles: ParticleSet, delta: OdometryDelta, rng: np.random.Generator
) -> ParticleSet:
    """Propagate every particle through the odometry motion model with sampled noise."""
    n = len(particles)
    a1, a2, a3, a4 = delta.alphas
    r1, tr, r2 = delta.delta_rot1, delta.delta_trans, delta.delta_rot2

    sd_r1 = math.sqrt(a1 * r1 * r1 + a2 * tr * tr)
    sd_tr = math.sqrt(a3 * tr * tr + a4 * (r1 * r1 + r2 * r2))
    sd_r2 = math.sqrt(a1 * r2 * r2 + a2 * tr * tr)
    r1_hat = r1 - (rng.normal(0.0, sd_r1, n) if sd_r1 > 0 else 0.0)
    tr_hat = tr - (rng.normal(0.0, sd_tr, n) if sd_tr > 0 else 0.0)
    r2_hat = r2 - (rng.normal(0.0, sd_r2, n) if sd_r2 > 0 else 0.0)

    poses = particles.poses.copy()
    heading = poses[:, 2] + r1_hat
    poses[:, 0] += tr_hat * np.cos(heading)
    poses[:, 1] += tr_hat * np.sin(heading)
    poses[:, 2] = normalize_angle(heading + r2_hat)
    return ParticleSet(poses, particles.weights.copy())


def systematic_resample(
    particles: ParticleSet, rng: np.random.Generator, n: int | None = None
) -> ParticleSet:
    """Low-variance systematic resampling; output weights are uniform."""
    if n is None:
        n = len(particles)
    cum = np.cumsum(particles.weights)
    cum[-1] = 1.0
    u = (rng.random() + np.arange(n)) / n
    idx = np.minimum(np.searchsorted(cum, u, side="right"), len(particles) - 1)
    return ParticleSet(particles.poses[idx].copy(), np.full(n, 1.0 / n))


def resample(
    particles: ParticleSet, rng: np.random.Generator, n: int | None = None
) -> ParticleSet:
    """Resample only when the effective sample size drops below half the set size."""
    if particles.ess() >= len(particles) / 2.0:
        return particles
    return systematic_resample(particles, rng, n)


def estimate_pose(particles: ParticleSet) -> Pose2D:
    """Weighted mean position and circular weighted mean heading.

    If the heading unit vectors cancel exactly, the first particle's heading
    is used (the circular mean is ambiguous in that case).
    """
    if len(particles) == 0:
        raise ValueError("cannot estimate a pose from an empty particle set")
    w = particles.weights
    x = float(np.dot(w, particles.poses[:, 0]))
    y = float(np.dot(w, particles.poses[:, 1]))
    vx = float(np.dot(w, np.cos(particles.poses[:, 2])))
    vy = float(np.dot(w, np.sin(particles.poses[:, 2])))
    if math.hypot(vx, vy) < 1e-12:
        theta = float(particles.poses[0, 2])
    else:
        theta = math.atan2(vy, vx)
    return Pose2D(x, y, theta)


def uniform_free_particles(
    grid: SemanticOccupancyGrid, n: int, rng: np.random.Generator
) -> ParticleSet:
    """Uniform particle set over the grid's free cells."""
    free_iy, free_ix = np.nonzero(~grid.occupied)
    if free_ix.size == 0:
        raise ValueError("grid has no free cells")
    pick = rng.integers(0, free_ix.size, n)
    res = grid.resolution
    xs = grid.origin[0] + (free_ix[pick] + rng.random(n)) * res
    ys = grid.origin[1] + (free_iy[pick] + rng.random(n)) * res
    thetas = normalize_angle(rng.uniform(-math.pi, math.pi, n))
    poses = np.column_stack([xs, ys, thetas])
    return ParticleSet(poses, np.full(n, 1.0 / n))


def gaussian_particles(
    pose: Pose2D, n: int, rng: np.random.Generator,
    sigma_xy: float = 0.3, sigma_theta: float = 0.1,
) -> ParticleSet:
    """Particle set clustered around a known starting pose."""
    xs = rng.normal(pose.x, sigma_xy, n)
    ys = rng.normal(pose.y, sigma_xy, n)
    thetas = normalize_angle(rng.normal(pose.theta, sigma_theta, n))
    return ParticleSet(np.column_stack([xs, ys, thetas]), np.full(n, 1.0 / n))
