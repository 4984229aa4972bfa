"""Locating static UWB beacons from robot-position / range samples.

The solve is 2.5-D: the beacon's height above the floor is known, so only its
planar position is estimated. A closed-form linear trilateration gives the
initial guess; a damped trust-region Gauss-Newton iteration on the squared
range residuals refines it. The reported residual metric is the sum of
absolute range errors at the solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

DEFAULT_TAG_HEIGHT = 0.78  # m, UWB tag mounted on the robot
MIN_SPACING = 0.10  # m between consecutive positions used in the solve
TARGET_OBSERVATIONS = 70
COLINEARITY_THRESHOLD = 0.05


class ColinearityError(ValueError):
    """Robot positions too close to a line for a stable planar solve."""

    def __init__(self, score: float):
        super().__init__(f"observation positions are (nearly) colinear, score {score:.3g}")
        self.score = score


@dataclass(frozen=True)
class RangeObservation:
    anchor_id: str
    robot_position: tuple[float, float, float]  # tag position (x, y, z)
    range: float
    t: float = 0.0

    def __post_init__(self) -> None:
        if self.range <= 0:
            raise ValueError("range must be positive")

    def to_dict(self) -> dict:
        x, y, z = self.robot_position
        return {"t": self.t, "anchor_id": self.anchor_id,
                "robot": {"x": x, "y": y, "z": z}, "range": self.range}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "RangeObservation":
        robot = doc["robot"]
        return cls(
            anchor_id=str(doc["anchor_id"]),
            robot_position=(float(robot["x"]), float(robot["y"]), float(robot["z"])),
            range=float(doc["range"]),
            t=float(doc.get("t", 0.0)),
        )


@dataclass
class AnchorEstimate:
    anchor_id: str
    position: tuple[float, float]
    z_a: float
    residual: float  # sum of |range error| at the solution
    n_obs: int
    colinearity_score: float
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "anchor_id": self.anchor_id,
            "position": [self.position[0], self.position[1]],
            "z_a": self.z_a,
            "residual": self.residual,
            "n_obs": self.n_obs,
            "colinearity_score": self.colinearity_score,
            "converged": self.converged,
        }


def select_observations(
    stream: Sequence[RangeObservation],
    min_spacing: float = MIN_SPACING,
    target: int = TARGET_OBSERVATIONS,
) -> list[RangeObservation]:
    """Greedy thinning of a time-ordered stream: keep an observation only when
    the robot has moved at least `min_spacing` (planar, boundary inclusive)
    since the previously kept one; stop once `target` are kept."""
    kept: list[RangeObservation] = []
    for obs in stream:
        if kept:
            px, py, _ = kept[-1].robot_position
            x, y, _ = obs.robot_position
            if math.hypot(x - px, y - py) + 1e-12 < min_spacing:
                continue
        kept.append(obs)
        if len(kept) >= target:
            break
    return kept


def colinearity_check(obs: Sequence[RangeObservation]) -> float:
    """Ratio of the smaller to the larger singular value of the mean-centered
    planar position matrix; 0 for a perfect line, near 1 for a round spread."""
    if len(obs) < 3:
        raise ValueError("colinearity check needs at least 3 observations")
    xy = np.array([[o.robot_position[0], o.robot_position[1]] for o in obs])
    centered = xy - xy.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    if s[0] <= 0:
        return 0.0
    return float(s[1] / s[0])


def _positions_and_ranges(obs: Sequence[RangeObservation]) -> tuple[np.ndarray, np.ndarray]:
    pos = np.array([o.robot_position for o in obs], dtype=float)
    rng = np.array([o.range for o in obs], dtype=float)
    return pos, rng


def trilaterate(obs: Sequence[RangeObservation], z_a: float) -> np.ndarray:
    """Closed-form planar beacon position from >= 3 ranging observations.

    Differencing the squared-range equations against the last observation
    linearizes the problem; the normal equations are solved in least-squares
    form (QR-backed), which equals the pseudo-inverse solution.
    """
    if len(obs) < 3:
        raise ValueError("trilateration needs at least 3 observations")
    p, r = _positions_and_ranges(obs)
    xn, yn, zn = p[-1]
    rn = r[-1]
    xi, yi, zi = p[:-1, 0], p[:-1, 1], p[:-1, 2]
    ri = r[:-1]

    a_mat = np.column_stack([2.0 * (xn - xi), 2.0 * (yn - yi)])
    b_vec = (
        ri ** 2 - rn ** 2
        - xi ** 2 - yi ** 2 - zi ** 2
        + xn ** 2 + yn ** 2 + zn ** 2
        - 2.0 * z_a * (zn - zi)
    )

    s = np.linalg.svd(a_mat, compute_uv=False)
    if s[0] <= 0 or s[-1] / s[0] < 1e-10:
        raise ColinearityError(colinearity_check(obs))
    solution, *_ = np.linalg.lstsq(a_mat, b_vec, rcond=None)
    return solution


def _range_residuals(xy: np.ndarray, pos: np.ndarray, rng: np.ndarray, z_a: float) -> np.ndarray:
    d = np.sqrt(
        (xy[0] - pos[:, 0]) ** 2 + (xy[1] - pos[:, 1]) ** 2 + (z_a - pos[:, 2]) ** 2
    )
    return rng - d


def residual_metric(xy: Sequence[float], obs: Sequence[RangeObservation], z_a: float) -> float:
    """Sum of absolute range errors for a candidate beacon position."""
    pos, rng = _positions_and_ranges(obs)
    return float(np.abs(_range_residuals(np.asarray(xy, dtype=float), pos, rng, z_a)).sum())


def refine(
    obs: Sequence[RangeObservation],
    initial: Sequence[float],
    z_a: float,
    max_iter: int = 100,
    history: list | None = None,
) -> AnchorEstimate:
    """Trust-region Gauss-Newton refinement of a beacon position estimate.

    Minimizes the sum of squared range residuals; steps are accepted only
    when they reduce that cost, and the step length is bounded by an adaptive
    trust radius. The returned estimate is never worse (in the absolute-error
    metric) than the initial guess. `history`, when given, collects the
    squared cost of every accepted iterate.
    """
    pos, rng = _positions_and_ranges(obs)
    x = np.asarray(initial, dtype=float).copy()
    anchor_id = obs[0].anchor_id if obs else ""

    def cost2(xy: np.ndarray) -> float:
        return float(np.sum(_range_residuals(xy, pos, rng, z_a) ** 2))

    radius = 1.0
    current = cost2(x)
    if history is not None:
        history.append(current)
    converged = False
    for _ in range(max_iter):
        res = _range_residuals(x, pos, rng, z_a)
        d = np.sqrt(
            (x[0] - pos[:, 0]) ** 2 + (x[1] - pos[:, 1]) ** 2 + (z_a - pos[:, 2]) ** 2
        )
        d = np.maximum(d, 1e-12)
        # residual r_i = range_i - d_i, so dr_i/dx = -(x - px_i)/d_i
        jac = np.column_stack([-(x[0] - pos[:, 0]) / d, -(x[1] - pos[:, 1]) / d])
        grad = 2.0 * jac.T @ res
        if np.linalg.norm(grad) < 1e-12:
            converged = True
            break
        step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        norm = np.linalg.norm(step)
        if norm > radius:
            step = step * (radius / norm)
        trial = x + step
        trial_cost = cost2(trial)
        if trial_cost < current:
            x = trial
            if abs(current - trial_cost) < 1e-16 * max(current, 1.0) or np.linalg.norm(step) < 1e-12:
                current = trial_cost
                if history is not None:
                    history.append(current)
                converged = True
                break
            current = trial_cost
            if history is not None:
                history.append(current)
            radius = min(radius * 2.0, 16.0)
        else:
            radius *= 0.25
            if radius < 1e-14:
                converged = True
                break

    final_metric = residual_metric(x, obs, z_a)
    initial_metric = residual_metric(initial, obs, z_a)
    if final_metric > initial_metric:
        x = np.asarray(initial, dtype=float).copy()
        final_metric = initial_metric

    return AnchorEstimate(
        anchor_id=anchor_id,
        position=(float(x[0]), float(x[1])),
        z_a=z_a,
        residual=final_metric,
        n_obs=len(obs),
        colinearity_score=colinearity_check(obs) if len(obs) >= 3 else 0.0,
        converged=converged,
    )


def locate_anchor(
    observations: Sequence[RangeObservation],
    z_a: float,
    min_spacing: float = MIN_SPACING,
    target: int = TARGET_OBSERVATIONS,
    colinearity_threshold: float = COLINEARITY_THRESHOLD,
) -> AnchorEstimate:
    """Full per-anchor pipeline: thin the stream, gate on colinearity,
    trilaterate, refine."""
    selected = select_observations(observations, min_spacing, target)
    if len(selected) < 3:
        raise ValueError(
            f"anchor '{observations[0].anchor_id if observations else '?'}': "
            f"only {len(selected)} usable observations (need 3)"
        )
    score = colinearity_check(selected)
    if score < colinearity_threshold:
        raise ColinearityError(score)
    initial = trilaterate(selected, z_a)
    return refine(selected, initial, z_a)


def locate_anchors(
    log: Sequence[RangeObservation],
    heights: Mapping[str, float],
    ground_truth: Mapping[str, Sequence[float]] | None = None,
    min_spacing: float = MIN_SPACING,
    target: int = TARGET_OBSERVATIONS,
) -> dict:
    """Solve every anchor present in a ranging log and build a report.

    `heights` maps anchor id to its known height; anchors without a height
    fall back to the ground-truth z when provided. With ground truth, the
    report includes mean/min/max error statistics on x, y and planar distance.
    """
    by_anchor: dict[str, list[RangeObservation]] = {}
    for obs in log:
        by_anchor.setdefault(obs.anchor_id, []).append(obs)

    anchors = []
    failures = []
    errors_x, errors_y, errors_d = [], [], []
    for anchor_id in sorted(by_anchor):
        stream = sorted(by_anchor[anchor_id], key=lambda o: o.t)
        if anchor_id in heights:
            z_a = float(heights[anchor_id])
        elif ground_truth is not None and anchor_id in ground_truth:
            z_a = float(ground_truth[anchor_id][2])
        else:
            failures.append({"anchor_id": anchor_id, "error": "unknown anchor height"})
            continue
        try:
            est = locate_anchor(stream, z_a, min_spacing, target)
        except (ColinearityError, ValueError) as exc:
            entry = {"anchor_id": anchor_id, "error": str(exc)}
            if isinstance(exc, ColinearityError):
                entry["colinearity_score"] = exc.score
            failures.append(entry)
            continue
        entry = est.to_dict()
        if ground_truth is not None and anchor_id in ground_truth:
            gx, gy = float(ground_truth[anchor_id][0]), float(ground_truth[anchor_id][1])
            ex = est.position[0] - gx
            ey = est.position[1] - gy
            entry["error"] = {"x": ex, "y": ey, "planar": math.hypot(ex, ey)}
            errors_x.append(abs(ex))
            errors_y.append(abs(ey))
            errors_d.append(math.hypot(ex, ey))
        anchors.append(entry)

    report = {"anchors": anchors, "failures": failures}
    if errors_d:
        def stats(values: list[float]) -> dict:
            return {"mean": float(np.mean(values)), "min": float(np.min(values)),
                    "max": float(np.max(values))}

        report["error_stats"] = {
            "x": stats(errors_x), "y": stats(errors_y), "planar": stats(errors_d),
        }
    return report
