"""Semantic occupancy grid: per-cell occupancy (stored as log-odds) plus a class label.

The log-odds plane is the single source of truth for occupancy; probabilities
are always derived from it, so the two stay consistent by construction. A cell
is considered occupied when its log-odds is >= 0, i.e. p >= 0.5.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PROB_EPS = 1e-6  # probabilities are clamped to [eps, 1-eps] before the log transform
P_OCC_PRIOR = 0.95
P_FREE_PRIOR = 0.05


def logodds(p):
    """log(p / (1-p)) with p clamped away from 0 and 1."""
    p = np.clip(np.asarray(p, dtype=float), PROB_EPS, 1.0 - PROB_EPS)
    out = np.log(p / (1.0 - p))
    return float(out) if out.ndim == 0 else out


def probability(l):
    """Inverse of :func:`logodds`."""
    l = np.asarray(l, dtype=float)
    out = 1.0 / (1.0 + np.exp(-l))
    return float(out) if out.ndim == 0 else out


@dataclass
class SemanticOccupancyGrid:
    """2-D grid; cell (ix, iy) spans [origin + i*res, origin + (i+1)*res)."""

    resolution: float
    origin: tuple[float, float]
    log_odds: np.ndarray  # (height, width) float64, indexed [iy, ix]
    classes: np.ndarray  # (height, width) int16, 0 = unknown / unclassified

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.log_odds.shape != self.classes.shape:
            raise ValueError("log-odds and class planes must have the same shape")

    @classmethod
    def blank(
        cls, resolution: float, origin: tuple[float, float], width: int, height: int,
        p: float = P_FREE_PRIOR,
    ) -> "SemanticOccupancyGrid":
        l0 = logodds(p)
        return cls(
            resolution=resolution,
            origin=(float(origin[0]), float(origin[1])),
            log_odds=np.full((height, width), l0, dtype=np.float64),
            classes=np.zeros((height, width), dtype=np.int16),
        )

    @property
    def width(self) -> int:
        return self.log_odds.shape[1]

    @property
    def height(self) -> int:
        return self.log_odds.shape[0]

    @property
    def p(self) -> np.ndarray:
        """Occupancy probability plane derived from the log-odds plane."""
        return probability(self.log_odds)

    @property
    def occupied(self) -> np.ndarray:
        """Boolean plane: p >= 0.5, i.e. log-odds >= 0."""
        return self.log_odds >= 0.0

    def copy(self) -> "SemanticOccupancyGrid":
        return SemanticOccupancyGrid(
            resolution=self.resolution,
            origin=self.origin,
            log_odds=self.log_odds.copy(),
            classes=self.classes.copy(),
        )

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        ix = int(np.floor((x - self.origin[0]) / self.resolution))
        iy = int(np.floor((y - self.origin[1]) / self.resolution))
        return ix, iy

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin[0] + (ix + 0.5) * self.resolution,
            self.origin[1] + (iy + 0.5) * self.resolution,
        )

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def contains_point(self, x: float, y: float) -> bool:
        return self.in_bounds(*self.world_to_cell(x, y))

    def set_cell(self, ix: int, iy: int, p: float, class_id: int) -> None:
        self.log_odds[iy, ix] = logodds(p)
        self.classes[iy, ix] = class_id

    def snapshot(self) -> dict:
        """JSON-ready snapshot used by the service and the grid file format."""
        return {
            "resolution": self.resolution,
            "origin": [self.origin[0], self.origin[1]],
            "width": self.width,
            "height": self.height,
            "log_odds": [[float(v) for v in row] for row in self.log_odds],
            "classes": [[int(v) for v in row] for row in self.classes],
        }

    @classmethod
    def from_snapshot(cls, doc: dict) -> "SemanticOccupancyGrid":
        grid = cls(
            resolution=float(doc["resolution"]),
            origin=(float(doc["origin"][0]), float(doc["origin"][1])),
            log_odds=np.asarray(doc["log_odds"], dtype=np.float64),
            classes=np.asarray(doc["classes"], dtype=np.int16),
        )
        if grid.log_odds.shape != (doc["height"], doc["width"]):
            raise ValueError("grid snapshot shape mismatch")
        return grid


def export_grid(grid: SemanticOccupancyGrid, stem: str | Path) -> tuple[Path, Path]:
    """Write <stem>.pgm (occupancy view, dark = occupied) and <stem>.json (exact planes).

    The PGM is a human-viewable rendering; the JSON sidecar carries the exact
    log-odds and class planes, so load_grid round-trips losslessly.
    """
    stem = Path(stem)
    pgm_path = stem.with_suffix(".pgm")
    json_path = stem.with_suffix(".json")

    gray = np.clip((1.0 - grid.p) * 255.0, 0, 255).astype(np.uint8)
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii")
    pgm_path.write_bytes(header + gray[::-1].tobytes())  # top row first

    json_path.write_text(json.dumps(grid.snapshot()), encoding="utf-8")
    return pgm_path, json_path


def load_grid(stem: str | Path) -> SemanticOccupancyGrid:
    json_path = Path(stem).with_suffix(".json")
    return SemanticOccupancyGrid.from_snapshot(json.loads(json_path.read_text(encoding="utf-8")))
