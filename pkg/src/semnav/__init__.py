"""Semantic building navigation toolkit.

Subsystems: building knowledge model and rasterization (``building``),
room-level route planning (``planner``), metric A* planning (``gridplanner``),
semantic Monte Carlo localization (``localization``), scan merging
(``mapmerge``), UWB beacon location (``uwb``), the desk-scale simulator
(``simulator``), scenario runs (``scenario``) and the operator service
(``service``).
"""

from .building import (
    BuildingGraph,
    DoorHyperedge,
    MaterialClass,
    RoomNode,
    WeightConfig,
    edge_weight,
    load_building,
    load_building_file,
    node_weight,
    rasterize,
    touch_scan,
)
from .grid import SemanticOccupancyGrid, export_grid, load_grid, logodds, probability
from .gridplanner import MetricPath, astar, stitch
from .localization import (
    BeamModelParams,
    LaserScan,
    OdometryDelta,
    Particle,
    ParticleSet,
    Pose2D,
    beam_likelihood,
    estimate_pose,
    measurement_update,
    motion_update,
    raycast_semantic,
    resample,
    systematic_resample,
)
from .mapmerge import InverseSensorParams, merge_scan
from .planner import PathWarning, SemanticPath, plan, replan_after_visit
from .simulator import (
    FollowResult,
    LidarConfig,
    VelocityCommand,
    WorldState,
    follow_path,
    simulate_odometry,
    simulate_ranges,
    simulate_scan,
    step,
)
from .uwb import (
    AnchorEstimate,
    RangeObservation,
    colinearity_check,
    locate_anchor,
    locate_anchors,
    refine,
    select_observations,
    trilaterate,
)

__version__ = "0.1.0"
