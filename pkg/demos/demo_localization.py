"""Monte Carlo localization against the building map.

Scatters particles over the west lab, drives the robot toward the south
corridor, and prints how the pose estimate locks onto the true pose within a
few measurement updates.

    python demos/demo_localization.py
"""

import math
from pathlib import Path

import numpy as np

from semnav import Pose2D
from semnav.geometry import point_in_polygon
from semnav.localization import ParticleSet, estimate_pose, normalize_angle
from semnav.scenario import NavigationStack, ScenarioConfig
from semnav.building import load_building_file

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

config = ScenarioConfig(
    building_path=FIXTURES / "building_4room.json",
    initial_pose=Pose2D(3.6, 2.4, 0.3),
    missions=["corridor-south"],
    seed=3,
    n_particles=1000,
    beam_stride=3,
)
stack = NavigationStack(load_building_file(config.building_path), config)

# spread the particles over the whole lab instead of around the known start
room = stack.graph.nodes["lab-west"]
rng = stack.rng
xs, ys = [], []
while len(xs) < config.n_particles:
    x = rng.uniform(0.2, 4.8)
    y = rng.uniform(0.2, 7.8)
    if point_in_polygon((x, y), room.polygon):
        ix, iy = stack.belief.world_to_cell(x, y)
        if not stack.belief.occupied[iy, ix]:
            xs.append(x)
            ys.append(y)
thetas = normalize_angle(0.3 + rng.uniform(-0.3, 0.3, config.n_particles))
stack.particles = ParticleSet(np.column_stack([xs, ys, thetas]),
                              np.full(config.n_particles, 1.0 / config.n_particles))
stack.estimate = estimate_pose(stack.particles)

stack.plan_to("corridor-south")
print(f"{'tick':>4} {'cycles':>6} {'error m':>8} {'spread m':>9}")
for tick in range(400):
    event = stack.tick()
    err = math.hypot(event["pose_est"]["x"] - event["pose_true"]["x"],
                     event["pose_est"]["y"] - event["pose_true"]["y"])
    if tick % 20 == 0 or event["arrived"]:
        print(f"{tick:>4} {event['mcl_cycles']:>6} {err:>8.3f} {event['spread']:>9.3f}")
    if event["arrived"]:
        print("arrived at the corridor")
        break
