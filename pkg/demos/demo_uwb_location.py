"""Locating equipment beacons from robot trajectory ranges.

Reproduces the bench protocol: 70 positions at least 10 cm apart along a
winding trajectory, closed-form trilateration, then trust-region refinement.
Prints clean and noisy (sigma = 0.1 m) recovery errors for four beacons.

    python demos/demo_uwb_location.py
"""

import math

import numpy as np

from semnav.uwb import refine, select_observations, trilaterate
from semnav.uwb import RangeObservation

BEACONS = {
    "34": (6.62, 1.44, 1.66),
    "36": (-1.11, 1.61, 1.68),
    "38": (3.52, -2.72, 1.86),
    "40": (4.40, 2.65, 1.87),
}
TAG_HEIGHT = 0.78


def winding(n=200):
    i = np.arange(n)
    phi = 0.05 * i
    r = 2.5 + 1.5 * np.sin(5.0 * phi)
    return np.column_stack([3.0 + r * np.cos(phi), r * np.sin(phi)])


def observe(positions, beacon, sigma, rng, name):
    ax, ay, az = beacon
    out = []
    for k, (x, y) in enumerate(positions):
        d = math.sqrt((ax - x) ** 2 + (ay - y) ** 2 + (az - TAG_HEIGHT) ** 2)
        if sigma > 0:
            d += rng.normal(0.0, sigma)
        out.append(RangeObservation(name, (x, y, TAG_HEIGHT), max(d, 1e-9), t=k))
    return out


rng = np.random.default_rng(1)
path = winding()
print(f"{'beacon':>6} {'noiseless err':>14} {'noisy err (0.1 m)':>18} {'residual':>9}")
for name, beacon in BEACONS.items():
    clean = select_observations(observe(path, beacon, 0.0, rng, name))
    est_clean = refine(clean, trilaterate(clean, beacon[2]), z_a=beacon[2])
    noisy = select_observations(observe(path, beacon, 0.1, rng, name))
    est_noisy = refine(noisy, trilaterate(noisy, beacon[2]), z_a=beacon[2])

    def err(est):
        return math.hypot(est.position[0] - beacon[0], est.position[1] - beacon[1])

    print(f"{name:>6} {err(est_clean):>14.2e} {err(est_noisy):>18.3f} "
          f"{est_noisy.residual:>9.2f}")

score = est_noisy.colinearity_score
print(f"\n(70 observations per solve; winding-path colinearity score {score:.2f}, "
      "well above the 0.05 rejection threshold)")
