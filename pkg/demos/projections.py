"""
Projections onto simple convex sets
===================================

Every set in the library has a closed-form nearest-point map. This script
projects a few points and checks two properties by hand: the map never
increases distances, and a projected point stays put when projected again.
"""

import numpy as np

from stringavg import Ball, Box, Halfspace, Hyperplane

sets = {
    "hyperplane 3x + 4y = 5": Hyperplane([3.0, 4.0], 5.0),
    "halfspace x <= 0": Halfspace([1.0, 0.0], 0.0),
    "unit ball": Ball([0.0, 0.0], 1.0),
    "box [0,1]^2": Box([0.0, 0.0], [1.0, 1.0]),
}

x = np.array([2.0, -1.0])
y = np.array([-0.5, 3.0])

for name, s in sets.items():
    px, py = s.project(x), s.project(y)
    print(f"{name:<24} P(x) = {np.round(px, 4)}  d(x) = {s.distance(x):.4f}")
    # nonexpansive: ||P(x) - P(y)|| <= ||x - y||
    assert np.linalg.norm(px - py) <= np.linalg.norm(x - y)
    # idempotent
    assert np.allclose(s.project(px), px)

# the projection onto a hyperplane is the closest point on the line
print("origin onto 3x + 4y = 5:", sets["hyperplane 3x + 4y = 5"].project([0.0, 0.0]))
