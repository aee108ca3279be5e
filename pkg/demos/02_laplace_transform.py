"""Laplace transform of a boundary measure when alpha is not an integer.

No finite exponential sum exists here, so the transform is assembled from a
decoupling pair, a gluing function and a rational correction. The script
checks the boundary value relation on the hyperbola and shows the algebraic
tail phi1(y) ~ C y^-(alpha+1).
"""

import math

import numpy as np

from wedge_absorb import WedgeModel, classify, laplace_solution, wedge_to_quadrant

w = WedgeModel(1.0, 0.6, 2.5, 2 * math.pi - 1 - 2.5)
m = wedge_to_quadrant(w, 0.8)
cls = classify(w)
print(f"alpha = {w.alpha:.6f}  class = {cls.kind}  (d, r) = {cls.dr}")

sol = laplace_solution(m)
print(f"correction: {len(sol.S.points)} point(s), degree {sol.S.degree}")
print(f"boundary value residual on hyperbola: {np.max(sol.bvp_residual(np.geomspace(0.1, 10, 25))):.2e}")

print("\n       y        phi1(y)    y^(alpha+1) phi1(y)")
for y in np.geomspace(1e-2, 1e6, 9):
    v = complex(sol.phi1(y)).real
    print(f"{y:10.3g}  {v:12.6e}  {v * y ** (w.alpha + 1):12.6f}")
