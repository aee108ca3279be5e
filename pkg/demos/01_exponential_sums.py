"""Closed-form absorption probabilities for two integer-alpha models.

Model A has identity covariance and reflection (1, 1); the probability of
ending in the corner is a single exponential. Model B has a correlated
covariance and needs a three-term sum whose coefficients alternate in sign.
"""

import numpy as np

from wedge_absorb import QuadrantModel, exponential_sum, quadrant_to_wedge, residual_suite

A = QuadrantModel(1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0)
B = QuadrantModel(1.0, -0.5, 1.0, 1.0, 1.0, 2.0, 2.0)

for name, m in (("A", A), ("B", B)):
    w = quadrant_to_wedge(m)
    f = exponential_sum(m)
    print(f"model {name}: beta={w.beta:.6f} alpha={w.alpha:.6f}")
    for a, b, c in f.terms:
        print(f"  {c:+g} * exp({a:g} u {b:+g} v)")
    pde, n1, n2 = residual_suite(f, m, np.linspace(0, 3, 16))
    print(f"  residuals: generator {pde:.1e}, boundary u=0 {n1:.1e}, boundary v=0 {n2:.1e}")
    for u, v in ((0.25, 0.25), (0.5, 0.5), (1.0, 2.0)):
        print(f"  f({u}, {v}) = {float(f(u, v)):.6f}")
