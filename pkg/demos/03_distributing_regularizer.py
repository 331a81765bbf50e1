"""
Pushing prototypes apart
========================

The spreading penalty is the Frobenius norm of the prototypes' cosine Gram
matrix. It bottoms out at sqrt(L) when the prototypes are orthogonal and
grows as they bunch together.
"""

import numpy as np

from protofair.explain import prototype_dispersion
from protofair.training import distributing_reg

rng = np.random.default_rng(3)

# orthonormal rows: the floor
Q = np.linalg.qr(rng.normal(size=(8, 5)))[0].T
print("orthogonal, L=5:", distributing_reg(Q)[0], "sqrt(5) =", np.sqrt(5))

# two copies of the same direction hit 2 for L=2
print("duplicated pair:", distributing_reg(np.array([[1.0, 2.0], [2.0, 4.0]]))[0])

# plain gradient descent on the penalty alone spreads a tight cluster
P = np.ones((6, 4)) + 0.05 * rng.normal(size=(6, 4))
for step in range(301):
    value, grad = distributing_reg(P)
    if step % 100 == 0:
        print(f"step {step:3d}: penalty {value:.3f}  mean |cos| {prototype_dispersion(P):.3f}")
    P -= 0.5 * grad
