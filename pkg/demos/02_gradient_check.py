"""
Checking hand-written gradients with finite differences
=======================================================

Every loss term has an analytic gradient. Here we nudge each parameter of a
tiny model and compare the numerical slope with the analytic one.
"""

import numpy as np

from protofair import init_model
from protofair.training import distributing_reg, rec_loss_user

rng = np.random.default_rng(0)
model = init_model("protomf", 5, 7, d=3, L_u=2, L_i=3, k_i=2, rng=rng)
for p in model.params().values():
    p[...] = rng.normal(size=p.shape)

users = np.array([0, 1, 3])
pos = np.array([2, 5, 0])
neg = rng.integers(7, size=(3, 4))

loss, grads = rec_loss_user(model, users, pos, neg)
print("sampled-softmax loss:", loss)

# central differences on one matrix at a time
h = 1e-6
for name, param in model.params().items():
    numeric = np.zeros_like(param)
    for idx in np.ndindex(param.shape):
        old = param[idx]
        param[idx] = old + h
        up = rec_loss_user(model, users, pos, neg)[0]
        param[idx] = old - h
        down = rec_loss_user(model, users, pos, neg)[0]
        param[idx] = old
        numeric[idx] = (up - down) / (2 * h)
    err = np.max(np.abs(numeric - grads[name])) / max(1.0, np.max(np.abs(numeric)))
    print(f"{name:3s} max relative error {err:.1e}")

# the spreading penalty has its own gradient with respect to the prototypes
P = rng.normal(size=(4, 3))
value, grad = distributing_reg(P)
numeric = np.zeros_like(P)
for idx in np.ndindex(P.shape):
    d = np.zeros_like(P)
    d[idx] = h
    numeric[idx] = (distributing_reg(P + d)[0] - distributing_reg(P - d)[0]) / (2 * h)
print("spreading penalty", value, "gradient error", np.max(np.abs(numeric - grad)))
