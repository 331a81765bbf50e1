"""
Scoring a user-item pair through prototypes
===========================================

A user and an item each live in a small embedding space. Instead of a dot
product, the model compares them to learned prototypes and scores the pair
from those similarity profiles.
"""

import numpy as np

from protofair import affinity, init_model, k_filter, shifted_cosine, transform

np.set_printoptions(precision=3, suppress=True)

# shifted cosine is plain cosine plus one, so it lives in [0, 2]
print(shifted_cosine([1, 0], [1, 0]), shifted_cosine([1, 0], [0, 1]), shifted_cosine([1, 0], [-1, 0]))

# a toy model: 4 users, 6 items, 3-d embeddings, 4 user and 5 item prototypes
model = init_model("protomf", 4, 6, d=3, L_u=4, L_i=5, k_i=2, rng=1)

# the item's profile against the item prototypes
profile = transform(model.I[2], model.Pi)
print("item 2 similarities:", profile.values)

# k-filtering keeps the two strongest prototypes and zeroes the rest
kept = k_filter(profile, 2)
print("after k=2          :", kept.values, kept.active_mask)

# the score mixes both spaces: user-prototype profile against the item's
# projection, plus the user's projection against the item-prototype profile
print("affinity unfiltered:", affinity(model, 0, 2, use_filtering=False))
print("affinity filtered  :", affinity(model, 0, 2))

# the vectorised scorer agrees with the one-pair composition
print(model.score(0, np.arange(6)))
print([affinity(model, 0, i) for i in range(6)])
