"""
Explaining items through their prototypes
=========================================

Each item is described by its nearest item prototypes, and each prototype by
the real items closest to it. A 2-d PCA view of items and prototypes is
written to CSV for plotting elsewhere.
"""

import tempfile
from pathlib import Path

import numpy as np

from protofair import TrainConfig, explain_item, export_embedding_projection, generate_synthetic
from protofair import split_leave_one_out, train
from protofair.data import CountrySpec, SynthSpec
from protofair.explain import format_explanations

spec = SynthSpec(300, 200, (6, 20), gamma=1.2,
                 countries=[CountrySpec(c, 1 / 7, m) for c, m in
                            [("US", 1.0), ("GB", 1.0), ("FR", 1.0), ("JP", 0.2), ("BR", 0.2),
                             ("KR", 0.2), ("MX", 0.2)]],
                 taste_clusters=4, taste_boost=20.0)
table, groups = generate_synthetic(spec, seed=2)
split = split_leave_one_out(table, seed=2)
model, _ = train(TrainConfig(d=6, L_u=6, L_i=6, epochs=8, learning_rate=5e-3), split)

labels = [f"item{i}" for i in range(table.n_items)]
under = np.flatnonzero(groups.under_mask(table.n_items))
picked = [int(under[0]), int(np.flatnonzero(groups.over_mask(table.n_items))[0])]

rows = [("ProtoMF", explain_item(model, i, n_protos=3, m_exemplars=1, labels=labels,
                                 item_country=groups.item_country)) for i in picked]
# bold exemplars come from the same country as the explained item
print(format_explanations(rows))
for _, ex in rows:
    print(ex.label, ex.country, "same-country exemplars:", ex.same_country_fraction())

out = Path(tempfile.mkdtemp()) / "projection.csv"
coords = export_embedding_projection(model, "both", groups, out)
print(out, coords.shape)
print("\n".join(out.read_text().splitlines()[:4]))
