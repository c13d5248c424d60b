"""The ranking view of contrastive learning, on desk-sized examples.

Walks from plain InfoNCE to the blended ranking objective: ordered
views, judgment matrices, and the single softmax over all view/negative
pairs.
"""

import math

import numpy as np

import rankgcl.autodiff as ad
from rankgcl import SbmSpec, ViewSpec, generate_sbm, make_views
from rankgcl.losses import (SimilarityConfig, c2f_loss, fine_ground_truth,
                            info_nce, judgment_matrices, listnet_ce,
                            score_matrix)

rng = np.random.default_rng(4)
cfg = SimilarityConfig(temperature=0.1)

# --- InfoNCE is listwise ranking with a one-hot target ----------------------
q, p = rng.standard_normal(8), rng.standard_normal(8)
negs = rng.standard_normal((5, 8))
nce = info_nce(q, p, negs, cfg).item()
scores = np.concatenate([[q @ p], negs @ q]) / cfg.temperature
target = np.concatenate([[0.0], np.full(5, -np.inf)])  # positive first, rest bottom
print(f"InfoNCE                    : {nce:.12f}")
print(f"listwise CE, one-hot target: {listnet_ce(target, scores).item():.12f}")

# --- ordered augmented views -------------------------------------------------
graph = generate_sbm(SbmSpec((10, 10), 0.4, 0.05, 6, 1.0, seed=1))
specs = [ViewSpec("drop_edge", 0.5, 1.0, 0),   # mild view, high judgment
         ViewSpec("drop_edge", 0.8, 0.7, 1)]   # strong view, low judgment
views = make_views(graph, specs, np.random.default_rng(0))
print("\nview edge counts:", [v.num_undirected_edges for v in views],
      f"(clean graph has {graph.num_undirected_edges})")

# --- the judgment matrix blends two kinds of supervision ---------------------
z_n = rng.standard_normal(6)
negs_n = rng.standard_normal((3, 6))
g_n = fine_ground_truth(z_n, negs_n, cfg)   # node's own similarity profile
j_c, j_f, j_a = judgment_matrices([1.0, 0.7], g_n, 0.8, 2, 3)
print("\ncoarse target (column 0 only):\n", np.round(j_c, 3))
print("fine target (rows identical):\n", np.round(j_f, 3))
print("blended, sums to", j_a.sum(), ":\n", np.round(j_a, 3))

# Column 0 keeps the view order: milder view always ranked higher.
print("column-0 ordering:", j_a[0, 0], ">", j_a[1, 0])

# --- the full objective on a small batch -------------------------------------
# Bounded (unit-normalized) similarities keep desk-scale values readable.
desk_cfg = SimilarityConfig(temperature=0.1, normalize_embeddings=True)
n, d = 10, 6
z = ad.tensor(rng.standard_normal((n, d)))
view_embs = [ad.tensor(rng.standard_normal((n, d))) for _ in range(2)]
bank = rng.standard_normal((n, d))
idx = np.stack([np.random.default_rng(s).choice(
    [i for i in range(n) if i != s], size=3, replace=False) for s in range(n)])
loss = c2f_loss(z, view_embs, bank, idx, [1.0, 0.7], 0.8, desk_cfg)
print(f"\nfull ranked loss on {n} nodes: {loss.item():.6f}"
      f"  (uniform would be log(M(K+1)) = {math.log(2 * 4):.6f})")

raw, sigma = score_matrix(z.data[0], np.stack([v.data[0] for v in view_embs]),
                          bank[idx[0]], desk_cfg)
print("node 0 score matrix softmax sums to", sigma.data.sum())
