# %% [markdown]
# Two-dimensional views of the 28-column data
#
# PCA is a linear projection; t-SNE matches neighbourhood probabilities.
# Both are scored the same way: k-Means on the 2-D points, then the
# silhouette coefficient.

# %%
import numpy as np

from riskscope.cluster import select_k
from riskscope.dataset import generate_synthetic, standardize
from riskscope.embed import TsneParams, grid_search_tsne, pca_fit, pca_transform, score_embedding, tsne
from riskscope.svg import emit_scatter_svg

data, _ = standardize(generate_synthetic(300, seed=7))
best_k, scores = select_k(data.x, 2, 8, seed=0)
print("silhouette by k:", ", ".join(f"{k}:{s:.3f}" for k, s in scores))
print("best k =", best_k)

# %%
pca = pca_fit(data.x)
print("explained variance of the two axes:", np.round(pca.explained_variance, 3))
pca_points = pca_transform(pca, data.x).points
pca_score, pca_clusters = score_embedding(pca_points, best_k)
print(f"PCA silhouette: {pca_score:.4f}")
emit_scatter_svg(pca_points, data.y, "pca.svg", centroids=pca_clusters.centroids,
                 title="PCA", xlabel="PC 1", ylabel="PC 2")

# %%
# A single t-SNE run; the KL trace shows the early-exaggeration phase.
emb = tsne(data.x, TsneParams(perplexity=30, learning_rate=200, iterations=500, seed=0))
print(f"KL after exaggeration {emb.kl_after_exaggeration:.3f}, final {emb.final_kl:.3f}")

# %%
# Small grid search, ranked by silhouette.
cells = grid_search_tsne(data.x, perplexities=(5, 30), learning_rates=(10, 1000),
                         iteration_counts=(250, 500), seed=0, k=best_k)
for c in cells:
    print(c.as_row())
best = cells[0]
emit_scatter_svg(best.embedding.points, data.y, "tsne.svg", centroids=best.clustering.centroids,
                 title="best t-SNE cell", xlabel="t-SNE 1", ylabel="t-SNE 2")
