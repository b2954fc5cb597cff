"""
Cluster-then-pick selection on a camera-structured pool
=======================================================

Camera-trap images from one camera share a background, so their embeddings
bunch into per-camera clusters. The cluster-then-pick strategy k-means the
unlabelled embeddings with as many clusters as the batch budget and takes
the most uncertain image of each cluster, spending the budget across the
embedding space instead of stacking it on one camera.
"""

import numpy as np

from alsel import SyntheticPoolParams, kmeans, select_method1, synthetic_pool

params = SyntheticPoolParams(
    num_cameras=5,
    images_per_camera=40,
    num_classes=4,
    embedding_dim=16,
)
bundle = synthetic_pool(params, seed=7)
pool = bundle.pool
print(f"pool: {len(pool.images)} images from {params.num_cameras} cameras, "
      f"dim {params.embedding_dim}")

# pretend detector confidence: uniform noise, so picks hinge on clustering
rng = np.random.default_rng(0)
uncertainty = {iid: float(rng.uniform()) for iid in pool.unlabelled_ids()}

budget = 5
result = select_method1(pool, uncertainty, budget=budget, seed=1)

print(f"\nbudget {budget} -> one pick per cluster:")
for entry in result.audit:
    cam = bundle.cameras[entry["id"]]
    print(f"  cluster {entry['cluster']}  ->  {entry['id']}  "
          f"(camera {cam}, u = {entry['u']:.3f})")

cams = sorted(bundle.cameras[iid] for iid in result.selected)
print(f"cameras covered by the batch: {cams}")

# the same clustering is available directly
ids = sorted(pool.unlabelled_ids())
rows = pool.embeddings[[pool.record(i).embedding_index for i in ids]]
part = kmeans(rows, budget, seed=1)
sizes = np.bincount(part.assignments, minlength=part.k)
print(f"\nk-means cluster sizes: {sizes.tolist()} "
      f"(objective {part.objective:.1f}, {part.iterations_run} iterations)")
