"""
Surface normals and the region losses
=====================================
"""
import numpy as np

from transmask import normals_from_depth, supervised_loss, synthesize_pair
from transmask.geometry import normal_cosine_map
from transmask.synthetic import K, make_scene

rgb, depth, masks = make_scene(np.random.default_rng(1))
pair = synthesize_pair(rgb, depth, masks)

###############################################################################
# Normals come from the back-projected point cloud. On the table every
# normal should point roughly back toward the camera.

n = normals_from_depth(depth, K)
print("valid normals:", int(n.valid.sum()), "of", n.valid.size)
print("median normal:", np.round(np.median(n.data[n.valid], axis=0), 3))

###############################################################################
# A prediction that is 1 cm too far everywhere has a constant depth error
# and nearly unchanged normals. A noisy prediction of the same average
# error also pays for the normals it bends. Scoring uses the full scene depth
# so the transparent region has ground truth too.

gt = depth
shifted = type(gt)(gt.data + 0.01 * (gt.data > 0))
rng = np.random.default_rng(0)
noisy = type(gt)(np.clip(gt.data + rng.normal(0.01, 0.01, gt.data.shape), 0, None) * (gt.data > 0))

for name, pred in (("shifted", shifted), ("noisy", noisy)):
    b = supervised_loss(pred, gt, pair.trans_mask, K)
    cos, ok = normal_cosine_map(normals_from_depth(pred, K), n)
    print(f"{name:8s} l1={b.l1:.6f} l2={b.l2:.6f} combined={b.combined:.6f} mean_cos={cos[ok].mean():.4f}")
