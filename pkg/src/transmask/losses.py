"""Reference values for the region-masked depth + normal losses.

These are plain numpy evaluations meant to cross-check an external trainer;
no gradients are computed here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BinaryMask, CameraIntrinsics, DepthMap, NormalMap, check_same_shape
from .geometry import normals_from_depth

DEFAULT_ALPHA = 0.1
DEFAULT_BETA = 0.9


@dataclass(frozen=True)
class LossBreakdown:
    l1: float
    l2: float
    combined: float
    n1: int
    n2: int


def combine(l2: float, l1: float, beta: float) -> float:
    """Weighted sum ``beta * l2 + (1 - beta) * l1``."""
    return beta * l2 + (1.0 - beta) * l1


def region_loss(
    pred: DepthMap,
    gt: DepthMap,
    region: BinaryMask,
    k: CameraIntrinsics,
    alpha: float = DEFAULT_ALPHA,
    *,
    require_gt: bool = True,
    pred_normals: NormalMap | None = None,
    gt_normals: NormalMap | None = None,
) -> tuple[float, int]:
    """Mean of squared depth residual plus ``alpha * (1 - cos)`` over a region.

    Pixels contribute when ``region`` is set and, with ``require_gt``, the
    ground truth has depth. The normal term is 0 wherever either normal is
    invalid. Precomputed normal maps may be passed to skip estimation.

    Returns:
        (value, count); value is 0.0 when no pixel contributes.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    check_same_shape(pred, gt, region)
    sel = region.as_bool()
    if require_gt:
        sel = sel & (gt.data > 0)
    count = int(sel.sum())
    if count == 0:
        return 0.0, 0

    resid = pred.data.astype(np.float64) - gt.data.astype(np.float64)
    term = resid**2
    if alpha:
        vn = pred_normals if pred_normals is not None else normals_from_depth(pred, k)
        vg = gt_normals if gt_normals is not None else normals_from_depth(gt, k)
        check_same_shape(vn, vg)
        both = vn.valid & vg.valid
        # 1 - cos(a, b) == |a - b|^2 / 2 for unit vectors; exactly 0 when a == b.
        gap = 0.5 * np.sum((vn.data - vg.data) ** 2, axis=-1)
        term = term + alpha * np.where(both, gap, 0.0)
    return float(term[sel].sum() / count), count


def self_supervised_loss(pred, gt, trans_mask: BinaryMask, k, alpha=DEFAULT_ALPHA, **kw):
    """Region loss over every pixel outside the transparent mask."""
    return region_loss(pred, gt, trans_mask.complement(), k, alpha, **kw)


def supervised_loss(
    pred, gt_full, trans_mask: BinaryMask, k, alpha=DEFAULT_ALPHA, beta=DEFAULT_BETA, **kw
) -> LossBreakdown:
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    l2, n2 = region_loss(pred, gt_full, trans_mask, k, alpha, **kw)
    l1, n1 = region_loss(pred, gt_full, trans_mask.complement(), k, alpha, **kw)
    return LossBreakdown(l1=l1, l2=l2, combined=combine(l2, l1, beta), n1=n1, n2=n2)
