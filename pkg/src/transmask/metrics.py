"""Depth-completion metrics over transparent-object pixels, and error maps."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import BinaryMask, DepthMap, RgbImage, TransmaskError, check_same_shape

THRESHOLDS = (1.05, 1.10, 1.25)
BACKGROUND = (255, 255, 255)
RED = (255, 0, 0)
DEFAULT_MAX_REL = 0.10


class EmptyEvaluationError(TransmaskError, ValueError):
    """No pixel had both a transparent label and ground-truth depth."""


@dataclass(frozen=True)
class MetricsReport:
    rmse: float
    rel: float
    mae: float
    sigma_105: float
    sigma_110: float
    sigma_125: float
    n_pixels: int

    def to_line(self) -> str:
        return (
            f"rmse={self.rmse:.6f} rel={self.rel:.6f} mae={self.mae:.6f} "
            f"sigma_105={self.sigma_105:.2f} sigma_110={self.sigma_110:.2f} "
            f"sigma_125={self.sigma_125:.2f} n_pixels={self.n_pixels}"
        )

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class MetricAccumulator:
    """Running sums so several frames pool into one pixel-weighted report."""

    n: int = 0
    sq: float = 0.0
    abs: float = 0.0
    rel: float = 0.0
    hits: list = field(default_factory=lambda: [0] * len(THRESHOLDS))

    def add(self, pred: DepthMap, gt: DepthMap, trans_mask: BinaryMask) -> int:
        check_same_shape(pred, gt, trans_mask)
        sel = trans_mask.as_bool() & (gt.data > 0)
        d = pred.data[sel].astype(np.float64)
        t = gt.data[sel].astype(np.float64)
        err = d - t
        self.n += int(d.size)
        self.sq += float(np.sum(err**2))
        self.abs += float(np.sum(np.abs(err)))
        self.rel += float(np.sum(np.abs(err) / t))
        # A zero prediction fails every threshold.
        with np.errstate(divide="ignore", over="ignore"):
            ratio = np.where(d > 0, np.maximum(d / t, t / np.where(d > 0, d, 1.0)), np.inf)
        for i, thr in enumerate(THRESHOLDS):
            self.hits[i] += int(np.count_nonzero(ratio < thr))
        return int(d.size)

    def report(self) -> MetricsReport:
        if self.n == 0:
            raise EmptyEvaluationError("no transparent pixels with valid ground truth")
        pct = [100.0 * h / self.n for h in self.hits]
        return MetricsReport(
            rmse=float(np.sqrt(self.sq / self.n)),
            rel=self.rel / self.n,
            mae=self.abs / self.n,
            sigma_105=pct[0],
            sigma_110=pct[1],
            sigma_125=pct[2],
            n_pixels=self.n,
        )


def evaluate(pred: DepthMap, gt: DepthMap, trans_mask: BinaryMask) -> MetricsReport:
    """RMSE, REL, MAE and threshold accuracies on ``trans_mask & (gt > 0)``."""
    acc = MetricAccumulator()
    acc.add(pred, gt, trans_mask)
    return acc.report()


def ramp_color(t) -> np.ndarray:
    """Map ``t`` in [0, 1] linearly from BACKGROUND to RED, rounding half up.

    channel = floor(bg + round(t, 9) * (red - bg) + 0.5)

    Rounding ``t`` first keeps decimal errors such as 1.05 vs 1.00 from
    landing a hair past a color boundary.
    """
    t = np.round(np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0), 9)[..., None]
    bg = np.array(BACKGROUND, dtype=np.float64)
    red = np.array(RED, dtype=np.float64)
    return np.floor(bg + t * (red - bg) + 0.5).astype(np.uint8)


def error_map(
    pred: DepthMap, gt: DepthMap, eval_mask: BinaryMask, max_rel: float = DEFAULT_MAX_REL
) -> RgbImage:
    """Colorize ``|d - d*| / d*``; saturates to pure red at ``max_rel``."""
    if not max_rel > 0:
        raise ValueError("max_rel must be positive")
    check_same_shape(pred, gt, eval_mask)
    g = gt.data.astype(np.float64)
    sel = eval_mask.as_bool() & (g > 0)
    rel = np.zeros_like(g)
    rel[sel] = np.abs(pred.data[sel] - g[sel]) / g[sel]
    img = ramp_color(rel / max_rel)
    img[~sel] = BACKGROUND
    return RgbImage(img)
