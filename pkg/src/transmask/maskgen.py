"""Synthesis of self-supervised training pairs from segmentation masks.

Non-transparent instance masks are shrunk by rectangular erosion and their
depth is zeroed, imitating the way a depth sensor loses the interior of a
transparent object while keeping its rim. Transparent objects are blacked
out in RGB and removed from the supervision target.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    BinaryMask,
    ConfigError,
    DepthMap,
    DimensionError,
    MaskingConfig,
    RgbImage,
    TrainingPair,
    check_same_shape,
    new_raster,
)


@dataclass(frozen=True)
class MaskSet:
    trans_masks: list = field(default_factory=list)
    non_trans_masks: list = field(default_factory=list)

    def check_shape(self, shape: tuple[int, int]) -> None:
        for m in [*self.trans_masks, *self.non_trans_masks]:
            if m.shape != shape:
                raise DimensionError(f"mask of size {m.shape} does not match frame {shape}")


def _window_all_ones(bits: np.ndarray, ew: int, eh: int) -> np.ndarray:
    # Summed-area table over a zero-padded copy: a window is all ones iff its sum equals its area.
    ry, rx = eh // 2, ew // 2
    padded = np.pad(bits.astype(np.int32), ((ry + 1, ry), (rx + 1, rx)))
    sat = padded.cumsum(axis=0).cumsum(axis=1)
    h, w = bits.shape
    total = (
        sat[eh : eh + h, ew : ew + w]
        - sat[0:h, ew : ew + w]
        - sat[eh : eh + h, 0:w]
        + sat[0:h, 0:w]
    )
    return total == ew * eh


def erode(mask: BinaryMask, element: tuple[int, int] = (5, 5), iterations: int = 1) -> BinaryMask:
    """Binary erosion by a ``(width, height)`` rectangle, repeated ``iterations`` times.

    Pixels outside the image count as 0, so objects touching the border lose
    their border ring as well.
    """
    ew, eh = element
    if any(int(d) != d or d < 1 or d % 2 == 0 for d in (ew, eh)):
        raise ConfigError(f"erosion element must have odd positive sides, got {ew}x{eh}")
    if iterations < 0:
        raise ConfigError("iterations must be non-negative")
    bits = mask.data.astype(bool)
    for _ in range(int(iterations)):
        if not bits.any():
            break
        bits = _window_all_ones(bits, int(ew), int(eh))
    return BinaryMask(bits)


def union(masks) -> BinaryMask:
    """Pixel-wise logical OR of a non-empty list of masks."""
    masks = list(masks)
    if not masks:
        raise ValueError("union of an empty mask list")
    check_same_shape(*masks)
    out = np.zeros(masks[0].shape, dtype=bool)
    for m in masks:
        out |= m.as_bool()
    return BinaryMask(out)


def compose_final_mask(non_trans, trans, cfg: MaskingConfig, shape=None):
    """Return ``(final, trans_union, eroded_non_trans_union)``.

    ``final`` is 1 where depth is kept: the complement of the eroded
    non-transparent union OR the (un-eroded) transparent union. ``shape`` is
    only needed when both lists are empty.
    """
    non_trans, trans = list(non_trans), list(trans)
    everything = non_trans + trans
    if everything:
        shape = check_same_shape(*everything)
    elif shape is None:
        raise ValueError("shape is required when no masks are given")
    h, w = shape
    empty = new_raster(w, h, 0, kind="mask")

    if not non_trans:
        eroded = empty
    elif not cfg.erosion_enabled:
        eroded = union(non_trans)
    elif cfg.per_instance:
        eroded = union(
            [erode(m, cfg.erosion_element, cfg.erosion_iterations) for m in non_trans]
        )
    else:
        eroded = erode(union(non_trans), cfg.erosion_element, cfg.erosion_iterations)

    trans_union = union(trans) if trans else empty
    final = BinaryMask(~(eroded.as_bool() | trans_union.as_bool()))
    return final, trans_union, eroded


def synthesize_pair(
    rgb: RgbImage, depth: DepthMap, masks: MaskSet, cfg: MaskingConfig | None = None
) -> TrainingPair:
    """Build the masked RGB, masked input depth and supervision depth for one frame."""
    cfg = cfg or MaskingConfig()
    shape = check_same_shape(rgb, depth)
    masks.check_shape(shape)
    final, trans_union, _ = compose_final_mask(
        masks.non_trans_masks, masks.trans_masks, cfg, shape=shape
    )
    keep_rgb = ~trans_union.as_bool()
    return TrainingPair(
        masked_rgb=RgbImage(rgb.data * keep_rgb[..., None].astype(np.uint8)),
        masked_depth=DepthMap(np.where(final.as_bool(), depth.data, np.float64(0))),
        target_depth=DepthMap(np.where(keep_rgb, depth.data, np.float64(0))),
        trans_mask=trans_union,
        final_mask=final,
        meta={"masking": cfg.to_dict()},
    )


def artificial_hole(pair: TrainingPair) -> BinaryMask:
    """Pixels zeroed by the masking step that still carry supervision depth."""
    hole = (
        ~pair.final_mask.as_bool()
        & ~pair.trans_mask.as_bool()
        & (pair.target_depth.data > 0)
    )
    return BinaryMask(hole)
