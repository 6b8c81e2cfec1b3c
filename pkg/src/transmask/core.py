"""Raster containers shared by every module.

Depth is float64 meters with 0.0 meaning missing, masks are uint8 in {0, 1},
RGB is uint8 (H, W, 3). All containers copy their input and freeze it, so a
constructed raster can be shared freely between threads and processes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_SIDE = 1 << 15


class TransmaskError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(TransmaskError, ValueError):
    pass


class ConfigError(TransmaskError, ValueError):
    pass


class FormatError(TransmaskError, ValueError):
    pass


def _check_dims(width, height):
    if not (0 < width <= MAX_SIDE and 0 < height <= MAX_SIDE):
        raise DimensionError(f"invalid raster size {width}x{height}")


def _frozen(arr):
    arr = np.array(arr, copy=True, order="C")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DepthMap:
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise DimensionError(f"depth must be 2-D, got shape {arr.shape}")
        _check_dims(arr.shape[1], arr.shape[0])
        if not np.all(np.isfinite(arr)):
            raise ValueError("depth contains NaN or Inf")
        if np.any(arr < 0):
            raise ValueError("depth contains negative values")
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def valid(self) -> np.ndarray:
        return self.data > 0

    def allclose(self, other: DepthMap, atol: float = 1e-6) -> bool:
        return self.shape == other.shape and bool(
            np.allclose(self.data, other.data, rtol=0.0, atol=atol)
        )


@dataclass(frozen=True, eq=False)
class BinaryMask:
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise DimensionError(f"mask must be 2-D, got shape {arr.shape}")
        _check_dims(arr.shape[1], arr.shape[0])
        if arr.dtype == bool:
            arr = arr.astype(np.uint8)
        elif not np.all((arr == 0) | (arr == 1)):
            raise ValueError("mask values must be 0 or 1")
        object.__setattr__(self, "data", _frozen(arr.astype(np.uint8)))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def as_bool(self) -> np.ndarray:
        return self.data.astype(bool)

    def complement(self) -> BinaryMask:
        return BinaryMask(1 - self.data)

    def count(self) -> int:
        return int(self.data.sum(dtype=np.int64))

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class RgbImage:
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise DimensionError(f"RGB must be (H, W, 3), got shape {arr.shape}")
        _check_dims(arr.shape[1], arr.shape[0])
        if arr.dtype != np.uint8:
            if np.any(arr < 0) or np.any(arr > 255) or np.any(arr != np.round(arr)):
                raise ValueError("RGB values must be integers in [0, 255]")
            arr = arr.astype(np.uint8)
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    def __eq__(self, other):
        if not isinstance(other, RgbImage):
            return NotImplemented
        return bool(np.array_equal(self.data, other.data))

    __hash__ = None


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ConfigError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")


@dataclass(frozen=True, eq=False)
class NormalMap:
    """Unit normals (H, W, 3) plus a validity mask; invalid vectors are zero."""

    data: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        valid = np.asarray(self.valid, dtype=bool)
        if data.ndim != 3 or data.shape[2] != 3 or valid.shape != data.shape[:2]:
            raise DimensionError("normal map must be (H, W, 3) with an (H, W) validity mask")
        data = np.where(valid[..., None], data, 0.0)
        object.__setattr__(self, "data", _frozen(data))
        object.__setattr__(self, "valid", _frozen(valid))

    @property
    def shape(self) -> tuple[int, int]:
        return self.valid.shape


@dataclass(frozen=True)
class MaskingConfig:
    """Erosion settings for the non-transparent masks.

    ``per_instance=False`` erodes the union of all non-transparent instances
    instead of each instance separately.
    """

    erosion_element: tuple[int, int] = (5, 5)
    erosion_iterations: int = 3
    erosion_enabled: bool = True
    per_instance: bool = True

    def __post_init__(self):
        w, h = self.erosion_element
        if any(int(d) != d or d < 1 or d % 2 == 0 for d in (w, h)):
            raise ConfigError(f"erosion element must have odd positive sides, got {w}x{h}")
        if int(self.erosion_iterations) != self.erosion_iterations or self.erosion_iterations < 0:
            raise ConfigError("erosion_iterations must be a non-negative integer")
        object.__setattr__(self, "erosion_element", (int(w), int(h)))

    def to_dict(self) -> dict:
        return {
            "erosion_element": list(self.erosion_element),
            "erosion_iterations": int(self.erosion_iterations),
            "erosion_enabled": bool(self.erosion_enabled),
            "per_instance": bool(self.per_instance),
        }

    @classmethod
    def from_dict(cls, d: dict) -> MaskingConfig:
        return cls(
            erosion_element=tuple(d.get("erosion_element", (5, 5))),
            erosion_iterations=d.get("erosion_iterations", 3),
            erosion_enabled=d.get("erosion_enabled", True),
            per_instance=d.get("per_instance", True),
        )


@dataclass(frozen=True)
class TrainingPair:
    masked_rgb: RgbImage
    masked_depth: DepthMap
    target_depth: DepthMap
    trans_mask: BinaryMask
    final_mask: BinaryMask
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        shapes = {
            self.masked_rgb.shape,
            self.masked_depth.shape,
            self.target_depth.shape,
            self.trans_mask.shape,
            self.final_mask.shape,
        }
        if len(shapes) != 1:
            raise DimensionError(f"training pair rasters disagree in size: {sorted(shapes)}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.masked_depth.shape

    def invariant_violations(self) -> list[str]:
        """Return a description of every broken pair invariant (empty when consistent)."""
        final = self.final_mask.as_bool()
        trans = self.trans_mask.as_bool()
        d_in = self.masked_depth.data
        d_gt = self.target_depth.data
        problems = []
        if np.any(d_in[~final] != 0):
            problems.append("masked_depth nonzero where final_mask is 0")
        if np.any(d_gt[trans] != 0):
            problems.append("target_depth nonzero inside transparent mask")
        if np.any(self.masked_rgb.data[trans] != 0):
            problems.append("masked_rgb not black inside transparent mask")
        keep = final & ~trans
        if np.any(d_in[keep] != d_gt[keep]):
            problems.append("masked_depth differs from target_depth on kept pixels")
        return problems


def new_raster(width: int, height: int, fill, kind: str | None = None):
    """Build a constant raster.

    ``kind`` is one of ``"depth"``, ``"mask"``, ``"rgb"``; when omitted it is
    inferred from ``fill`` (float -> depth, int -> mask, 3-sequence -> rgb).
    ``new_raster(w, h, 1)`` is the all-ones mask.
    """
    _check_dims(width, height)
    if kind is None:
        if isinstance(fill, (tuple, list, np.ndarray)):
            kind = "rgb"
        elif isinstance(fill, (bool, int, np.integer)):
            kind = "mask"
        else:
            kind = "depth"
    if kind == "depth":
        return DepthMap(np.full((height, width), fill, dtype=np.float64))
    if kind == "mask":
        if fill not in (0, 1):
            raise ValueError(f"mask fill must be 0 or 1, got {fill!r}")
        return BinaryMask(np.full((height, width), fill, dtype=np.uint8))
    if kind == "rgb":
        px = np.asarray(fill)
        if px.shape != (3,):
            raise ValueError("rgb fill must be an (r, g, b) triple")
        return RgbImage(np.broadcast_to(px, (height, width, 3)))
    raise ValueError(f"unknown raster kind {kind!r}")


def check_same_shape(*rasters) -> tuple[int, int]:
    shapes = {r.shape for r in rasters}
    if len(shapes) != 1:
        raise DimensionError(f"raster sizes disagree: {sorted(shapes)}")
    return shapes.pop()
