"""Back-projection and surface normals from a depth map."""
from __future__ import annotations

import numpy as np

from .core import CameraIntrinsics, DepthMap, DimensionError, NormalMap


def backproject(depth: DepthMap, k: CameraIntrinsics) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(points, valid)`` where ``points`` is (H, W, 3) in camera coordinates.

    Invalid pixels (depth 0) get the zero vector.
    """
    h, w = depth.shape
    z = depth.data.astype(np.float64)
    v, u = np.mgrid[0:h, 0:w].astype(np.float64)
    points = np.stack(((u - k.cx) / k.fx * z, (v - k.cy) / k.fy * z, z), axis=-1)
    return points, z > 0


def normals_from_depth(depth: DepthMap, k: CameraIntrinsics) -> NormalMap:
    """Per-pixel normals from central differences of the back-projected points.

    Normals face the camera (z <= 0). A pixel is valid only when it and its
    four neighbours are inside the image and have depth.
    """
    points, valid = backproject(depth, k)
    h, w = depth.shape
    normals = np.zeros((h, w, 3))
    ok = np.zeros((h, w), dtype=bool)
    if h >= 3 and w >= 3:
        du = points[1:-1, 2:] - points[1:-1, :-2]
        dv = points[2:, 1:-1] - points[:-2, 1:-1]
        n = np.cross(du, dv)
        norm = np.linalg.norm(n, axis=-1)
        inner = (
            valid[1:-1, 1:-1]
            & valid[1:-1, 2:]
            & valid[1:-1, :-2]
            & valid[2:, 1:-1]
            & valid[:-2, 1:-1]
            & (norm > 1e-12)
        )
        safe = np.where(inner, norm, 1.0)[..., None]
        n = n / safe
        n = np.where(n[..., 2:3] > 0, -n, n)
        normals[1:-1, 1:-1] = n
        ok[1:-1, 1:-1] = inner
    return NormalMap(normals, ok)


def normal_cosine_map(a: NormalMap, b: NormalMap) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel cosine between two normal maps, valid where both are."""
    if a.shape != b.shape:
        raise DimensionError(f"normal maps differ in size: {a.shape} vs {b.shape}")
    valid = a.valid & b.valid
    cos = np.clip(np.einsum("ijk,ijk->ij", a.data, b.data), -1.0, 1.0)
    return np.where(valid, cos, 0.0), valid
