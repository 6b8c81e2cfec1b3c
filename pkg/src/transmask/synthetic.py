"""Synthetic RGB-D scenes for demos and tests.

A slanted table plane carries rectangular objects whose tops are tilted
planes nearer to the camera. Opaque and transparent objects are drawn the
same way; only the mask class differs.
"""
from pathlib import Path

import numpy as np

from .core import BinaryMask, CameraIntrinsics, DepthMap, RgbImage
from .dataset_io import save_depth, save_mask, save_rgb, write_camera_cfg
from .maskgen import MaskSet

H, W = 48, 64
K = CameraIntrinsics(fx=120.0, fy=120.0, cx=31.5, cy=23.5)


def _place(rng, taken, h, w, size):
    for _ in range(200):
        y = int(rng.integers(1, h - size[0] - 1))
        x = int(rng.integers(1, w - size[1] - 1))
        box = (slice(max(y - 2, 0), y + size[0] + 2), slice(max(x - 2, 0), x + size[1] + 2))
        if not taken[box].any():
            taken[y : y + size[0], x : x + size[1]] = True
            return y, x
    return None


def make_scene(rng, h=H, w=W, n_opaque=2, n_trans=1, size=(16, 22)):
    """Return (rgb, depth, MaskSet). Each object top is a plane nearer than the table."""
    v, u = np.mgrid[0:h, 0:w].astype(np.float64)
    depth = 0.9 + 0.002 * v + 0.0005 * u
    rgb = np.zeros((h, w, 3), np.uint8)
    rgb[...] = (140, 120, 100)
    taken = np.zeros((h, w), bool)
    opaque, trans = [], []
    for i in range(n_opaque + n_trans):
        sz = (int(rng.integers(size[0], size[0] + 5)), int(rng.integers(size[1], size[1] + 5)))
        spot = _place(rng, taken, h, w, sz)
        if spot is None:
            continue
        y, x = spot
        m = np.zeros((h, w), bool)
        m[y : y + sz[0], x : x + sz[1]] = True
        gy, gx = rng.uniform(-0.002, 0.002, size=2)
        top = 0.6 + rng.uniform(0, 0.05) + gy * (v - y) + gx * (u - x)
        depth = np.where(m, top, depth)
        rgb[m] = rng.integers(0, 256, size=3)
        (opaque if i < n_opaque else trans).append(BinaryMask(m))
    # Quantize to the on-disk millimeter grid so in-memory and reloaded frames agree.
    depth = np.rint(depth * 1000) / 1000
    return RgbImage(rgb), DepthMap(depth), MaskSet(trans_masks=trans, non_trans_masks=opaque)


def write_frame(frame_dir, rgb, depth, masks):
    frame_dir = Path(frame_dir)
    frame_dir.mkdir(parents=True, exist_ok=True)
    save_rgb(frame_dir / "rgb.png", rgb)
    save_depth(frame_dir / "depth.png", depth)
    for i, m in enumerate(masks.trans_masks):
        save_mask(frame_dir / f"mask_trans_{i:02d}.png", m)
    for i, m in enumerate(masks.non_trans_masks):
        save_mask(frame_dir / f"mask_nontrans_{i:02d}.png", m)


def write_dataset(root, n_scenes=2, n_frames=3, seed=0, **scene_kw):
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    write_camera_cfg(root / "camera.cfg", K)
    rng = np.random.default_rng(seed)
    for s in range(n_scenes):
        for f in range(n_frames):
            write_frame(root / f"scene_{s:03d}" / f"frame_{f:04d}", *make_scene(rng, **scene_kw))
    return root
