"""Reading TransCG-style RGB-D folders and writing training-pair bundles.

Dataset layout::

    root/camera.cfg                    # [camera] fx fy cx cy, optional depth_scale
    root/scene_*/frame_*/rgb.png       # 8-bit colour
    root/scene_*/frame_*/depth.png     # 16-bit single channel, depth_scale units per meter
    root/scene_*/frame_*/mask_trans_*.png
    root/scene_*/frame_*/mask_nontrans_*.png   # 8-bit, >= 128 means inside

A written pair is a directory holding ``rgb.png``, ``depth.png`` (masked input),
``target.png``, ``mask_trans.png``, ``mask_final.png`` and ``manifest.json``.
"""
from __future__ import annotations

import configparser
import hashlib
import json
import logging
import os
import shutil
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path

import cv2
import numpy as np

from .core import (
    BinaryMask,
    CameraIntrinsics,
    DepthMap,
    FormatError,
    RgbImage,
    TrainingPair,
    TransmaskError,
)
from .maskgen import MaskSet

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_DEPTH_SCALE = 1000.0
DEFAULT_NOISE_SIGMA = 0.005
MIN_NOISY_DEPTH = 1e-3

PAIR_FILES = {
    "masked_rgb": "rgb.png",
    "masked_depth": "depth.png",
    "target_depth": "target.png",
    "trans_mask": "mask_trans.png",
    "final_mask": "mask_final.png",
}
PAIR_MANIFEST = "manifest.json"


class DatasetValidationError(TransmaskError):
    """Raised with every problem found; ``problems`` holds ``(path, message)`` tuples."""

    def __init__(self, problems):
        self.problems = list(problems)
        lines = "; ".join(f"{p}: {m}" for p, m in self.problems)
        super().__init__(f"{len(self.problems)} dataset problem(s): {lines}")


@dataclass(frozen=True)
class FrameRecord:
    scene_id: str
    frame_id: str
    rgb_path: Path
    depth_path: Path
    trans_mask_paths: tuple = ()
    non_trans_mask_paths: tuple = ()
    intrinsics: CameraIntrinsics | None = None
    depth_scale: float = DEFAULT_DEPTH_SCALE

    @property
    def key(self) -> str:
        return f"{self.scene_id}/{self.frame_id}"


# ---------------------------------------------------------------- raster I/O


def _imread(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    buf = np.fromfile(path, dtype=np.uint8)
    img = cv2.imdecode(buf, cv2.IMREAD_UNCHANGED)
    if img is None:
        raise FormatError(f"{path}: not a readable image")
    return img


def _imwrite(path, img):
    ok, buf = cv2.imencode(".png", img)
    if not ok:
        raise FormatError(f"could not encode {path}")
    Path(path).write_bytes(buf.tobytes())


def load_depth(path, scale: float = DEFAULT_DEPTH_SCALE) -> DepthMap:
    """Read a 16-bit single-channel depth image as meters (value / scale)."""
    img = _imread(path)
    if img.dtype != np.uint16 or img.ndim != 2:
        raise FormatError(
            f"{path}: expected 16-bit single-channel depth, got {img.dtype} with shape {img.shape}"
        )
    return DepthMap(img.astype(np.float64) / np.float64(scale))


def save_depth(path, depth: DepthMap, scale: float = DEFAULT_DEPTH_SCALE) -> None:
    q = np.rint(depth.data.astype(np.float64) * scale)
    # Keep tiny positive depths valid instead of rounding them to "missing".
    q = np.where(depth.data > 0, np.maximum(q, 1), 0)
    if q.max(initial=0) > np.iinfo(np.uint16).max:
        raise FormatError(f"depth exceeds 16-bit range at scale {scale}")
    _imwrite(path, q.astype(np.uint16))


def load_mask(path) -> BinaryMask:
    """Read an 8-bit mask; pixels >= 128 are inside."""
    img = _imread(path)
    if img.dtype != np.uint8:
        raise FormatError(f"{path}: expected 8-bit mask, got {img.dtype}")
    if img.ndim == 3:
        img = img[..., 0]
    return BinaryMask(img >= 128)


def save_mask(path, mask: BinaryMask) -> None:
    _imwrite(path, mask.data * np.uint8(255))


def load_rgb(path) -> RgbImage:
    img = _imread(path)
    if img.dtype != np.uint8:
        raise FormatError(f"{path}: expected 8-bit colour image, got {img.dtype}")
    if img.ndim == 2:
        img = np.repeat(img[..., None], 3, axis=2)
    elif img.shape[2] == 4:
        img = cv2.cvtColor(img, cv2.COLOR_BGRA2RGB)
    else:
        img = cv2.cvtColor(img, cv2.COLOR_BGR2RGB)
    return RgbImage(img)


def save_rgb(path, rgb: RgbImage) -> None:
    _imwrite(path, cv2.cvtColor(np.ascontiguousarray(rgb.data), cv2.COLOR_RGB2BGR))


# ---------------------------------------------------------------- dataset scan


def read_camera_cfg(path) -> tuple[CameraIntrinsics, float]:
    """Parse ``camera.cfg``; returns (intrinsics, depth_scale)."""
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(path)
    if "camera" not in cp:
        raise DatasetValidationError([(str(path), "missing [camera] section")])
    sec = cp["camera"]
    try:
        k = CameraIntrinsics(
            fx=sec.getfloat("fx"),
            fy=sec.getfloat("fy"),
            cx=sec.getfloat("cx"),
            cy=sec.getfloat("cy"),
        )
    except (TypeError, ValueError) as exc:
        raise DatasetValidationError([(str(path), f"bad intrinsics: {exc}")]) from exc
    return k, sec.getfloat("depth_scale", DEFAULT_DEPTH_SCALE)


def write_camera_cfg(path, k: CameraIntrinsics, depth_scale: float = DEFAULT_DEPTH_SCALE):
    text = (
        "[camera]\n"
        f"fx = {k.fx!r}\nfy = {k.fy!r}\ncx = {k.cx!r}\ncy = {k.cy!r}\n"
        f"depth_scale = {depth_scale!r}\n"
    )
    Path(path).write_text(text)


def scan_dataset(root) -> list[FrameRecord]:
    """List every frame under ``root`` in lexicographic (scene, frame) order.

    Every problem found is collected and raised together as a
    DatasetValidationError, so incomplete frames are never dropped silently.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root {root} is not a readable directory")
    frame_dirs = sorted(
        f
        for s in root.glob("scene_*")
        if s.is_dir()
        for f in s.glob("frame_*")
        if f.is_dir()
    )
    if not frame_dirs:
        log.warning("no frames found under %s", root)
        return []

    problems = []
    cfg = root / "camera.cfg"
    k, scale = None, DEFAULT_DEPTH_SCALE
    if cfg.is_file():
        try:
            k, scale = read_camera_cfg(cfg)
        except DatasetValidationError as exc:
            problems.extend(exc.problems)
    else:
        problems.append((str(cfg), "missing camera config"))

    records = []
    for fd in frame_dirs:
        rgb, depth = fd / "rgb.png", fd / "depth.png"
        for p in (rgb, depth):
            if not p.is_file():
                problems.append((str(fd), f"frame is missing {p.name}"))
        records.append(
            FrameRecord(
                scene_id=fd.parent.name,
                frame_id=fd.name,
                rgb_path=rgb,
                depth_path=depth,
                trans_mask_paths=tuple(sorted(fd.glob("mask_trans_*.png"))),
                non_trans_mask_paths=tuple(sorted(fd.glob("mask_nontrans_*.png"))),
                intrinsics=k,
                depth_scale=scale,
            )
        )
    if problems:
        raise DatasetValidationError(problems)
    return records


def load_frame(rec: FrameRecord) -> tuple[RgbImage, DepthMap, MaskSet]:
    rgb = load_rgb(rec.rgb_path)
    depth = load_depth(rec.depth_path, rec.depth_scale)
    masks = MaskSet(
        trans_masks=[load_mask(p) for p in rec.trans_mask_paths],
        non_trans_masks=[load_mask(p) for p in rec.non_trans_mask_paths],
    )
    bad = [
        (str(p), f"size {m.shape} differs from depth {depth.shape}")
        for p, m in zip(
            (rec.rgb_path, *rec.trans_mask_paths, *rec.non_trans_mask_paths),
            (rgb, *masks.trans_masks, *masks.non_trans_masks),
        )
        if m.shape != depth.shape
    ]
    if bad:
        raise DatasetValidationError(bad)
    return rgb, depth, masks


# ---------------------------------------------------------------- augmentation


@dataclass(frozen=True)
class AugmentSpec:
    hflip: bool = False
    rotation: int = 0
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.rotation not in (0, 90, 180, 270):
            raise ValueError(f"rotation must be a multiple of 90 degrees, got {self.rotation}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")

    @classmethod
    def random(cls, seed: int, noise_sigma: float = DEFAULT_NOISE_SIGMA) -> AugmentSpec:
        rng = np.random.default_rng(seed)
        return cls(
            hflip=bool(rng.integers(2)),
            rotation=int(rng.choice((0, 90, 180, 270))),
            noise_sigma=noise_sigma,
            seed=int(seed),
        )

    def to_dict(self) -> dict:
        return {
            "hflip": self.hflip,
            "rotation": self.rotation,
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
        }


def _geom(arr, spec):
    if spec.hflip:
        arr = arr[:, ::-1]
    if spec.rotation:
        arr = np.rot90(arr, k=spec.rotation // 90)
    return np.ascontiguousarray(arr)


def augment_intrinsics(k: CameraIntrinsics, spec: AugmentSpec, shape) -> CameraIntrinsics:
    """Intrinsics of the virtual camera that sees the augmented image."""
    h, w = shape
    fx, fy, cx, cy = k.fx, k.fy, k.cx, k.cy
    if spec.hflip:
        cx = (w - 1) - cx
    for _ in range(spec.rotation // 90):
        # np.rot90 maps (u, v) -> (v, w - 1 - u) and swaps the image sides.
        fx, fy, cx, cy = fy, fx, cy, (w - 1) - cx
        h, w = w, h
    return CameraIntrinsics(fx, fy, cx, cy)


def apply_augment(pair: TrainingPair, spec: AugmentSpec) -> TrainingPair:
    """Flip/rotate every raster of the pair identically, then add depth noise.

    One noise field perturbs the scene depth, so the input and target stay
    equal wherever both are valid; zero depth stays zero.
    """
    rgb = _geom(pair.masked_rgb.data, spec)
    d_in = _geom(pair.masked_depth.data, spec)
    d_gt = _geom(pair.target_depth.data, spec)
    trans = _geom(pair.trans_mask.data, spec)
    final = _geom(pair.final_mask.data, spec)
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.seed)
        noise = rng.normal(0.0, spec.noise_sigma, size=d_gt.shape).astype(np.float64)
        d_in = np.where(d_in > 0, np.maximum(d_in + noise, np.float64(MIN_NOISY_DEPTH)), 0)
        d_gt = np.where(d_gt > 0, np.maximum(d_gt + noise, np.float64(MIN_NOISY_DEPTH)), 0)
    meta = dict(pair.meta)
    meta["augment"] = spec.to_dict()
    return TrainingPair(
        masked_rgb=RgbImage(rgb),
        masked_depth=DepthMap(d_in),
        target_depth=DepthMap(d_gt),
        trans_mask=BinaryMask(trans),
        final_mask=BinaryMask(final),
        meta=meta,
    )


# ---------------------------------------------------------------- pair bundles


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_pair(
    pair: TrainingPair,
    out_dir,
    *,
    intrinsics: CameraIntrinsics | None = None,
    depth_scale: float = DEFAULT_DEPTH_SCALE,
) -> dict:
    """Write a pair atomically; returns the manifest that was written.

    Files go to a sibling temp directory that is renamed into place, so a
    failure never leaves a half-written ``out_dir``.
    """
    out_dir = Path(out_dir)
    if intrinsics is None:
        intrinsics = pair.meta.get("intrinsics")
    meta = {k: v for k, v in pair.meta.items() if k not in ("intrinsics", "depth_scale")}
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out_dir.name}.", dir=out_dir.parent))
    try:
        save_rgb(tmp / PAIR_FILES["masked_rgb"], pair.masked_rgb)
        save_depth(tmp / PAIR_FILES["masked_depth"], pair.masked_depth, depth_scale)
        save_depth(tmp / PAIR_FILES["target_depth"], pair.target_depth, depth_scale)
        save_mask(tmp / PAIR_FILES["trans_mask"], pair.trans_mask)
        save_mask(tmp / PAIR_FILES["final_mask"], pair.final_mask)
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "width": pair.shape[1],
            "height": pair.shape[0],
            "depth_scale": depth_scale,
            "intrinsics": None
            if intrinsics is None
            else {"fx": intrinsics.fx, "fy": intrinsics.fy, "cx": intrinsics.cx, "cy": intrinsics.cy},
            "meta": meta,
            "files": {
                name: {"path": fn, "sha256": sha256_file(tmp / fn)}
                for name, fn in sorted(PAIR_FILES.items())
            },
        }
        (tmp / PAIR_MANIFEST).write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")
        if out_dir.exists():
            old = Path(tempfile.mkdtemp(prefix=f".{out_dir.name}.old.", dir=out_dir.parent))
            os.replace(out_dir, old / "d")
            os.replace(tmp, out_dir)
            shutil.rmtree(old)
        else:
            os.replace(tmp, out_dir)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return manifest


def read_pair_manifest(pair_dir) -> dict:
    path = Path(pair_dir) / PAIR_MANIFEST
    if not path.is_file():
        raise FormatError(f"{pair_dir}: no {PAIR_MANIFEST}")
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise FormatError(f"{path}: unsupported schema {manifest.get('schema_version')}")
    return manifest


def read_pair(pair_dir) -> TrainingPair:
    """Load a pair written by :func:`write_pair`.

    The manifest's intrinsics (or None) are exposed as ``pair.meta["intrinsics"]``.
    """
    pair_dir = Path(pair_dir)
    manifest = read_pair_manifest(pair_dir)
    scale = manifest["depth_scale"]
    files = {name: pair_dir / entry["path"] for name, entry in manifest["files"].items()}
    meta = dict(manifest.get("meta") or {})
    k = manifest.get("intrinsics")
    meta["intrinsics"] = CameraIntrinsics(**k) if k else None
    meta["depth_scale"] = scale
    return TrainingPair(
        masked_rgb=load_rgb(files["masked_rgb"]),
        masked_depth=load_depth(files["masked_depth"], scale),
        target_depth=load_depth(files["target_depth"], scale),
        trans_mask=load_mask(files["trans_mask"]),
        final_mask=load_mask(files["final_mask"]),
        meta=meta,
    )


# ---------------------------------------------------------------- run manifest


def write_run_manifest(path, header: dict, entries) -> None:
    """Line-oriented JSON: one header object, then one object per pair."""
    lines = [json.dumps({"schema_version": SCHEMA_VERSION, **header}, sort_keys=True)]
    lines += [json.dumps(e, sort_keys=True) for e in entries]
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    os.replace(tmp, path)


def read_run_manifest(path) -> tuple[dict, list[dict]]:
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"no run manifest at {path}")
    rows = [json.loads(line) for line in path.read_text().splitlines() if line.strip()]
    if not rows or rows[0].get("schema_version") != SCHEMA_VERSION:
        raise FormatError(f"{path}: missing or unsupported header")
    return rows[0], rows[1:]


def with_meta(pair: TrainingPair, **extra) -> TrainingPair:
    return replace(pair, meta={**pair.meta, **extra})


__all__ = [
    "AugmentSpec",
    "DatasetValidationError",
    "FrameRecord",
    "apply_augment",
    "augment_intrinsics",
    "load_depth",
    "load_frame",
    "load_mask",
    "load_rgb",
    "read_camera_cfg",
    "read_pair",
    "read_run_manifest",
    "save_depth",
    "save_mask",
    "save_rgb",
    "scan_dataset",
    "write_camera_cfg",
    "write_pair",
    "write_run_manifest",
]
