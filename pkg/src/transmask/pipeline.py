"""Batch synthesis over a dataset folder, optionally in worker processes."""
from __future__ import annotations

import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import MaskingConfig, TransmaskError
from .dataset_io import (
    DEFAULT_NOISE_SIGMA,
    AugmentSpec,
    FrameRecord,
    apply_augment,
    augment_intrinsics,
    load_frame,
    scan_dataset,
    with_meta,
    write_pair,
    write_run_manifest,
)
from .maskgen import artificial_hole, synthesize_pair

RUN_MANIFEST = "manifest.jsonl"


@dataclass(frozen=True)
class SynthesisOptions:
    masking: MaskingConfig = MaskingConfig()
    seed: int = 0
    augment: bool = False
    noise_sigma: float = DEFAULT_NOISE_SIGMA

    def to_dict(self) -> dict:
        return {
            "masking": self.masking.to_dict(),
            "seed": self.seed,
            "augment": self.augment,
            "noise_sigma": self.noise_sigma if self.augment else 0.0,
        }


@dataclass(frozen=True)
class FrameOutcome:
    key: str
    entry: dict | None = None
    error: str | None = None
    kind: str | None = None


def frame_seed(seed: int, key: str) -> int:
    """Per-frame seed that depends only on the run seed and the frame key."""
    ss = np.random.SeedSequence([seed, zlib.crc32(key.encode())])
    return int(ss.generate_state(1, np.uint64)[0])


def process_frame(rec: FrameRecord, out_root, opts: SynthesisOptions) -> FrameOutcome:
    try:
        rgb, depth, masks = load_frame(rec)
        pair = synthesize_pair(rgb, depth, masks, opts.masking)
        k = rec.intrinsics
        pair = with_meta(pair, source=rec.key)
        aug = None
        if opts.augment:
            aug = AugmentSpec.random(frame_seed(opts.seed, rec.key), opts.noise_sigma)
            if k is not None:
                k = augment_intrinsics(k, aug, pair.shape)
            pair = apply_augment(pair, aug)
        out_dir = Path(out_root) / rec.scene_id / rec.frame_id
        manifest = write_pair(pair, out_dir, intrinsics=k, depth_scale=rec.depth_scale)
    except OSError as exc:
        return FrameOutcome(rec.key, error=str(exc), kind="io")
    except (ValueError, TransmaskError) as exc:
        return FrameOutcome(rec.key, error=str(exc), kind="validation")
    entry = {
        "key": rec.key,
        "dir": f"{rec.scene_id}/{rec.frame_id}",
        "masked_pixels": int(artificial_hole(pair).count()),
        "trans_pixels": pair.trans_mask.count(),
        "augment": None if aug is None else aug.to_dict(),
        "files": {n: f["sha256"] for n, f in manifest["files"].items()},
    }
    return FrameOutcome(rec.key, entry=entry)


def _run_one(args):
    return process_frame(*args)


def synthesize_dataset(root, out, opts: SynthesisOptions, jobs: int = 1) -> list[FrameOutcome]:
    """Synthesize one pair per frame plus a run manifest in ``out``.

    Outputs are identical for any ``jobs`` value: each frame's randomness is
    derived from its key, and the manifest is written in frame order.
    """
    records = scan_dataset(root)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    work = [(rec, out, opts) for rec in records]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            outcomes = list(ex.map(_run_one, work))
    else:
        outcomes = [_run_one(w) for w in work]

    header = {
        "kind": "transmask-synthesis",
        "config": opts.to_dict(),
        "frames": len(records),
        "failed": sorted(o.key for o in outcomes if o.error),
    }
    write_run_manifest(out / RUN_MANIFEST, header, [o.entry for o in outcomes if o.entry])
    return outcomes
