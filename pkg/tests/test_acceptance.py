"""Acceptance gate: one test per criterion, summarized as PASS/FAIL lines at the end of the run."""
import hashlib
import math
import time

import numpy as np
import pytest
from scipy import ndimage

from oracles import chebyshev_to_zero, final_mask_reference, window_min_erode
from transmask.synthetic import K, write_dataset
from transmask import (
    BinaryMask,
    CameraIntrinsics,
    DepthMap,
    MaskingConfig,
    MaskSet,
    RgbImage,
    complete_depth,
    erode,
    evaluate,
    new_raster,
    normals_from_depth,
    self_supervised_loss,
    supervised_loss,
    synthesize_pair,
)
from transmask.cli import main
from transmask.dataset_io import read_pair, read_run_manifest
from transmask.losses import combine
from transmask.maskgen import artificial_hole
from transmask.metrics import MetricAccumulator

pytestmark = pytest.mark.acceptance


def random_instances(rng, shape, n):
    h, w = shape
    out = []
    for _ in range(n):
        m = np.zeros(shape, bool)
        for _ in range(int(rng.integers(1, 3))):
            y, x = rng.integers(0, h - 4), rng.integers(0, w - 4)
            m[y : y + rng.integers(4, 28), x : x + rng.integers(4, 28)] = True
        m &= rng.random(shape) > 0.02
        out.append(m)
    return out


def test_criterion_1_mask_algebra():
    """200 random 64x64 mask sets: pair invariants and the keep-mask identity."""
    rng = np.random.default_rng(2024)
    cfg = MaskingConfig()
    start = time.perf_counter()
    for _ in range(200):
        non = random_instances(rng, (64, 64), int(rng.integers(0, 5)))
        tr = random_instances(rng, (64, 64), int(rng.integers(0, 3)))
        depth = rng.uniform(0.3, 2.0, (64, 64))
        depth[rng.random((64, 64)) < 0.05] = 0
        rgb = rng.integers(0, 256, (64, 64, 3))
        pair = synthesize_pair(
            RgbImage(rgb),
            DepthMap(depth),
            MaskSet([BinaryMask(m) for m in tr], [BinaryMask(m) for m in non]),
            cfg,
        )
        assert pair.invariant_violations() == []
        if non or tr:
            expected = final_mask_reference(non, tr, 5, 5, 3)
        else:
            expected = np.ones((64, 64), np.uint8)
        assert np.array_equal(pair.final_mask.data, expected)
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"took {elapsed:.2f} s"


def test_criterion_2_erosion_oracle():
    """Erosion vs window minimum, iteration law and Chebyshev distance on 100 masks."""
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    for _ in range(100):
        m = rng.random((32, 32)) > rng.uniform(0.02, 0.3)
        m[rng.integers(0, 32), :] = False
        cheb = chebyshev_to_zero(m)
        for side in (3, 5):
            for k in (1, 2, 3):
                got = erode(BinaryMask(m), (side, side), k).as_bool()
                assert np.array_equal(got, window_min_erode(m, side, side, k))
        for k in (1, 2, 3):
            stepped = erode(BinaryMask(m), (5, 5), k).as_bool()
            one_shot = erode(BinaryMask(m), (4 * k + 1, 4 * k + 1), 1).as_bool()
            assert np.array_equal(stepped, one_shot)
            assert np.array_equal(stepped, cheb > 2 * k)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.2f} s"


def test_criterion_3_normals():
    k = CameraIntrinsics(120.0, 110.0, 31.5, 23.5)
    flat = normals_from_depth(new_raster(64, 48, 1.5), k)
    assert flat.valid[1:-1, 1:-1].all()
    assert np.array_equal(flat.data[1:-1, 1:-1], np.broadcast_to([0.0, 0.0, -1.0], (46, 62, 3)))

    v, u = np.mgrid[0:48, 0:64].astype(float)
    for a, b in [(0.3, 0.0), (-0.4, 0.25), (0.1, -0.6), (0.8, 0.8)]:
        z = 1.1 / (1.0 - a * (u - k.cx) / k.fx - b * (v - k.cy) / k.fy)
        n = normals_from_depth(DepthMap(z), k)
        expected = np.array([a, b, -1.0]) / math.sqrt(1 + a * a + b * b)
        assert n.valid[1:-1, 1:-1].all()
        assert np.abs(n.data[n.valid] - expected).max() < 1e-3
        norms = np.linalg.norm(n.data[n.valid], axis=-1)
        assert np.all(np.abs(norms - 1.0) < 1e-6)


def test_criterion_4_loss_oracle():
    rng = np.random.default_rng(3)
    for _ in range(20):
        gt = 1.0 + 0.3 * rng.random((24, 32))
        gt[rng.random(gt.shape) < 0.1] = 0
        pred = np.clip(gt + rng.normal(0, 0.05, gt.shape), 0.05, None)
        trans = BinaryMask(rng.random(gt.shape) < 0.3)
        gt_map, pred_map = DepthMap(gt), DepthMap(pred)

        zero = supervised_loss(gt_map, gt_map, trans, K)
        assert zero.l1 == zero.l2 == zero.combined == 0.0

        br = supervised_loss(pred_map, gt_map, trans, K)
        in_trans = trans.as_bool() & (gt > 0)
        in_rest = ~trans.as_bool() & (gt > 0)
        assert not np.any(in_trans & in_rest)
        assert br.n2 == in_trans.sum() and br.n1 == in_rest.sum()
        assert br.n1 + br.n2 == np.count_nonzero(gt)

        values = [self_supervised_loss(pred_map, gt_map, trans, K, a)[0] for a in (0, 0.1, 0.5, 1, 2)]
        assert all(x <= y for x, y in zip(values, values[1:]))

    gt = DepthMap(np.ones((2, 2)))
    pred = DepthMap(np.array([[4.0, 1.1], [4.0, 1.3]]))
    value, count = self_supervised_loss(pred, gt, BinaryMask(np.array([[1, 0], [1, 0]])), K)
    assert count == 2 and value == pytest.approx(0.05, abs=1e-7)
    assert combine(1.0, 0.5, 0.9) == 0.95


def test_criterion_5_metrics():
    row = lambda p, g: (DepthMap(np.array([p])), DepthMap(np.array([g])), new_raster(len(g), 1, 1))  # noqa: E731
    gt = [0.7, 1.0, 1.3]
    r = evaluate(*row(gt, gt))
    assert (r.rmse, r.rel, r.mae) == (0.0, 0.0, 0.0)
    assert f"{r.sigma_105:.2f}" == f"{r.sigma_110:.2f}" == f"{r.sigma_125:.2f}" == "100.00"

    r = evaluate(*row([1.06], [1.00]))
    assert r.sigma_105 == 0.0 and r.sigma_110 == 100.0

    r = evaluate(*row([1.0, 1.2], [1.0, 1.0]))
    assert r.mae == pytest.approx(0.1, abs=1e-9)
    assert abs(r.rmse - math.sqrt(0.02)) < 1e-9

    rng = np.random.default_rng(5)
    for _ in range(1000):
        n = int(rng.integers(1, 50))
        g = rng.uniform(0.2, 3.0, n)
        p = np.where(rng.random(n) < 0.05, 0.0, g * rng.lognormal(0, 0.1, n))
        r = evaluate(*row(p, g))
        assert r.rmse >= r.mae
        assert r.sigma_105 <= r.sigma_110 <= r.sigma_125


def _pooled_baseline(out_dir):
    _, entries = read_run_manifest(out_dir / "manifest.jsonl")
    acc, masked = MetricAccumulator(), 0
    for e in entries:
        pair = read_pair(out_dir / e["dir"])
        hole = artificial_hole(pair)
        masked += hole.count()
        acc.add(complete_depth(pair.masked_depth, hole).depth, pair.target_depth, hole)
    return acc.report(), masked


def test_criterion_6_erosion_ablation(tmp_path):
    start = time.perf_counter()
    root = write_dataset(tmp_path / "data", n_scenes=2, n_frames=4, seed=21)
    ero, flat = tmp_path / "erosion", tmp_path / "non_erosion"
    assert main(["synthesize", "--root", str(root), "--out", str(ero)]) == 0
    assert main(["synthesize", "--root", str(root), "--out", str(flat), "--no-erosion"]) == 0
    good, n_good = _pooled_baseline(ero)
    bad, n_bad = _pooled_baseline(flat)
    assert n_bad > n_good
    assert good.rmse < bad.rmse
    assert good.rel < bad.rel and good.mae < bad.mae
    assert good.sigma_105 > bad.sigma_105
    assert good.sigma_110 > bad.sigma_110
    assert good.sigma_125 > bad.sigma_125
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"took {elapsed:.2f} s"


def _tree_hash(root):
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file():
            h.update(p.relative_to(root).as_posix().encode() + b"\0" + p.read_bytes())
    return h.hexdigest()


def test_criterion_7_determinism(tmp_path):
    root = write_dataset(tmp_path / "data", n_scenes=2, n_frames=3, seed=9)
    digests = []
    for run in ("a", "b"):
        out = tmp_path / run
        rc = main(["synthesize", "--root", str(root), "--out", str(out), "--jobs", "4", "--augment", "--seed", "17"])
        assert rc == 0
        digests.append(_tree_hash(out))
    assert digests[0] == digests[1]


def test_criterion_8_baseline():
    hole = np.zeros((24, 24), bool)
    hole[7:17, 6:16] = True
    res = complete_depth(DepthMap(np.where(hole, 0, 2.0)), BinaryMask(hole))
    assert np.all(res.depth.data[hole] == 2.0)

    v, u = np.mgrid[0:40, 0:48].astype(float)
    ramp = 0.9 + 0.008 * u - 0.005 * v
    hole = np.zeros((40, 48), bool)
    hole[12:28, 16:32] = True
    res = complete_depth(DepthMap(np.where(hole, 0, ramp)), BinaryMask(hole))
    assert res.converged
    assert np.abs(res.depth.data - ramp)[hole].max() < 1e-3

    rng = np.random.default_rng(8)
    for _ in range(100):
        z = 1.0 + rng.uniform(-0.01, 0.01) * u[:32, :32] + rng.uniform(-0.01, 0.01) * v[:32, :32]
        y0, x0 = rng.integers(0, 20, size=2)
        z[y0 : y0 + 12, x0 : x0 + 12] = 0.6 + rng.uniform(0, 0.1)
        hole = np.zeros((32, 32), bool)
        for _ in range(int(rng.integers(1, 4))):
            hy, hx = rng.integers(0, 28, size=2)
            hole[hy : hy + rng.integers(2, 9), hx : hx + rng.integers(2, 9)] = True
        masked = DepthMap(np.where(hole, 0, z))
        out = complete_depth(masked, BinaryMask(hole)).depth.data
        known = masked.data > 0
        labels, n = ndimage.label(hole)
        for i in range(1, n + 1):
            comp = labels == i
            rim = ndimage.binary_dilation(comp) & known
            assert out[comp].min() >= masked.data[rim].min()
            assert out[comp].max() <= masked.data[rim].max()
